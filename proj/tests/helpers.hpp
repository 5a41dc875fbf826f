#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "clverify/cl_parser.hpp"
#include "clverify/model.hpp"

namespace clvtest {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline clv::Spec load_spec(const std::string& name) {
  return clv::parse_spec(read_file(std::string(CLV_SPEC_DIR) + "/" + name));
}

// ring architecture over naturals 1..n with a chosen token set
inline clv::Configuration ring_config(int n, const std::set<int>& tokens) {
  clv::Configuration c;
  auto& s = c.architecture.components["S"];
  auto& t = c.architecture.interactions["T"];
  for (int i = 1; i <= n; ++i) {
    s.insert(clv::Index{i});
    t.insert(std::vector<clv::Index>{clv::Index{i}, clv::Index{i % n + 1}});
    c.marking.insert({tokens.count(i) ? "t" : "n", clv::Index{i}});
  }
  return c;
}

// random per-type renaming over each type's instance set plus a few spares
inline clv::TypedRenaming random_renaming(const clv::Configuration& c, std::mt19937& rng,
                                          int spares = 2) {
  clv::TypedRenaming f;
  for (auto& [type, set] : c.architecture.components) {
    std::vector<clv::Index> dom(set.begin(), set.end());
    for (int k = 0; k < spares; ++k) dom.push_back({1000 + (int)rng() % 1000, k});
    std::sort(dom.begin(), dom.end());
    dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
    std::vector<clv::Index> img = dom;
    std::shuffle(img.begin(), img.end(), rng);
    for (size_t i = 0; i < dom.size(); ++i) f.per_type[type][dom[i]] = img[i];
  }
  return f;
}

}  // namespace clvtest
