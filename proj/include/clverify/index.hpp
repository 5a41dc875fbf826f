#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace clv {

// An index is a tree node: a finite sequence over [1..kappa]. The empty
// sequence is the root, written "eps" in all textual formats.
using Index = std::vector<int>;

inline std::string index_to_string(const Index& u) {
  if (u.empty()) return "eps";
  std::string s;
  for (size_t i = 0; i < u.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(u[i]);
  }
  return s;
}

inline Index index_from_string(const std::string& s) {
  if (s == "eps" || s.empty()) return {};
  Index u;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t dot = s.find('.', pos);
    std::string part = s.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw std::runtime_error("bad index syntax: '" + s + "'");
    for (char c : part)
      if (!isdigit(static_cast<unsigned char>(c)))
        throw std::runtime_error("bad index syntax: '" + s + "'");
    u.push_back(std::stoi(part));
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return u;
}

inline Index index_concat(const Index& a, const Index& b) {
  Index r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

inline Index index_child(const Index& a, int d) {
  Index r = a;
  r.push_back(d);
  return r;
}

inline bool index_is_prefix(const Index& p, const Index& u) {
  if (p.size() > u.size()) return false;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] != u[i]) return false;
  return true;
}

}  // namespace clv
