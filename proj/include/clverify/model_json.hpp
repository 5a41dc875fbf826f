#pragma once

#include "clverify/model.hpp"
#include "json.hpp"

namespace clv {

// {"components": {"S": ["1","2"]}, "interactions": {"T": [["1","2"]]},
//  "marking": [["t","1"],["n","2"]]}, indices as dotted strings, "eps" = root.
inline nlohmann::json configuration_to_json(const Configuration& c) {
  nlohmann::json j;
  j["components"] = nlohmann::json::object();
  for (auto& [t, set] : c.architecture.components) {
    auto arr = nlohmann::json::array();
    for (auto& u : set) arr.push_back(index_to_string(u));
    j["components"][t] = arr;
  }
  j["interactions"] = nlohmann::json::object();
  for (auto& [t, tuples] : c.architecture.interactions) {
    auto arr = nlohmann::json::array();
    for (auto& tup : tuples) {
      auto ja = nlohmann::json::array();
      for (auto& u : tup) ja.push_back(index_to_string(u));
      arr.push_back(ja);
    }
    j["interactions"][t] = arr;
  }
  j["marking"] = nlohmann::json::array();
  for (auto& p : c.marking)
    j["marking"].push_back({p.state, index_to_string(p.index)});
  return j;
}

inline Configuration configuration_from_json(const nlohmann::json& j) {
  Configuration c;
  if (j.contains("components"))
    for (auto& [t, arr] : j.at("components").items()) {
      auto& set = c.architecture.components[t];
      for (auto& s : arr) set.insert(index_from_string(s.get<std::string>()));
    }
  if (j.contains("interactions"))
    for (auto& [t, arr] : j.at("interactions").items()) {
      auto& set = c.architecture.interactions[t];
      for (auto& ja : arr) {
        std::vector<Index> tup;
        for (auto& s : ja) tup.push_back(index_from_string(s.get<std::string>()));
        set.insert(tup);
      }
    }
  if (j.contains("marking"))
    for (auto& pr : j.at("marking"))
      c.marking.insert({pr.at(0).get<std::string>(),
                        index_from_string(pr.at(1).get<std::string>())});
  return c;
}

}  // namespace clv
