#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "degree_optimization.hpp"
#include "json.hpp"
#include "rank_distribution.hpp"

namespace bats {

using Json = nlohmann::json;

inline Json to_json(const RankDistribution& h) { return Json{{"M", h.M}, {"h", h.h}}; }

inline Json to_json(const DegreeDistribution& psi) { return Json{{"D", psi.D}, {"psi", psi.psi}}; }

namespace detail {

template <class T>
T field_of(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string(what) + " needs field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(std::string(what) + " has a malformed field '" + key + "'");
  }
}

}  // namespace detail

inline RankDistribution rank_dist_from_json(const Json& j) {
  return RankDistribution(detail::field_of<int>(j, "M", "rank distribution"),
                          detail::field_of<std::vector<double>>(j, "h", "rank distribution"));
}

inline DegreeDistribution degree_dist_from_json(const Json& j) {
  return DegreeDistribution(detail::field_of<int>(j, "D", "degree distribution"),
                            detail::field_of<std::vector<double>>(j, "psi", "degree distribution"));
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace bats
