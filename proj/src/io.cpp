#include "graphnls/io.hpp"

#include <algorithm>
#include <fstream>

namespace graphnls {

using nlohmann::json;

PeriodicGraphSpec spec_from_json(const json& j) {
  PeriodicGraphSpec s;
  try {
    s.name = j.value("name", "unnamed");
    s.dim = j.at("dim").get<int>();
    for (const auto& jv : j.at("vertices")) {
      SpecVertex v;
      v.id = jv.at("id").get<std::string>();
      if (jv.contains("pos"))
        v.pos = std::array<double, 2>{jv["pos"].at(0).get<double>(),
                                      jv["pos"].at(1).get<double>()};
      s.vertices.push_back(v);
    }
    for (const auto& je : j.at("edges")) {
      SpecEdge e;
      e.id = je.at("id").get<std::string>();
      e.from = je.at("from").get<std::string>();
      e.to = je.at("to").get<std::string>();
      if (je.contains("shift")) {
        const auto& sh = je["shift"];
        for (size_t k = 0; k < sh.size() && k < 2; ++k)
          e.shift[k] = sh.at(k).get<int>();
      }
      e.halfline = je.value("halfline", false);
      e.length = je.value("length", e.halfline ? 0.0 : -1.0);
      s.edges.push_back(e);
    }
  } catch (const json::exception& ex) {
    throw SpecError(std::string("malformed spec JSON: ") + ex.what());
  }
  return validate_spec(s);
}

json spec_to_json(const PeriodicGraphSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["dim"] = spec.dim;
  j["vertices"] = json::array();
  for (const auto& v : spec.vertices) {
    json jv{{"id", v.id}};
    if (v.pos) jv["pos"] = {(*v.pos)[0], (*v.pos)[1]};
    j["vertices"].push_back(jv);
  }
  j["edges"] = json::array();
  for (const auto& e : spec.edges) {
    json je{{"id", e.id}, {"from", e.from}, {"to", e.to}};
    json sh = json::array();
    for (int k = 0; k < std::max(spec.dim, 0); ++k) sh.push_back(e.shift[k]);
    je["shift"] = sh;
    if (e.halfline)
      je["halfline"] = true;
    else
      je["length"] = e.length;
    j["edges"].push_back(je);
  }
  return j;
}

PeriodicGraphSpec load_spec(const std::string& name_or_path) {
  const auto names = builtin_spec_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    return builtin_spec(name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("cannot open spec file '" + name_or_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw SpecError(std::string("spec JSON parse failure: ") + ex.what());
  }
  return spec_from_json(j);
}

json graph_to_json(const MetricGraph& g) {
  json j;
  j["spec"] = g.spec_name;
  j["dim"] = g.dim;
  j["truncation_radius"] = g.truncation_radius;
  j["bc"] = g.bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
  j["num_vertices"] = g.vertices.size();
  j["num_edges"] = g.edges.size();
  j["total_length"] = g.total_length();
  j["num_boundary"] = g.boundary_vertices().size();
  return j;
}

}  // namespace graphnls
