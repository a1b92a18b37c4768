#pragma once

#include <string>

#include <json.hpp>

#include "graphnls/graph.hpp"

namespace graphnls {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spec file schema:
// {"name","dim","vertices":[{"id","pos":[x,y]?}],
//  "edges":[{"id","from","to","shift":[g1,g2?],"length","halfline":bool?}]}
PeriodicGraphSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const PeriodicGraphSpec& spec);

// Loads a spec by builtin name or from a JSON file path.
PeriodicGraphSpec load_spec(const std::string& name_or_path);

nlohmann::json graph_to_json(const MetricGraph& g);

}  // namespace graphnls
