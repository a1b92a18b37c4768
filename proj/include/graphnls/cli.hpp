#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphnls/io.hpp"

namespace graphnls {

struct ParamRange {
  double lo = 0.0, hi = 0.0, step = 0.0;
  std::vector<double> values() const;  // inclusive grid; throws ConfigError
};

// One CLI job. Flags map 1:1; unset optionals fall back to command defaults.
struct JobConfig {
  std::string command;  // check | solve | gn | threshold | sweep | competitor
  std::string spec = "line";  // builtin name or path to a spec JSON
  double p = 6.0;
  double q = 4.0;
  std::optional<double> alpha;
  std::optional<double> mu;
  std::optional<ParamRange> mu_range;
  std::optional<ParamRange> alpha_range;
  std::optional<int> n;        // truncation radius
  std::optional<double> h;     // target mesh width
  std::optional<int> max_iters;  // config-file-only override
  std::string bc = "dirichlet";
  std::uint64_t seed = 0;
  std::string out = ".";
  bool emit_svg = false;
  std::optional<double> tol;
  // competitor-specific
  std::string kind = "tent";   // tent | edge_soliton | soliton
  double lambda = 1.0;

  void validate() const;  // throws ConfigError
};

// Executes the job, writing artifacts under config.out.
// Exit codes: 0 success, 2 config error, 3 spec error, 4 solver
// non-classification (maxiter). Errors go to stderr as structured JSON.
int run(const JobConfig& config);

// Populates fields of config from a JSON object (keys named after the
// flags); used for --config files, with explicit flags taking precedence.
void apply_config_json(const nlohmann::json& j, JobConfig& config);

// Flag parsing front end used by the binary's main()
int run_main(int argc, char** argv);

// parallelism cap: GRAPHNLS_THREADS env var, else hardware concurrency
int max_threads();

}  // namespace graphnls
