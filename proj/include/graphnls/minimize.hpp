#pragma once

#include <optional>

#include "graphnls/mesh.hpp"

namespace graphnls {

enum class Classification { converged, vanishing, blowup, maxiter };
const char* to_string(Classification c);

enum class Regime {
  negative_energy_ground_state,
  zero_level_vanishing,
  unbounded_below
};
const char* to_string(Regime r);

struct SolveOptions {
  int max_iters = 20000;
  double energy_tol = 1e-10;    // relative energy change
  double residual_tol = 1e-6;   // scaled by max(1, ||u'||_2)
  double vanish_sup_ratio = 1e-3;
  double blowup_grad_ratio = 1e4;
  double h_target = 0.05;
  std::uint64_t seed = 0;

  // truncation schedule for periodic specs: n doubling from n_start
  int n_start = 4;
  int n_max_dim1 = 32;
  int n_max_dim2 = 16;
  double n_schedule_tol = 1e-6;  // relative energy change across doublings

  // initial guess: gaussian bump at the most interior point (default), or a
  // caller-provided function on the solve mesh
  double bump_width = 2.0;
  std::optional<GraphFunction> initial;

  void validate() const {
    if (max_iters < 1) throw SpecError("max_iters must be >= 1");
    if (!(energy_tol > 0.0) || !(residual_tol > 0.0) ||
        !(vanish_sup_ratio > 0.0) || !(blowup_grad_ratio > 0.0) ||
        !(h_target > 0.0))
      throw SpecError("solver tolerances must be positive");
  }
};

struct SupHistory {
  double initial = 0.0;
  double final_value = 0.0;
  double max_value = 0.0;
  double min_value = 0.0;
};

struct SolveResult {
  Classification classification = Classification::maxiter;
  GraphFunction u;
  double energy = 0.0;
  double lambda = 0.0;
  Residual resid;
  int iterations = 0;
  SupHistory sup;
  double mass = 0.0;
  int truncation_radius = -1;  // -1 for non-periodic inputs
  double h = 0.0;
  std::vector<std::string> flags;
};

// most interior point of the graph: (edge, midpoint-ish offset) maximizing
// the distance to the truncation boundary
std::pair<int, double> interior_point(const MetricGraph& graph);

// gaussian bump centered at a point on an edge
GraphFunction gaussian_bump_at(const std::shared_ptr<const Mesh>& mesh,
                               int edge, double offset, double width,
                               double mu);

// core flow on a fixed mesh
SolveResult solve_on_mesh(const std::shared_ptr<const Mesh>& mesh,
                          const EnergyParams& params, const SolveOptions& opts);

// drives the truncation schedule for periodic specs (dim >= 1); for dim = 0
// specs a single solve on the finite graph
SolveResult solve_ground_state(const PeriodicGraphSpec& spec,
                               const EnergyParams& params,
                               const SolveOptions& opts);
SolveResult solve_ground_state(const MetricGraph& graph,
                               const EnergyParams& params,
                               const SolveOptions& opts);

// solve + competitor certificates
struct RegimeReport {
  Regime regime = Regime::zero_level_vanishing;
  SolveResult solve;
  double best_competitor_energy = 0.0;  // most negative admissible certificate
  std::vector<std::string> flags;
};
RegimeReport classify_regime(const PeriodicGraphSpec& spec,
                             const EnergyParams& params,
                             const SolveOptions& opts);

}  // namespace graphnls
