#pragma once

#include "graphnls/mesh.hpp"

namespace graphnls {

// Closed-form line soliton of -phi'' + lambda phi = phi^{p-1}:
// phi(x) = a sech^s(b x), s = 2/(p-2), a = (lambda p / 2)^{1/(p-2)},
// b = (p-2) sqrt(lambda) / 2. Correctness is certified by the residual
// operation in the tests, never assumed.
struct SolitonParams {
  double p = 0.0, lambda = 0.0;
  double a = 0.0, b = 0.0, s = 0.0;
  double mass = 0.0;  // exact L2 mass on the whole line

  double operator()(double x) const {
    return a * std::pow(1.0 / std::cosh(b * x), s);
  }
};

SolitonParams soliton_params(double p, double lambda);
double soliton_mass(double p, double lambda);
// inverts mass(lambda); p = 6 carries a fixed mass, so inversion is refused
double soliton_lambda_for_mass(double p, double mass);

// samples the soliton centered on a length-L line proxy
struct SolitonFunction {
  GraphFunction u;
  SolitonParams params;
};
SolitonFunction soliton_on_line(double p, double lambda, double length,
                                double h_target, BoundaryCondition bc);

struct TentCompetitor {
  GraphFunction u;
  MetricGraph graph;   // the B_{2n+1} truncation the tent lives on
  double epsilon = 0;  // sup value after normalization
  double max_dist = 0;
};

// u_n = d_{2n} / max(d_{2n}) * eps_n on B_{2n+1}, ||u||_2^2 = mu exactly
TentCompetitor tent_competitor(const PeriodicGraphSpec& spec, int n, double mu,
                               double h_target = 0.25);

// Rescaled soliton phi_lambda = sqrt(lambda) phi(lambda x) supported on one
// edge, peak at the edge midpoint, endpoint value subtracted and negatives
// clamped so the extension by zero is continuous; exact mass mu_line().
GraphFunction edge_soliton_competitor(const std::shared_ptr<const Mesh>& mesh,
                                      int edge, double lambda);

}  // namespace graphnls
