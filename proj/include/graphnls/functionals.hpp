#pragma once

#include "graphnls/mesh.hpp"

namespace graphnls {

// ||u||_q^q / (||u||_2^{(q+2)/2} ||u'||_2^{(q-2)/2})
double quotient_gn1d(const GraphFunction& u, double q);
// Q_r(u) = ||u||_r^r / (||u'||_2^2 ||u||_2^{r-2})
double quotient_interdim(const GraphFunction& u, double r);
// ||u||_inf / (||u||_2^{1/2} ||u'||_2^{1/2})
double quotient_gn_inf(const GraphFunction& u);

struct GNKind {
  enum class Family { gn1d, interdim, gn_inf } family = Family::gn1d;
  double order = 6.0;  // q or r; ignored for gn_inf

  static GNKind gn1d(double q) { return {Family::gn1d, q}; }
  static GNKind interdim(double r) { return {Family::interdim, r}; }
  static GNKind gn_inf() { return {Family::gn_inf, 0.0}; }
  const char* name() const {
    switch (family) {
      case Family::gn1d: return "gn1d";
      case Family::interdim: return "interdim";
      case Family::gn_inf: return "gn_inf";
    }
    return "?";
  }
};

struct GNOptions {
  int n = 16;              // truncation radius for periodic specs
  double h_target = 0.02;
  int max_iters = 2000;
  double tol = 1e-10;
  int min_peak_nodes = 6;  // resolution guard against one-node spikes
  std::vector<double> lambda_ladder{4.0, 16.0, 64.0};
  std::uint64_t seed = 0;
  bool convergence_deltas = true;  // report n- and h-refinement deltas
};

struct GNReport {
  GNKind kind;
  double estimate = 0.0;  // lower bound of the supremum by construction
  GraphFunction maximizer;
  int n = 0;
  double h = 0.0;
  double n_delta = 0.0;  // quotient change when embedded in a larger graph
  double h_delta = 0.0;  // quotient change on a half-h mesh
  int ascent_iters = 0;
  std::vector<std::string> flags;
};

double evaluate_quotient(const GraphFunction& u, const GNKind& kind);

// projected log-quotient ascent from a given seed; returns the improved
// function (mass normalized to 1) and iteration count
std::pair<GraphFunction, int> ascend_quotient(const GraphFunction& seed,
                                              const GNKind& kind,
                                              const GNOptions& opts);

GNReport maximize_quotient(const PeriodicGraphSpec& spec, const GNKind& kind,
                           const GNOptions& opts);
GNReport maximize_quotient(const MetricGraph& graph, const GNKind& kind,
                           const GNOptions& opts);

struct CriticalMassReport {
  double mass = 0.0;
  GNReport gn;
};

// r = 6: mu = sqrt(3 / C_6);  r in [4,6): mu = (r / (2 K_r))^{2/(r-2)},
// 2-periodic specs only in the latter case
CriticalMassReport critical_mass_homogeneous(const PeriodicGraphSpec& spec,
                                             double r, const GNOptions& opts);

// linear resampling of u onto another mesh over the same graph
GraphFunction resample(const GraphFunction& u,
                       const std::shared_ptr<const Mesh>& target);

}  // namespace graphnls
