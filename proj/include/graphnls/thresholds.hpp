#pragma once

#include <optional>

#include "graphnls/functionals.hpp"
#include "graphnls/minimize.hpp"

namespace graphnls {

// F_{p,q,alpha}(u, mu) = 1 - (2/p) Q_p(u) mu^{(p-2)/2}
//                          - (2 alpha/q) Q_q(u) mu^{(q-2)/2},
// with the inter-dimensional quotients Q_r evaluated in the same trapezoid
// discretization as the energy, so that E(u) = (1/2)||u'||_2^2 F(u, ||u||_2^2)
// holds exactly at the discrete level.
double big_f(const GraphFunction& u, double mu, const EnergyParams& params);

// Q_{p,q}(u) = ((1/2)||u'||_2^2 - (1/p)||u||_p^p) / ((1/q)||u||_q^q)
double quotient_defocusing(const GraphFunction& u, double p, double q);

struct ThresholdOptions {
  GNOptions gn;               // truncation / mesh / ascent controls
  SolveOptions solve;         // used for solver cross-checks
  int max_probes = 24;
  double bracket_rel_tol = 0.08;
  int restarts = 5;           // descent restarts for the alpha_bar estimate
  double cross_delta_frac = 0.1;  // relative offset for cross-validation
  bool cross_validate = true;
  bool solver_probes = false;  // also classify the regime at each probe

  void validate() const {
    if (max_probes < 1) throw SpecError("max_probes must be >= 1");
    if (!(bracket_rel_tol > 0.0))
      throw SpecError("bracket_rel_tol must be positive");
    if (restarts < 1) throw SpecError("restarts must be >= 1");
  }
};

// root of f(t) = 1 - (t/mu_p)^{(p-2)/2} - alpha (t/mu_q)^{(q-2)/2};
// for alpha = 0 this is exactly mu_p
double mu_lower_bound(double mu_p, double mu_q, double p, double q,
                      double alpha);

// scale-free estimate of the infimum of F over nonzero u: maximizes the
// weighted quotient combination from a warm-started pool of GN maximizers.
// The returned value is an upper estimate of the true infimum (the discrete
// maximization only explores finitely many profiles).
class BigFEstimator {
 public:
  BigFEstimator(const PeriodicGraphSpec& spec, double p, double q,
                double alpha, const ThresholdOptions& opts);

  // best F estimate at this mass; the internal pool is warm-started across
  // calls so a bisection reuses previous maximizers
  double value(double mu);

  double mu_p() const { return mu_p_; }
  double mu_q() const { return mu_q_; }
  double k_p() const { return k_p_; }
  double k_q() const { return k_q_; }
  const GraphFunction& best() const { return pool_.front(); }

 private:
  double p_, q_, alpha_;
  ThresholdOptions opts_;
  std::shared_ptr<const Mesh> mesh_;
  double k_p_ = 0.0, k_q_ = 0.0;      // discrete GN constants
  double mu_p_ = 0.0, mu_q_ = 0.0;    // derived homogeneous critical masses
  std::vector<GraphFunction> pool_;
};

double estimate_big_f_inf(const PeriodicGraphSpec& spec, double mu,
                          const EnergyParams& params,
                          const ThresholdOptions& opts);

struct ProbeRecord {
  double value = 0.0;   // probed mass (or alpha)
  double f_hat = 0.0;   // F estimate at the probe
  std::optional<Regime> regime;  // solver classification, when run
};

struct ThresholdReport {
  enum class Target { mu_crit, alpha_bar } target = Target::mu_crit;
  double lo = 0.0, hi = 0.0;

  // analytic data (mu_crit target)
  double mu_bar = 0.0;      // analytic lower bound (root of f)
  double mu_p = 0.0;        // homogeneous critical mass at exponent p
  double mu_q = 0.0;
  double upper_bound = 0.0;  // min(mu_p, alpha^{-2/(q-2)} mu_q)

  // alpha_bar target
  double alpha_bar = 0.0;
  double diagnostic_lower = 0.0;  // crude lower bound from the probe pool

  std::vector<ProbeRecord> probes;
  std::vector<std::string> flags;

  double midpoint() const { return 0.5 * (lo + hi); }
};

// bisection for the combined critical mass mu_{p,q,alpha} on a 2-periodic
// spec, 4 <= q < p <= 6, alpha > 0
ThresholdReport estimate_mu_crit(const PeriodicGraphSpec& spec, double p,
                                 double q, double alpha,
                                 const ThresholdOptions& opts);

// defocusing threshold: alpha_bar = inf Q_{p,q} over the mass-mu sphere when
// the homogeneous level is negative, 0 otherwise
ThresholdReport estimate_alpha_bar(const PeriodicGraphSpec& spec, double p,
                                   double q, double mu,
                                   const ThresholdOptions& opts);

}  // namespace graphnls
