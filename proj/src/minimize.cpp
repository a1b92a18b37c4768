#include "graphnls/minimize.hpp"

#include <algorithm>
#include <cmath>

#include "graphnls/competitors.hpp"

namespace graphnls {

const char* to_string(Classification c) {
  switch (c) {
    case Classification::converged: return "converged";
    case Classification::vanishing: return "vanishing";
    case Classification::blowup: return "blowup";
    case Classification::maxiter: return "maxiter";
  }
  return "?";
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::negative_energy_ground_state:
      return "negative_energy_ground_state";
    case Regime::zero_level_vanishing: return "zero_level_vanishing";
    case Regime::unbounded_below: return "unbounded_below";
  }
  return "?";
}

std::pair<int, double> interior_point(const MetricGraph& graph) {
  auto bdry = graph.boundary_vertices();
  if (bdry.empty())
    return {0, graph.edges.at(0).length / 2.0};
  auto dist = boundary_distances(graph);
  int best_edge = 0;
  double best_off = graph.edges[0].length / 2.0, best_d = -1.0;
  for (size_t ei = 0; ei < graph.edges.size(); ++ei) {
    const auto& e = graph.edges[ei];
    // offset maximizing min(d_a + t, d_b + (l - t))
    double t = std::clamp((e.length + dist[e.b] - dist[e.a]) / 2.0, 0.0,
                          e.length);
    double d = std::min(dist[e.a] + t, dist[e.b] + (e.length - t));
    if (d > best_d) {
      best_d = d;
      best_edge = static_cast<int>(ei);
      best_off = t;
    }
  }
  return {best_edge, best_off};
}

GraphFunction gaussian_bump_at(const std::shared_ptr<const Mesh>& mesh,
                               int edge, double offset, double width,
                               double mu) {
  const auto& graph = mesh->graph();
  const auto& e = graph.edges.at(edge);
  auto da = vertex_distances(graph, e.a);
  auto db = vertex_distances(graph, e.b);
  std::vector<double> dP(graph.vertices.size());
  for (size_t v = 0; v < dP.size(); ++v)
    dP[v] = std::min(offset + da[v], (e.length - offset) + db[v]);

  GraphFunction u{mesh, Eigen::VectorXd(mesh->num_nodes())};
  Eigen::VectorXd d = mesh->nodal_distance(dP);
  for (const auto& em : mesh->edge_meshes()) {
    if (em.graph_edge != edge) continue;
    for (size_t k = 0; k < em.nodes.size(); ++k) {
      double s = em.h * double(k);
      d[em.nodes[k]] = std::min(d[em.nodes[k]], std::abs(s - offset));
    }
  }
  for (int i = 0; i < d.size(); ++i)
    u.values[i] = std::exp(-d[i] * d[i] / (2.0 * width * width));
  mesh->apply_bc(u.values);
  renormalize(u, mu);
  return u;
}

namespace {

double estimate_lambda(const GraphFunction& u, const EnergyParams& prm) {
  double rhs = norm_lp_pow(u, prm.p);
  if (prm.alpha != 0.0) rhs += prm.alpha * norm_lp_pow(u, prm.q);
  return (rhs - seminorm_h1sq(u)) / prm.mu;
}

// characteristic span of the domain for the dispersal energy floor
double domain_span(const MetricGraph& graph) {
  auto bdry = graph.boundary_vertices();
  if (bdry.empty()) return graph.total_length();
  auto dist = boundary_distances(graph);
  double m = 0.0;
  for (double d : dist)
    if (std::isfinite(d)) m = std::max(m, d);
  return std::max(2.0 * m, 1e-12);
}

}  // namespace

SolveResult solve_on_mesh(const std::shared_ptr<const Mesh>& mesh,
                          const EnergyParams& params,
                          const SolveOptions& opts) {
  params.validate();
  opts.validate();

  SolveResult res;
  res.h = mesh->max_h();
  const double mu = params.mu;

  GraphFunction u;
  if (opts.initial) {
    u = *opts.initial;
    if (u.mesh.get() != mesh.get())
      throw SpecError("initial guess lives on a different mesh");
    mesh->apply_bc(u.values);
    renormalize(u, mu);
  } else {
    auto [edge, off] = interior_point(mesh->graph());
    u = gaussian_bump_at(mesh, edge, off, opts.bump_width, mu);
  }

  Preconditioner prec(*mesh);
  // constrained gradient: K u - W f(u) + lambda M u with the multiplier
  // matched so the radial component drops out
  auto grad_constrained = [&](const GraphFunction& w) {
    Eigen::VectorXd f = nonlinearity(w.values, params.p);
    if (params.alpha != 0.0)
      f += params.alpha * nonlinearity(w.values, params.q);
    Eigen::VectorXd Wf = mesh->lumped_mass().cwiseProduct(f);
    Eigen::VectorXd Ku = mesh->stiffness() * w.values;
    double lam = (w.values.dot(Wf) - w.values.dot(Ku)) / mu;
    Eigen::VectorXd g = Ku - Wf + lam * (mesh->mass() * w.values);
    for (int n : mesh->dirichlet_nodes()) g[n] = 0.0;
    return g;
  };

  double E = energy(u, params);
  const double E0 = E;
  const double grad0 = std::sqrt(std::max(seminorm_h1sq(u), 1e-300));
  const double span = domain_span(mesh->graph());
  const double floor_bound =
      5.0 * mu * std::pow(M_PI / span, 2.0);  // dispersal energy scale
  res.sup.initial = norm_linf(u);
  res.sup.max_value = res.sup.min_value = res.sup.initial;

  Eigen::VectorXd u_prev, d_prev;
  double tau = 0.1;
  int flat_count = 0;
  bool stalled = false;

  auto is_dispersed = [&](double sup, double energy_now) {
    double sup_cap_sq = 6.0 * mu / mesh->graph().total_length();
    return energy_now <= floor_bound &&
           energy_now >= -1e-7 * std::max(1.0, std::abs(E0)) &&
           sup * sup <= sup_cap_sq;
  };

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    Eigen::VectorXd g = grad_constrained(u);
    Eigen::VectorXd d = prec.solve(g);

    if (u_prev.size() > 0) {
      Eigen::VectorXd s = u.values - u_prev;
      Eigen::VectorXd y = d - d_prev;
      double sy = s.dot(y);
      if (sy > 0.0) tau = std::clamp(s.dot(s) / sy, 1e-12, 1e3);
    }
    u_prev = u.values;
    d_prev = d;

    double t = tau;
    bool accepted = false;
    GraphFunction trial{mesh, Eigen::VectorXd()};
    double Et = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      trial.values = u.values - t * d;
      mesh->apply_bc(trial.values);
      double m = norm_l2sq(trial);
      if (m > 0.0) {
        trial.values *= std::sqrt(mu / m);
        Et = energy(trial, params);
        if (Et <= E + 1e-14 * std::max(1.0, std::abs(E))) {
          accepted = true;
          break;
        }
      }
      t /= 2.0;
    }
    if (!accepted) {
      stalled = true;
      break;
    }

    double dE = std::abs(E - Et);
    u.values.swap(trial.values);
    E = Et;

    double sup = norm_linf(u);
    res.sup.max_value = std::max(res.sup.max_value, sup);
    res.sup.min_value = std::min(res.sup.min_value, sup);

    // blow-up certificates, armed only at the critical exponent
    if (params.p == 6.0 && E < std::min(0.0, E0)) {
      double gradn = std::sqrt(seminorm_h1sq(u));
      double peak = 0.0;
      for (int i = 0; i < u.values.size(); ++i)
        peak = std::max(peak, mesh->lumped_mass()[i] * u.values[i] *
                                  u.values[i]);
      if (gradn >= opts.blowup_grad_ratio * grad0 || peak >= 0.25 * mu ||
          E < -1e8) {
        res.classification = Classification::blowup;
        res.u = std::move(u);
        res.energy = E;
        res.lambda = estimate_lambda(res.u, params);
        res.iterations = it + 1;
        res.sup.final_value = sup;
        res.mass = norm_l2sq(res.u);
        return res;
      }
    }

    if (sup <= opts.vanish_sup_ratio * res.sup.initial) {
      res.classification = Classification::vanishing;
      break;
    }

    if (dE <= opts.energy_tol * std::max(1.0, std::abs(E)))
      ++flat_count;
    else
      flat_count = 0;

    if (flat_count >= 5) {
      double lam = estimate_lambda(u, params);
      auto r = residual(u, lam, params);
      double scale = std::max(1.0, std::sqrt(seminorm_h1sq(u)));
      if (r.edge <= opts.residual_tol * scale &&
          r.kirchhoff <= opts.residual_tol * scale) {
        if (is_dispersed(sup, E))
          res.classification = Classification::vanishing;
        else
          res.classification = Classification::converged;
        res.lambda = lam;
        res.resid = r;
        ++it;
        break;
      }
      flat_count = 0;  // flat but not stationary yet; keep flowing
    }
  }

  res.u = std::move(u);
  res.energy = E;
  res.iterations = std::min(it + (stalled ? 1 : 0), opts.max_iters);
  res.sup.final_value = norm_linf(res.u);
  res.mass = norm_l2sq(res.u);
  if (res.classification == Classification::maxiter) {
    // loop exhausted or stalled without a residual certificate
    res.lambda = estimate_lambda(res.u, params);
    res.resid = residual(res.u, res.lambda, params);
    double scale = std::max(1.0, std::sqrt(seminorm_h1sq(res.u)));
    if (res.sup.final_value <= opts.vanish_sup_ratio * res.sup.initial ||
        is_dispersed(res.sup.final_value, E)) {
      res.classification = Classification::vanishing;
    } else if (res.resid.edge <= opts.residual_tol * scale &&
               res.resid.kirchhoff <= opts.residual_tol * scale) {
      res.classification = Classification::converged;
    } else if (stalled) {
      res.flags.push_back("flow stalled without residual certificate");
    }
  } else if (res.classification == Classification::vanishing &&
             res.lambda == 0.0) {
    res.lambda = estimate_lambda(res.u, params);
    res.resid = residual(res.u, res.lambda, params);
  }
  return res;
}

SolveResult solve_ground_state(const MetricGraph& graph,
                               const EnergyParams& params,
                               const SolveOptions& opts) {
  auto mesh = build_mesh(graph, opts.h_target);
  auto res = solve_on_mesh(mesh, params, opts);
  res.truncation_radius =
      graph.dim >= 1 ? graph.truncation_radius : -1;
  return res;
}

SolveResult solve_ground_state(const PeriodicGraphSpec& spec,
                               const EnergyParams& params,
                               const SolveOptions& opts) {
  params.validate();
  opts.validate();

  SolveResult res;
  if (spec.dim == 0) {
    auto graph = truncate(spec, 0, BoundaryCondition::dirichlet);
    res = solve_ground_state(graph, params, opts);
  } else {
    const auto s = spec.canonical() ? spec : rebase(spec, spec.min_separation());
    const int n_max = spec.dim == 1 ? opts.n_max_dim1 : opts.n_max_dim2;
    double prevE = 0.0;
    bool have_prev = false;
    for (int n = opts.n_start; n <= n_max; n *= 2) {
      auto graph = truncate(s, n, BoundaryCondition::dirichlet);
      res = solve_ground_state(graph, params, opts);
      res.truncation_radius = n;
      if (res.classification == Classification::blowup) break;
      if (have_prev && std::abs(res.energy - prevE) <=
                           opts.n_schedule_tol *
                               std::max(1.0, std::abs(res.energy)))
        break;
      prevE = res.energy;
      have_prev = true;
      if (n * 2 > n_max) break;
    }
  }

  if (params.p == 6.0 && spec.dim >= 1) {
    double mt = tilde_mu(spec);
    if (std::abs(params.mu - mt) <= 0.02 * mt)
      res.flags.push_back(
          "borderline mass at p = 6: behavior at mu = mu_tilde is beyond "
          "numerical resolution");
  }
  return res;
}

RegimeReport classify_regime(const PeriodicGraphSpec& spec,
                             const EnergyParams& params,
                             const SolveOptions& opts) {
  RegimeReport rep;
  rep.solve = solve_ground_state(spec, params, opts);
  rep.flags = rep.solve.flags;

  if (rep.solve.classification == Classification::blowup) {
    rep.regime = Regime::unbounded_below;
    return rep;
  }

  // energy certificates: any admissible trial function with exact-quadrature
  // energy below zero certifies a negative level, even when the flow stalls
  // or disperses. Exact per-cell integration of the piecewise-linear
  // candidate makes the value its true energy, not a quadrature estimate.
  auto exact_energy = [&params](const GraphFunction& u) {
    double e = 0.5 * seminorm_h1sq(u) -
               norm_lp_pow_exact(u, params.p) / params.p;
    if (params.alpha != 0.0)
      e -= params.alpha / params.q * norm_lp_pow_exact(u, params.q);
    return e;
  };
  double best = 0.0;
  if (spec.dim >= 1) {
    const auto s = spec.canonical() ? spec : rebase(spec, spec.min_separation());
    for (int n : {2, 4, 8, 16}) {
      auto tent = tent_competitor(s, n, params.mu);
      best = std::min(best, exact_energy(tent.u));
    }
  }
  // the final iterate keeps exact mass mu, so it is itself a certificate
  if (rep.solve.u.mesh) best = std::min(best, exact_energy(rep.solve.u));
  rep.best_competitor_energy = best;

  const double cert_tol = std::max(1e-6, 10.0 * opts.energy_tol);
  bool negative_level =
      (rep.solve.classification == Classification::converged &&
       rep.solve.energy < -cert_tol) ||
      best < -cert_tol;
  rep.regime = negative_level ? Regime::negative_energy_ground_state
                              : Regime::zero_level_vanishing;
  if (rep.solve.classification == Classification::maxiter)
    rep.flags.push_back("solver did not classify; regime rests on "
                        "energy certificates only");
  return rep;
}

}  // namespace graphnls
