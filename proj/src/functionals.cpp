#include "graphnls/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "graphnls/minimize.hpp"

namespace graphnls {

double quotient_gn1d(const GraphFunction& u, double q) {
  if (q <= 2.0) throw SpecError("gn1d quotient requires q > 2");
  double n2 = norm_l2sq(u), nk = seminorm_h1sq(u);
  if (!(n2 > 0.0) || !(nk > 0.0))
    throw SpecError("quotient undefined for (near-)constant functions");
  return norm_lp_pow_exact(u, q) /
         (std::pow(n2, (q + 2.0) / 4.0) * std::pow(nk, (q - 2.0) / 4.0));
}

double quotient_interdim(const GraphFunction& u, double r) {
  if (r <= 2.0) throw SpecError("interdim quotient requires r > 2");
  double n2 = norm_l2sq(u), nk = seminorm_h1sq(u);
  if (!(n2 > 0.0) || !(nk > 0.0))
    throw SpecError("quotient undefined for (near-)constant functions");
  return norm_lp_pow_exact(u, r) / (nk * std::pow(n2, (r - 2.0) / 2.0));
}

double quotient_gn_inf(const GraphFunction& u) {
  double n2 = norm_l2sq(u), nk = seminorm_h1sq(u);
  if (!(n2 > 0.0) || !(nk > 0.0))
    throw SpecError("quotient undefined for (near-)constant functions");
  return norm_linf(u) / (std::pow(n2, 0.25) * std::pow(nk, 0.25));
}

double evaluate_quotient(const GraphFunction& u, const GNKind& kind) {
  switch (kind.family) {
    case GNKind::Family::gn1d: return quotient_gn1d(u, kind.order);
    case GNKind::Family::interdim: return quotient_interdim(u, kind.order);
    case GNKind::Family::gn_inf: return quotient_gn_inf(u);
  }
  throw SpecError("unknown quotient kind");
}

namespace {

// gradient of log Q; u assumed mass-normalized but formula is scale-free
Eigen::VectorXd grad_log_quotient(const GraphFunction& u, const GNKind& kind) {
  const Mesh& mesh = *u.mesh;
  double n2 = norm_l2sq(u), nk = seminorm_h1sq(u);
  Eigen::VectorXd Mu = mesh.mass() * u.values;
  Eigen::VectorXd Ku = mesh.stiffness() * u.values;
  Eigen::VectorXd g;
  if (kind.family == GNKind::Family::gn_inf) {
    int i_star = 0;
    u.values.cwiseAbs().maxCoeff(&i_star);
    g = Eigen::VectorXd::Zero(u.values.size());
    g[i_star] = (u.values[i_star] >= 0.0 ? 1.0 : -1.0) /
                std::abs(u.values[i_star]);
    g -= 0.5 * Mu / n2 + 0.5 * Ku / nk;
  } else {
    const double r = kind.order;
    double nr = norm_lp_pow(u, r);
    Eigen::VectorXd Wf =
        mesh.lumped_mass().cwiseProduct(nonlinearity(u.values, r));
    if (kind.family == GNKind::Family::gn1d)
      g = r * Wf / nr - (r + 2.0) / 2.0 * Mu / n2 - (r - 2.0) / 2.0 * Ku / nk;
    else
      g = r * Wf / nr - 2.0 * (r - 2.0) * Mu / n2 - 2.0 * Ku / nk;
  }
  for (int nd : mesh.dirichlet_nodes()) g[nd] = 0.0;
  return g;
}

// peak resolution: number of nodes above half the sup
int peak_nodes(const Eigen::VectorXd& v) {
  double half = 0.5 * v.cwiseAbs().maxCoeff();
  int c = 0;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) >= half) ++c;
  return c;
}

// sech^{2/(r-2)}(b d) profile centered via a nodal distance field
GraphFunction profile_seed(const std::shared_ptr<const Mesh>& mesh,
                           const Eigen::VectorXd& dist, double r, double b) {
  double s = r >= 6.0 ? 0.5 : 2.0 / (r - 2.0);
  GraphFunction u{mesh, Eigen::VectorXd(mesh->num_nodes())};
  for (int i = 0; i < dist.size(); ++i)
    u.values[i] = std::pow(1.0 / std::cosh(b * dist[i]), s);
  mesh->apply_bc(u.values);
  double m = norm_l2sq(u);
  if (m > 0.0) u.values /= std::sqrt(m);
  return u;
}

}  // namespace

std::pair<GraphFunction, int> ascend_quotient(const GraphFunction& seed,
                                              const GNKind& kind,
                                              const GNOptions& opts) {
  GraphFunction u = seed;
  const auto mesh = u.mesh;
  double m = norm_l2sq(u);
  if (!(m > 0.0)) throw SpecError("seed has zero mass");
  u.values /= std::sqrt(m);

  Preconditioner prec(*mesh);
  const bool guard =
      kind.family == GNKind::Family::gn_inf ||
      (kind.family != GNKind::Family::gn_inf && kind.order >= 5.5);

  double logq = std::log(evaluate_quotient(u, kind));
  Eigen::VectorXd u_prev, d_prev;
  double tau = 0.1;
  int flat = 0;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    Eigen::VectorXd g = grad_log_quotient(u, kind);
    Eigen::VectorXd d = prec.solve(g);
    if (u_prev.size() > 0) {
      Eigen::VectorXd s = u.values - u_prev;
      Eigen::VectorXd y = d - d_prev;
      double sy = std::abs(s.dot(y));
      if (sy > 0.0) tau = std::clamp(s.dot(s) / sy, 1e-12, 1e2);
    }
    u_prev = u.values;
    d_prev = d;

    double t = tau;
    bool accepted = false;
    GraphFunction trial{mesh, Eigen::VectorXd()};
    double logq_t = 0.0;
    for (int bt = 0; bt < 40; ++bt) {
      trial.values = u.values + t * d;  // ascent
      mesh->apply_bc(trial.values);
      double mm = norm_l2sq(trial);
      if (mm > 0.0) {
        trial.values /= std::sqrt(mm);
        bool resolved = !guard || peak_nodes(trial.values) >= opts.min_peak_nodes;
        if (resolved) {
          logq_t = std::log(evaluate_quotient(trial, kind));
          if (logq_t > logq - 1e-15) {
            accepted = true;
            break;
          }
        }
      }
      t /= 2.0;
    }
    if (!accepted) break;
    double dq = logq_t - logq;
    u.values.swap(trial.values);
    logq = logq_t;
    if (dq <= opts.tol)
      ++flat;
    else
      flat = 0;
    if (flat >= 5) {
      ++it;
      break;
    }
  }
  return {std::move(u), it};
}

GNReport maximize_quotient(const MetricGraph& graph, const GNKind& kind,
                           const GNOptions& opts) {
  auto mesh = build_mesh(graph, opts.h_target);
  GNReport rep;
  rep.kind = kind;
  rep.h = mesh->max_h();
  rep.n = graph.truncation_radius;

  // seed centers: one vertex per spec-vertex class (central cell) and the
  // midpoint of one copy of every spec edge; plus the most interior point
  std::vector<Eigen::VectorXd> dists;
  for (size_t v = 0; v < graph.vertices.size(); ++v)
    if (graph.vertices[v].cell == Shift{0, 0})
      dists.push_back(mesh->nodal_distance(
          vertex_distances(graph, static_cast<int>(v))));
  std::map<int, int> edge_rep;  // spec edge -> a central copy
  for (size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& ge = graph.edges[e];
    if (ge.cell == Shift{0, 0} || graph.dim == 0)
      edge_rep.emplace(ge.spec_edge, static_cast<int>(e));
  }
  auto point_dist = [&](int edge, double off) {
    const auto& e = graph.edges[edge];
    auto da = vertex_distances(graph, e.a);
    auto db = vertex_distances(graph, e.b);
    std::vector<double> dP(graph.vertices.size());
    for (size_t v = 0; v < dP.size(); ++v)
      dP[v] = std::min(off + da[v], (e.length - off) + db[v]);
    Eigen::VectorXd d = mesh->nodal_distance(dP);
    for (const auto& em : mesh->edge_meshes()) {
      if (em.graph_edge != edge) continue;
      for (size_t k = 0; k < em.nodes.size(); ++k)
        d[em.nodes[k]] =
            std::min(d[em.nodes[k]], std::abs(em.h * double(k) - off));
    }
    return d;
  };
  for (const auto& [se, e] : edge_rep)
    dists.push_back(point_dist(e, graph.edges[e].length / 2.0));
  {
    auto [e, off] = interior_point(graph);
    dists.push_back(point_dist(e, off));
  }

  const double r_eff =
      kind.family == GNKind::Family::gn_inf ? 6.0 : kind.order;
  std::vector<std::pair<double, GraphFunction>> seeds;
  for (const auto& d : dists)
    for (double lam : opts.lambda_ladder) {
      double b = (r_eff - 2.0) * std::sqrt(lam) / 2.0;
      // skip profiles the mesh cannot resolve
      double s = 2.0 / (r_eff - 2.0);
      double half_width = 2.0 * std::acosh(std::pow(2.0, 1.0 / s)) / b;
      if (half_width < opts.min_peak_nodes * mesh->max_h()) continue;
      auto seed = profile_seed(mesh, d, r_eff, b);
      if (!(norm_l2sq(seed) > 0.0)) continue;
      seeds.emplace_back(evaluate_quotient(seed, kind), std::move(seed));
    }
  if (seeds.empty()) throw SpecError("no admissible seed at this resolution");
  std::sort(seeds.begin(), seeds.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  double best = -1.0;
  const size_t n_ascents = std::min<size_t>(3, seeds.size());
  for (size_t s = 0; s < n_ascents; ++s) {
    auto [polished, iters] = ascend_quotient(seeds[s].second, kind, opts);
    rep.ascent_iters += iters;
    double qp = evaluate_quotient(polished, kind);
    if (qp > best) {
      best = qp;
      rep.maximizer = std::move(polished);
    }
  }
  rep.estimate = best;
  rep.flags.push_back(
      "estimate is a certified lower bound of the supremum; upper bounds "
      "are not claimed");

  if (opts.convergence_deltas) {
    auto fine = build_mesh(graph, opts.h_target / 2.0);
    rep.h_delta =
        evaluate_quotient(resample(rep.maximizer, fine), kind) - best;
  }
  return rep;
}

GNReport maximize_quotient(const PeriodicGraphSpec& spec, const GNKind& kind,
                           const GNOptions& opts) {
  if (spec.dim == 0) {
    auto graph = truncate(spec, 0, BoundaryCondition::dirichlet);
    return maximize_quotient(graph, kind, opts);
  }
  const auto s = spec.canonical() ? spec : rebase(spec, spec.min_separation());
  auto graph = truncate(s, opts.n, BoundaryCondition::dirichlet);
  auto rep = maximize_quotient(graph, kind, opts);

  if (opts.convergence_deltas) {
    // embed the maximizer into a larger truncation and re-evaluate
    auto big_graph = truncate(s, opts.n + 2, BoundaryCondition::dirichlet);
    auto big_mesh = build_mesh(big_graph, opts.h_target);
    std::map<std::pair<int, std::pair<int, int>>, const Mesh::EdgeMesh*> where;
    for (const auto& em : big_mesh->edge_meshes()) {
      const auto& e = big_graph.edges[em.graph_edge];
      where[{e.spec_edge, {e.cell[0], e.cell[1]}}] = &em;
    }
    GraphFunction big{big_mesh, Eigen::VectorXd::Zero(big_mesh->num_nodes())};
    const auto& small_mesh = *rep.maximizer.mesh;
    for (const auto& em : small_mesh.edge_meshes()) {
      const auto& e = graph.edges[em.graph_edge];
      auto it = where.find({e.spec_edge, {e.cell[0], e.cell[1]}});
      if (it == where.end()) continue;
      const auto& bem = *it->second;
      if (bem.nodes.size() != em.nodes.size())
        throw SpecError("embedding mismatch across truncations");
      for (size_t k = 0; k < em.nodes.size(); ++k)
        big.values[bem.nodes[k]] = rep.maximizer.values[em.nodes[k]];
    }
    big_mesh->apply_bc(big.values);
    rep.n_delta = evaluate_quotient(big, kind) - rep.estimate;
  }
  return rep;
}

CriticalMassReport critical_mass_homogeneous(const PeriodicGraphSpec& spec,
                                             double r, const GNOptions& opts) {
  if (!(r >= 4.0 && r <= 6.0))
    throw SpecError("critical mass defined for r in [4,6]");
  CriticalMassReport out;
  if (r == 6.0) {
    out.gn = maximize_quotient(spec, GNKind::gn1d(6.0), opts);
    out.mass = std::sqrt(3.0 / out.gn.estimate);
  } else {
    if (spec.dim != 2)
      throw SpecError(
          "inter-dimensional critical masses require a 2-periodic spec");
    out.gn = maximize_quotient(spec, GNKind::interdim(r), opts);
    out.mass = std::pow(r / (2.0 * out.gn.estimate), 2.0 / (r - 2.0));
  }
  out.gn.flags.push_back(
      "constant is a lower bound, so the derived critical mass is an "
      "upper-bound-style estimate");
  return out;
}

GraphFunction resample(const GraphFunction& u,
                       const std::shared_ptr<const Mesh>& target) {
  const Mesh& src = *u.mesh;
  GraphFunction out{target, Eigen::VectorXd::Zero(target->num_nodes())};
  // index source edge meshes by graph edge
  std::vector<const Mesh::EdgeMesh*> by_edge(src.graph().edges.size());
  for (const auto& em : src.edge_meshes()) by_edge[em.graph_edge] = &em;
  for (const auto& tem : target->edge_meshes()) {
    const auto* sem = by_edge.at(tem.graph_edge);
    for (size_t k = 0; k < tem.nodes.size(); ++k) {
      double x = tem.h * double(k);
      double pos = x / sem->h;
      size_t j = std::min(size_t(std::floor(pos)), sem->nodes.size() - 2);
      double w = pos - double(j);
      out.values[tem.nodes[k]] = (1.0 - w) * u.values[sem->nodes[j]] +
                                 w * u.values[sem->nodes[j + 1]];
    }
  }
  return out;
}

}  // namespace graphnls
