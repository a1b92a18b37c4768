#include "graphnls/competitors.hpp"

#include <cmath>
#include <set>

namespace graphnls {

SolitonParams soliton_params(double p, double lambda) {
  if (!(p > 2.0 && p <= 6.0)) throw SpecError("p must lie in (2,6]");
  if (!(lambda > 0.0)) throw SpecError("lambda must be positive");
  SolitonParams sp;
  sp.p = p;
  sp.lambda = lambda;
  sp.s = 2.0 / (p - 2.0);
  sp.a = std::pow(lambda * p / 2.0, 1.0 / (p - 2.0));
  sp.b = (p - 2.0) * std::sqrt(lambda) / 2.0;
  // int sech^{2s} = sqrt(pi) Gamma(s) / Gamma(s + 1/2)
  sp.mass = sp.a * sp.a / sp.b * std::sqrt(M_PI) *
            std::exp(std::lgamma(sp.s) - std::lgamma(sp.s + 0.5));
  return sp;
}

double soliton_mass(double p, double lambda) {
  return soliton_params(p, lambda).mass;
}

double soliton_lambda_for_mass(double p, double mass) {
  if (!(mass > 0.0)) throw SpecError("mass must be positive");
  if (p >= 6.0)
    throw SpecError("p = 6 solitons carry the fixed mass mu_line()");
  // mass(lambda) = mass(1) * lambda^{(6-p)/(2(p-2))}
  double c1 = soliton_mass(p, 1.0);
  return std::pow(mass / c1, 2.0 * (p - 2.0) / (6.0 - p));
}

SolitonFunction soliton_on_line(double p, double lambda, double length,
                                double h_target, BoundaryCondition bc) {
  SolitonFunction out;
  out.params = soliton_params(p, lambda);
  auto g = make_interval(length, bc);
  auto mesh = build_mesh(g, h_target);
  GraphFunction u{mesh, Eigen::VectorXd::Zero(mesh->num_nodes())};
  const auto& em = mesh->edge_meshes()[0];
  for (size_t k = 0; k < em.nodes.size(); ++k) {
    double x = em.h * double(k) - length / 2.0;
    u.values[em.nodes[k]] = out.params(x);
  }
  mesh->apply_bc(u.values);
  out.u = std::move(u);
  return out;
}

TentCompetitor tent_competitor(const PeriodicGraphSpec& spec, int n, double mu,
                               double h_target) {
  if (n < 1) throw SpecError("tent requires n >= 1");
  if (!(mu > 0.0)) throw SpecError("mass must be positive");
  if (spec.dim < 1 || !spec.canonical())
    throw SpecError("tent requires a canonical periodic spec");

  TentCompetitor out;
  out.graph = truncate(spec, 2 * n + 1, BoundaryCondition::dirichlet);

  // closure of the complement of B_{2n}: every vertex touching an edge whose
  // cell lies outside ||z|| <= 2n, plus the dangling truncation boundary
  std::set<int> src;
  for (const auto& e : out.graph.edges)
    if (sup_norm(e.cell) > 2 * n) {
      src.insert(e.a);
      src.insert(e.b);
    }
  for (int b : out.graph.boundary_vertices()) src.insert(b);
  auto dist = source_distances(out.graph,
                               std::vector<int>(src.begin(), src.end()));

  auto mesh = build_mesh(out.graph, h_target);
  Eigen::VectorXd d = mesh->nodal_distance(dist);
  // ring edges belong to the complement wholesale; the along-edge
  // interpolation between two distance-0 endpoints must not resurrect them
  for (const auto& em : mesh->edge_meshes())
    if (sup_norm(out.graph.edges[em.graph_edge].cell) > 2 * n)
      for (int node : em.nodes) d[node] = 0.0;
  out.max_dist = d.maxCoeff();
  if (!(out.max_dist > 0.0))
    throw SpecError("tent support is empty at this n");
  GraphFunction u{mesh, d / out.max_dist};
  renormalize(u, mu);
  out.epsilon = norm_linf(u);
  out.u = std::move(u);
  return out;
}

GraphFunction edge_soliton_competitor(const std::shared_ptr<const Mesh>& mesh,
                                      int edge, double lambda) {
  if (!(lambda > 0.0)) throw SpecError("lambda must be positive");
  const auto& graph = mesh->graph();
  if (edge < 0 || edge >= int(graph.edges.size()))
    throw SpecError("edge index out of range");
  auto phi = soliton_params(6.0, 1.0);
  const double ell = graph.edges[edge].length;
  // phi_lambda(x) = sqrt(lambda) phi(lambda x); subtract the value at the
  // endpoint (offset ell/2 from the centered peak) and clamp
  auto phi_l = [&](double x) { return std::sqrt(lambda) * phi(lambda * x); };
  const double tail = phi_l(ell / 2.0);

  GraphFunction u{mesh, Eigen::VectorXd::Zero(mesh->num_nodes())};
  for (const auto& em : mesh->edge_meshes()) {
    if (em.graph_edge != edge) continue;
    for (size_t k = 0; k < em.nodes.size(); ++k) {
      double x = em.h * double(k) - ell / 2.0;
      u.values[em.nodes[k]] = std::max(0.0, phi_l(x) - tail);
    }
  }
  renormalize(u, mu_line());
  return u;
}

}  // namespace graphnls
