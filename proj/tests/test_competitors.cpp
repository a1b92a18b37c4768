#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "graphnls/competitors.hpp"
#include "graphnls/graph.hpp"
#include "graphnls/mesh.hpp"

using namespace graphnls;

TEST_CASE("soliton: closed-form masses") {
  // p = 4: a = sqrt(2 lambda), b = sqrt(lambda), mass = 4 sqrt(lambda)
  CHECK(soliton_mass(4.0, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(soliton_mass(4.0, 0.25) == doctest::Approx(2.0).epsilon(1e-12));
  // p = 6: mass is lambda-independent and equals mu_line()
  for (double lam : {0.5, 1.0, 2.0, 10.0})
    CHECK(soliton_mass(6.0, lam) == doctest::Approx(mu_line()).epsilon(1e-12));
  // rescaling phi_lambda = sqrt(lambda) phi(lambda x) is L2-invariant
  CHECK(std::abs(soliton_mass(6.0, 2.0) - soliton_mass(6.0, 1.0)) <= 1e-10);
  CHECK(std::abs(soliton_mass(6.0, 10.0) - soliton_mass(6.0, 1.0)) <= 1e-10);
}

TEST_CASE("soliton: lambda-for-mass inversion") {
  CHECK(soliton_lambda_for_mass(4.0, 1.0) ==
        doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  for (double p : {3.0, 4.0, 5.0})
    for (double m : {0.3, 1.0, 4.0}) {
      double lam = soliton_lambda_for_mass(p, m);
      CHECK(soliton_mass(p, lam) == doctest::Approx(m).epsilon(1e-12));
    }
  CHECK_THROWS_AS(soliton_lambda_for_mass(6.0, 1.0), SpecError);
}

TEST_CASE("soliton: even symmetry on mirrored nodes") {
  auto sol = soliton_on_line(4.0, 1.0, 20.0, 0.01, BoundaryCondition::neumann);
  const auto& em = sol.u.mesh->edge_meshes()[0];
  size_t m = em.nodes.size();
  for (size_t k = 0; k < m / 2; ++k)
    CHECK(std::abs(sol.u.values[em.nodes[k]] -
                   sol.u.values[em.nodes[m - 1 - k]]) <= 1e-14);
}

TEST_CASE("soliton: ODE residual certifies the closed form") {
  // second differences of the sampled closed form; O(h^2) floor
  for (double p : {4.0, 6.0}) {
    auto sol =
        soliton_on_line(p, 0.1, 40.0, 5e-4, BoundaryCondition::neumann);
    EnergyParams prm{p, 3.0, 0.0, sol.params.mass};
    auto r = residual(sol.u, 0.1, prm);
    CHECK(r.edge <= 1e-8);
  }
}

TEST_CASE("soliton: residual halves at order 2 in h") {
  auto coarse = soliton_on_line(4.0, 0.4, 60.0, 4e-3,
                                BoundaryCondition::neumann);
  auto fine = soliton_on_line(4.0, 0.4, 60.0, 2e-3,
                              BoundaryCondition::neumann);
  EnergyParams prm{4.0, 3.0, 0.0, 1.0};
  double rc = residual(coarse.u, 0.4, prm).edge;
  double rf = residual(fine.u, 0.4, prm).edge;
  CHECK(rc / rf >= 3.0);
  CHECK(rc / rf <= 5.0);
}

TEST_CASE("soliton: p = 4 energy closed form") {
  double lam = soliton_lambda_for_mass(4.0, 1.0);
  auto sol = soliton_on_line(4.0, lam, 60.0, 2e-3,
                             BoundaryCondition::neumann);
  EnergyParams prm{4.0, 3.0, 0.0, 1.0};
  // E = -(2/3) lambda^{3/2} at p = 4; equals -1/96 for mass 1
  CHECK(energy(sol.u, prm) == doctest::Approx(-1.0 / 96.0).epsilon(1e-4));
}

TEST_CASE("soliton: p = 6 at critical mass has zero energy") {
  auto sol = soliton_on_line(6.0, 1.0, 80.0, 5e-3,
                             BoundaryCondition::neumann);
  CHECK(norm_l2sq(sol.u) == doctest::Approx(mu_line()).epsilon(1e-4));
  EnergyParams prm{6.0, 4.0, 0.0, mu_line()};
  CHECK(std::abs(energy(sol.u, prm)) <= 1e-3);
}

TEST_CASE("tent: exact mass and interior support on the line") {
  auto spec = builtin_spec("line");
  for (int n : {2, 4, 8}) {
    auto tent = tent_competitor(spec, n, 1.0);
    CHECK(norm_l2sq(tent.u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm_linf(tent.u) == doctest::Approx(tent.epsilon));
    // zero on and outside the B_{2n} boundary ring
    const auto& mesh = *tent.u.mesh;
    for (const auto& em : mesh.edge_meshes()) {
      if (sup_norm(tent.graph.edges[em.graph_edge].cell) <= 2 * n) continue;
      for (int node : em.nodes)
        CHECK(tent.u.values[node] == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("tent: 1-Lipschitz scaled profile") {
  auto tent = tent_competitor(builtin_spec("square_grid"), 2, 1.0);
  const auto& mesh = *tent.u.mesh;
  double slope_cap = tent.epsilon *
                     (1.0 + 2.0 * mesh.max_h());  // pre-normalization 1
  for (const auto& em : mesh.edge_meshes())
    for (size_t k = 0; k + 1 < em.nodes.size(); ++k) {
      double slope = std::abs(tent.u.values[em.nodes[k + 1]] -
                              tent.u.values[em.nodes[k]]) / em.h;
      CHECK(slope <= slope_cap + 1e-12);
    }
}

TEST_CASE("tent: energies turn negative on the line, p = 4, q = 3") {
  EnergyParams prm{4.0, 3.0, 1.0, 1.0};
  auto spec = builtin_spec("line");
  std::vector<double> e;
  for (int n : {2, 4, 8, 16})
    e.push_back(energy(tent_competitor(spec, n, 1.0).u, prm));
  bool was_negative = false;
  for (double v : e) {
    if (v < 0.0) was_negative = true;
    if (was_negative) CHECK(v < 0.0);  // become and stay negative
  }
  CHECK(e.back() < 0.0);
}

TEST_CASE("tent: scaling exponents") {
  auto fit_slope = [](const std::vector<double>& xs,
                      const std::vector<double>& ys) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
  };

  // line: ||u_n'||_2^2 <= C / n^2, slope about -2
  std::vector<double> lx, ly;
  for (int n : {2, 4, 8, 16}) {
    auto t = tent_competitor(builtin_spec("line"), n, 1.0);
    lx.push_back(std::log(double(n)));
    ly.push_back(std::log(seminorm_h1sq(t.u)));
  }
  double slope_line = fit_slope(lx, ly);
  CHECK(slope_line == doctest::Approx(-2.0).epsilon(0.15));

  // square grid: eps_n ~ 1/n, slope about -1
  std::vector<double> gx, gy;
  for (int n : {2, 4, 8}) {
    auto t = tent_competitor(builtin_spec("square_grid"), n, 1.0);
    gx.push_back(std::log(double(n)));
    gy.push_back(std::log(t.epsilon));
  }
  double slope_grid = fit_slope(gx, gy);
  CHECK(slope_grid == doctest::Approx(-1.0).epsilon(0.20));
}

TEST_CASE("tent: values on B_n stay above a fixed fraction of eps_n") {
  auto spec = builtin_spec("line");
  const double delta = 0.2;
  for (int n : {4, 8, 16}) {
    auto tent = tent_competitor(spec, n, 1.0);
    const auto& mesh = *tent.u.mesh;
    double lo = tent.epsilon;
    for (const auto& em : mesh.edge_meshes()) {
      if (sup_norm(tent.graph.edges[em.graph_edge].cell) > n) continue;
      for (int node : em.nodes)
        lo = std::min(lo, tent.u.values[node]);
    }
    CHECK(lo >= delta * tent.epsilon);
  }
}

TEST_CASE("edge soliton: exact mass, continuity, energy two ways") {
  auto graph = truncate(builtin_spec("comb"), 1, BoundaryCondition::dirichlet);
  auto mesh = build_mesh(graph, 2e-3);
  auto u = edge_soliton_competitor(mesh, 0, 1.0);
  CHECK(norm_l2sq(u) == doctest::Approx(mu_line()).epsilon(1e-10));
  // vanishes off the chosen edge, including at shared endpoints
  for (const auto& em : mesh->edge_meshes()) {
    if (em.graph_edge == 0) continue;
    for (int node : em.nodes)
      CHECK(u.values[node] == doctest::Approx(0.0));
  }
  // energy via the module vs a direct trapezoid/finite-difference quadrature
  EnergyParams prm{6.0, 4.0, 0.0, mu_line()};
  double direct = 0.0;
  for (const auto& em : mesh->edge_meshes()) {
    for (size_t k = 0; k + 1 < em.nodes.size(); ++k) {
      double du = (u.values[em.nodes[k + 1]] - u.values[em.nodes[k]]) / em.h;
      direct += 0.5 * du * du * em.h;
    }
    for (size_t k = 0; k < em.nodes.size(); ++k) {
      double w = (k == 0 || k + 1 == em.nodes.size()) ? em.h / 2 : em.h;
      direct -= w * std::pow(std::abs(u.values[em.nodes[k]]), 6.0) / 6.0;
    }
  }
  CHECK(energy(u, prm) == doctest::Approx(direct).epsilon(1e-10));
  CHECK_THROWS_AS(edge_soliton_competitor(mesh, 0, -1.0), SpecError);
  CHECK_THROWS_AS(edge_soliton_competitor(mesh, 999, 1.0), SpecError);
}

TEST_CASE("edge soliton: energy diverges to -infinity at p = 6, q = 4") {
  auto graph = truncate(builtin_spec("comb"), 1, BoundaryCondition::dirichlet);
  EnergyParams prm{6.0, 4.0, 1.0, mu_line()};
  double prev = 1e300;
  double last = 0.0;
  for (double lam : {1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0}) {
    // resolve the O(1/lambda) peak width
    double h = std::min(5e-3, 0.05 / lam);
    auto mesh = build_mesh(graph, h);
    auto u = edge_soliton_competitor(mesh, 0, lam);
    last = energy(u, prm);
    CHECK(last < prev);
    prev = last;
  }
  CHECK(last < -1e3);
}
