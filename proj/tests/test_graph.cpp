#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "graphnls/graph.hpp"
#include "graphnls/io.hpp"

using namespace graphnls;

TEST_CASE("validate: minimal periodic line spec") {
  PeriodicGraphSpec s;
  s.name = "line";
  s.dim = 1;
  s.vertices = {{"v", {}}};
  s.edges = {{"e", "v", "v", {1, 0}, 1.0, false}};
  auto v = validate_spec(s);
  CHECK(v.canonical());
  CHECK(v.cell_length() == doctest::Approx(1.0));
}

TEST_CASE("validate: shift (2,0) is valid but not canonical") {
  auto s = builtin_spec("grid_chords");
  CHECK(!s.canonical());
  CHECK(s.max_shift_norm() == 2);
  CHECK(s.min_separation() == 3);
}

TEST_CASE("validate: unknown vertex id rejected") {
  PeriodicGraphSpec s;
  s.name = "bad";
  s.dim = 1;
  s.vertices = {{"v", {}}};
  s.edges = {{"e", "v", "w", {1, 0}, 1.0, false}};
  CHECK_THROWS_AS(validate_spec(s), SpecError);
}

TEST_CASE("validate: non-positive length rejected") {
  PeriodicGraphSpec s;
  s.name = "bad";
  s.dim = 1;
  s.vertices = {{"v", {}}};
  s.edges = {{"e", "v", "v", {1, 0}, 0.0, false}};
  CHECK_THROWS_AS(validate_spec(s), SpecError);
}

TEST_CASE("validate: halfline with dim >= 1 rejected") {
  PeriodicGraphSpec s;
  s.name = "bad";
  s.dim = 1;
  s.vertices = {{"v", {}}};
  s.edges = {{"e", "v", "v", {1, 0}, 1.0, true}};
  CHECK_THROWS_AS(validate_spec(s), SpecError);
}

TEST_CASE("rebase: identity at s = 1") {
  auto s = builtin_spec("line");
  auto r = rebase(s, 1);
  CHECK(r.vertices.size() == s.vertices.size());
  CHECK(r.edges.size() == s.edges.size());
}

TEST_CASE("rebase: line by s = 4") {
  auto r = rebase(builtin_spec("line"), 4);
  CHECK(r.cell_length() == doctest::Approx(4.0));
  // four copies of the single cell vertex (the fifth endpoint of the chain is
  // the shifted copy of the first)
  CHECK(r.vertices.size() == 4);
  CHECK(r.edges.size() == 4);
  CHECK(r.canonical());
  int shifted = 0;
  for (const auto& e : r.edges) {
    CHECK(sup_norm(e.shift) <= 1);
    if (sup_norm(e.shift) == 1) ++shifted;
  }
  CHECK(shifted == 1);
}

TEST_CASE("rebase: grid with chords becomes canonical at s = s_K = 3") {
  auto s = builtin_spec("grid_chords");
  auto r = rebase(s, s.min_separation());
  CHECK(r.canonical());
  CHECK(r.vertices.size() == 9);  // 9 cell copies, one vertex each
  CHECK(r.cell_length() == doctest::Approx(9.0 * s.cell_length()));
}

TEST_CASE("rebase: total cell length scales by s^d") {
  auto lad = rebase(builtin_spec("ladder"), 3);
  CHECK(lad.cell_length() == doctest::Approx(9.0));
  auto grid = rebase(builtin_spec("square_grid"), 2);
  CHECK(grid.cell_length() == doctest::Approx(8.0));
}

TEST_CASE("truncate: line n = 2 is a path of 5 unit edges") {
  auto g = truncate(builtin_spec("line"), 2, BoundaryCondition::dirichlet);
  CHECK(g.edges.size() == 5);
  CHECK(g.vertices.size() == 6);
  CHECK(g.boundary_vertices().size() == 2);
  CHECK(g.total_length() == doctest::Approx(5.0));
  CHECK(g.connected());
}

TEST_CASE("truncate: square grid n = 1") {
  auto g = truncate(builtin_spec("square_grid"), 1,
                    BoundaryCondition::dirichlet);
  // 9 cells x 2 edges each, dangling endpoints kept
  CHECK(g.edges.size() == 18);
  CHECK(g.total_length() == doctest::Approx(18.0));
  CHECK(g.vertices.size() == 15);  // 3x3 interior + 6 dangling ring vertices
  CHECK(g.connected());
  // interior center vertex has full degree 4 and is not boundary
  int full = 0;
  for (const auto& v : g.vertices)
    if (v.degree == 4) {
      ++full;
      CHECK(!v.boundary);
    }
  CHECK(full >= 1);
}

TEST_CASE("truncate: n = 0 keeps the fundamental domain") {
  auto g = truncate(builtin_spec("ladder"), 0, BoundaryCondition::neumann);
  CHECK(g.edges.size() == 3);
  CHECK(g.total_length() == doctest::Approx(3.0));
}

TEST_CASE("truncate: non-canonical spec rejected, negative n rejected") {
  CHECK_THROWS_AS(truncate(builtin_spec("grid_chords"), 2,
                           BoundaryCondition::dirichlet),
                  SpecError);
  CHECK_THROWS_AS(truncate(builtin_spec("line"), -1,
                           BoundaryCondition::dirichlet),
                  SpecError);
}

TEST_CASE("truncate: dim 0 graph with halfline proxies") {
  auto g = truncate(builtin_spec("star3"), 0, BoundaryCondition::dirichlet,
                    25.0);
  CHECK(g.edges.size() == 3);
  CHECK(g.total_length() == doctest::Approx(75.0));
  CHECK(g.boundary_vertices().size() == 3);  // the three proxy far ends
}

TEST_CASE("truncate: length bounds n^d l(K) <= l(B_n) <= (2n+1)^d l(K)") {
  for (const auto& name : {"line", "ladder", "comb", "square_grid",
                           "honeycomb"}) {
    auto s = builtin_spec(name);
    for (int n : {1, 2, 4}) {
      auto g = truncate(s, n, BoundaryCondition::dirichlet);
      double lo = std::pow(double(n), s.dim) * s.cell_length();
      double hi = std::pow(double(2 * n + 1), s.dim) * s.cell_length();
      CHECK(g.total_length() >= lo - 1e-12);
      CHECK(g.total_length() <= hi + 1e-12);
    }
  }
}

TEST_CASE("truncate: l(B_n)/n^d stabilizes") {
  for (const auto& name : {"line", "square_grid"}) {
    auto s = builtin_spec(name);
    auto g1 = truncate(s, 8, BoundaryCondition::dirichlet);
    auto g2 = truncate(s, 16, BoundaryCondition::dirichlet);
    double r1 = g1.total_length() / std::pow(8.0, s.dim);
    double r2 = g2.total_length() / std::pow(16.0, s.dim);
    CHECK(std::abs(r1 - r2) / r2 <= 0.60);  // converging toward (2)^d l(K)
    // tighter: ratio to the limit (2n+1)^d/n^d -> 2^d
    double lim = std::pow(2.0, s.dim) * s.cell_length();
    CHECK(std::abs(r2 - lim) / lim <= std::abs(r1 - lim) / lim + 1e-12);
  }
}

TEST_CASE("rebase then truncate matches direct construction up to a collar") {
  auto s = builtin_spec("square_grid");
  auto r = rebase(s, 2);
  auto via_rebase = truncate(r, 2, BoundaryCondition::dirichlet);
  auto direct = truncate(s, 5, BoundaryCondition::dirichlet);
  // same graph family; lengths agree up to a boundary collar of width <= 2
  double rel = std::abs(via_rebase.total_length() - direct.total_length()) /
               direct.total_length();
  CHECK(rel <= 0.40);
  // multiset of edge lengths is all-ones in both
  for (const auto& e : via_rebase.edges) CHECK(e.length == doctest::Approx(1.0));
}

TEST_CASE("separation: distant cell copies never share a vertex") {
  auto g = truncate(builtin_spec("square_grid"), 3,
                    BoundaryCondition::dirichlet);
  for (const auto& e : g.edges) {
    const auto& za = g.vertices[e.a].cell;
    const auto& zb = g.vertices[e.b].cell;
    Shift diff{za[0] - zb[0], za[1] - zb[1]};
    CHECK(sup_norm(diff) <= 1);
  }
}

TEST_CASE("terminal points and tilde_mu") {
  CHECK(!has_terminal_point(builtin_spec("line")));
  CHECK(has_terminal_point(builtin_spec("comb")));
  CHECK(!has_terminal_point(builtin_spec("square_grid")));
  CHECK(!has_terminal_point(builtin_spec("ladder")));
  CHECK(tilde_mu(builtin_spec("line")) ==
        doctest::Approx(2.720699).epsilon(1e-5));
  CHECK(tilde_mu(builtin_spec("comb")) ==
        doctest::Approx(1.360350).epsilon(1e-5));
  CHECK(tilde_mu(builtin_spec("square_grid")) == doctest::Approx(mu_line()));
}

TEST_CASE("assumption (H): line and grid hold, comb tooth fails") {
  CHECK(assumption_H(builtin_spec("line")));
  CHECK(assumption_H(builtin_spec("square_grid")));
  CHECK(assumption_H(builtin_spec("ladder")));
  auto comb = check_assumption_H(builtin_spec("comb"));
  CHECK(comb.at("spine"));
  CHECK(!comb.at("tooth"));
}

TEST_CASE("assumption (H): stable in probe radius") {
  for (const auto& name : {"line", "ladder", "comb", "square_grid",
                           "honeycomb"}) {
    auto s = builtin_spec(name);
    CHECK(check_assumption_H(s, 3) == check_assumption_H(s, 5));
  }
}

TEST_CASE("distance to complement") {
  auto g = truncate(builtin_spec("line"), 2, BoundaryCondition::dirichlet);
  auto dist = boundary_distances(g);
  for (int b : g.boundary_vertices()) CHECK(dist[b] == doctest::Approx(0.0));
  // midpoint of the central edge of the length-5 path sits at distance 2.5
  double best = 0.0;
  for (size_t e = 0; e < g.edges.size(); ++e)
    best = std::max(best,
                    distance_to_complement(g, dist, int(e),
                                           g.edges[e].length / 2));
  CHECK(best == doctest::Approx(2.5));
  CHECK_THROWS_AS(distance_to_complement(g, dist, 0, 7.0), SpecError);
}

TEST_CASE("distance is 1-Lipschitz along sampled grid points") {
  auto g = truncate(builtin_spec("square_grid"), 2,
                    BoundaryCondition::dirichlet);
  auto dist = boundary_distances(g);
  for (const auto& e : g.edges) {
    double da = dist[e.a], db = dist[e.b];
    CHECK(std::abs(da - db) <= e.length + 1e-12);
  }
}

TEST_CASE("JSON round trip and bundled files") {
  for (const auto& name : builtin_spec_names()) {
    auto s = builtin_spec(name);
    auto rt = spec_from_json(spec_to_json(s));
    CHECK(rt.dim == s.dim);
    CHECK(rt.vertices.size() == s.vertices.size());
    CHECK(rt.edges.size() == s.edges.size());
    CHECK(rt.cell_length() == doctest::Approx(s.cell_length()));
    auto fromfile =
        load_spec(std::string(GRAPHNLS_DATA_DIR) + "/specs/" + name + ".json");
    CHECK(fromfile.edges.size() == s.edges.size());
    CHECK(fromfile.dim == s.dim);
  }
  CHECK_THROWS_AS(load_spec("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("make_interval is the line proxy") {
  auto g = make_interval(60.0, BoundaryCondition::dirichlet);
  CHECK(g.total_length() == doctest::Approx(60.0));
  CHECK(g.boundary_vertices().size() == 2);
}
