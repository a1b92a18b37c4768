#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphnls {

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shift vector of a cell edge; unused components stay zero for dim < 2.
using Shift = std::array<int, 2>;

inline int sup_norm(const Shift& g) {
  return std::max(std::abs(g[0]), std::abs(g[1]));
}

struct SpecVertex {
  std::string id;
  std::optional<std::array<double, 2>> pos;  // plot metadata only
};

struct SpecEdge {
  std::string id;
  std::string from, to;
  Shift shift{0, 0};
  double length = 0.0;
  bool halfline = false;  // only legal when dim == 0
};

// Fundamental domain with shift-labeled edges: the generator of the
// infinite periodic graph (crystal-lattice convention).
struct PeriodicGraphSpec {
  std::string name;
  int dim = 0;  // 0 = plain finite graph
  std::vector<SpecVertex> vertices;
  std::vector<SpecEdge> edges;

  int vertex_index(const std::string& id) const;
  int max_shift_norm() const;
  // canonical iff every shift has sup-norm <= 1
  bool canonical() const { return max_shift_norm() <= 1; }
  // minimal n with (h+K) disjoint from K for ||h|| >= n; safe upper bound
  int min_separation() const { return max_shift_norm() + 1; }
  double cell_length() const;
  // degree of a cell vertex in the infinite graph
  int infinite_degree(int vertex) const;
};

enum class BoundaryCondition { dirichlet, neumann };

struct GraphVertex {
  int spec_vertex = 0;
  Shift cell{0, 0};
  int degree = 0;
  bool boundary = false;
};

struct GraphEdge {
  int a = 0, b = 0;  // vertex indices
  double length = 0.0;
  int spec_edge = -1;
  Shift cell{0, 0};  // which cell copy this edge came from
};

// Finite truncation B_n of a periodic graph, or a plain finite graph.
struct MetricGraph {
  std::vector<GraphVertex> vertices;
  std::vector<GraphEdge> edges;
  std::string spec_name;
  int dim = 0;
  int truncation_radius = 0;
  BoundaryCondition bc = BoundaryCondition::dirichlet;

  double total_length() const;
  bool connected() const;
  std::vector<int> boundary_vertices() const;
};

// Validation: referenced vertices exist, lengths positive, halflines only in
// dim 0, generated graph connected (checked on the n = 3 truncation).
PeriodicGraphSpec validate_spec(PeriodicGraphSpec spec);

// Enlarge the fundamental domain to s^d shifted copies and scale the action
// by s. Output is canonical whenever s >= min_separation().
PeriodicGraphSpec rebase(const PeriodicGraphSpec& spec, int s);

// B_n = union of cell copies over ||z||_inf <= n. Edge copies keep dangling
// endpoints in the (n+1)-ring; a vertex is flagged boundary when some edge of
// the infinite graph incident to it is missing from the truncation.
// For dim = 0 the graph itself is returned, halflines replaced by finite
// proxy edges whose far ends are flagged boundary.
MetricGraph truncate(const PeriodicGraphSpec& spec, int n,
                     BoundaryCondition bc,
                     double halfline_proxy_length = 50.0);

// terminal point = vertex of degree 1 in the infinite graph (a proxied
// halfline end does not count)
bool has_terminal_point(const PeriodicGraphSpec& spec);

// sqrt(3) pi / 4 with a terminal point, sqrt(3) pi / 2 without
double tilde_mu(const PeriodicGraphSpec& spec);

inline double mu_line() { return std::sqrt(3.0) * M_PI / 2.0; }
inline double mu_halfline() { return std::sqrt(3.0) * M_PI / 4.0; }

// For each edge orbit, remove one copy from B_{2n} and test whether both
// sides still reach the boundary ring (non-compact sides).
std::map<std::string, bool> check_assumption_H(const PeriodicGraphSpec& spec,
                                               int probe_radius = 3);
bool assumption_H(const PeriodicGraphSpec& spec, int probe_radius = 3);

// Shortest-path distance from every vertex to the boundary vertex set
// (+inf when there is no boundary).
std::vector<double> boundary_distances(const MetricGraph& graph);

// Distance from the point (edge, offset) to the boundary set, given the
// per-vertex distances.
double distance_to_complement(const MetricGraph& graph,
                              const std::vector<double>& vertex_dist,
                              int edge, double offset);

// Dijkstra from a single vertex (used for initial-guess bumps).
std::vector<double> vertex_distances(const MetricGraph& graph, int source);

// Dijkstra from a vertex set (used for custom distance fields).
std::vector<double> source_distances(const MetricGraph& graph,
                                     const std::vector<int>& sources);

// A single edge of the given length: the finite proxy for the real line.
MetricGraph make_interval(double length, BoundaryCondition bc);

std::vector<std::string> builtin_spec_names();
PeriodicGraphSpec builtin_spec(const std::string& name);

}  // namespace graphnls
