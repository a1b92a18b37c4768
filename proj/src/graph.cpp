#include "graphnls/graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

namespace graphnls {

int PeriodicGraphSpec::vertex_index(const std::string& id) const {
  for (size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].id == id) return static_cast<int>(i);
  throw SpecError("UnknownVertex: '" + id + "' in spec '" + name + "'");
}

int PeriodicGraphSpec::max_shift_norm() const {
  int m = 0;
  for (const auto& e : edges) m = std::max(m, sup_norm(e.shift));
  return m;
}

double PeriodicGraphSpec::cell_length() const {
  double total = 0.0;
  for (const auto& e : edges) total += e.length;
  return total;
}

int PeriodicGraphSpec::infinite_degree(int vertex) const {
  int deg = 0;
  for (const auto& e : edges) {
    if (vertex_index(e.from) == vertex) ++deg;
    if (vertex_index(e.to) == vertex) ++deg;
  }
  return deg;
}

double MetricGraph::total_length() const {
  double total = 0.0;
  for (const auto& e : edges) total += e.length;
  return total;
}

bool MetricGraph::connected() const {
  if (vertices.empty()) return true;
  std::vector<char> seen(vertices.size(), 0);
  std::vector<std::vector<int>> adj(vertices.size());
  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  size_t count = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        q.push(w);
      }
  }
  return count == vertices.size();
}

std::vector<int> MetricGraph::boundary_vertices() const {
  std::vector<int> out;
  for (size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].boundary) out.push_back(static_cast<int>(i));
  return out;
}

PeriodicGraphSpec validate_spec(PeriodicGraphSpec spec) {
  if (spec.dim < 0 || spec.dim > 2)
    throw SpecError("dim must be 0, 1 or 2 (got " + std::to_string(spec.dim) +
                    ")");
  if (spec.vertices.empty()) throw SpecError("spec has no vertices");
  std::set<std::string> ids;
  for (const auto& v : spec.vertices)
    if (!ids.insert(v.id).second)
      throw SpecError("duplicate vertex id '" + v.id + "'");
  for (const auto& e : spec.edges) {
    spec.vertex_index(e.from);  // throws UnknownVertex
    spec.vertex_index(e.to);
    if (e.halfline) {
      if (spec.dim >= 1)
        throw SpecError("halfline edge '" + e.id + "' with dim >= 1");
    } else if (!(e.length > 0.0) || !std::isfinite(e.length)) {
      throw SpecError("edge '" + e.id + "' has non-positive length");
    }
    for (int k = spec.dim; k < 2; ++k)
      if (e.shift[k] != 0)
        throw SpecError("edge '" + e.id + "' shifts beyond dim");
  }
  if (spec.dim >= 1) {
    if (spec.edges.empty()) throw SpecError("periodic spec has no edges");
    // connectivity of the generated graph, probed on a truncation
    PeriodicGraphSpec probe = spec.canonical() ? spec : rebase(spec, spec.min_separation());
    MetricGraph g = truncate(probe, 3, BoundaryCondition::neumann);
    if (!g.connected())
      throw SpecError("generated periodic graph is disconnected");
  } else {
    MetricGraph g = truncate(spec, 0, BoundaryCondition::neumann);
    if (!g.connected()) throw SpecError("graph is disconnected");
  }
  return spec;
}

PeriodicGraphSpec rebase(const PeriodicGraphSpec& spec, int s) {
  if (spec.dim < 1) throw SpecError("rebase requires dim >= 1");
  if (s < 1) throw SpecError("rebase scale must be >= 1");
  if (s == 1) return spec;

  PeriodicGraphSpec out;
  out.name = spec.name + "@x" + std::to_string(s);
  out.dim = spec.dim;

  auto copy_tag = [&](const Shift& t) {
    std::string tag = "(" + std::to_string(t[0]);
    if (spec.dim == 2) tag += "," + std::to_string(t[1]);
    return tag + ")";
  };

  std::vector<Shift> offsets;
  if (spec.dim == 1) {
    for (int i = 0; i < s; ++i) offsets.push_back({i, 0});
  } else {
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) offsets.push_back({i, j});
  }

  for (const auto& t : offsets)
    for (const auto& v : spec.vertices) {
      SpecVertex nv;
      nv.id = v.id + copy_tag(t);
      if (v.pos)
        nv.pos = std::array<double, 2>{(*v.pos)[0] + t[0], (*v.pos)[1] + t[1]};
      out.vertices.push_back(nv);
    }

  for (const auto& t : offsets)
    for (const auto& e : spec.edges) {
      SpecEdge ne;
      ne.id = e.id + copy_tag(t);
      ne.from = e.from + copy_tag(t);
      ne.length = e.length;
      // Euclidean division of the target cell by s gives the new shift and
      // the copy holding the target vertex.
      Shift target{t[0] + e.shift[0], t[1] + e.shift[1]};
      Shift g{0, 0}, rem{0, 0};
      for (int k = 0; k < spec.dim; ++k) {
        int q = target[k] >= 0 ? target[k] / s
                               : -((-target[k] + s - 1) / s);
        g[k] = q;
        rem[k] = target[k] - q * s;
      }
      ne.to = e.to + copy_tag(rem);
      ne.shift = g;
      out.edges.push_back(ne);
    }
  return out;
}

MetricGraph truncate(const PeriodicGraphSpec& spec, int n,
                     BoundaryCondition bc, double halfline_proxy_length) {
  if (n < 0) throw SpecError("truncation radius must be >= 0");
  MetricGraph g;
  g.spec_name = spec.name;
  g.dim = spec.dim;
  g.truncation_radius = n;
  g.bc = bc;

  const int nv = static_cast<int>(spec.vertices.size());

  if (spec.dim == 0) {
    for (int i = 0; i < nv; ++i)
      g.vertices.push_back(GraphVertex{i, {0, 0}, 0, false});
    std::vector<char> halfline_end(nv, 0);
    for (const auto& e : spec.edges) {
      GraphEdge ge;
      ge.a = spec.vertex_index(e.from);
      ge.b = spec.vertex_index(e.to);
      ge.length = e.halfline ? halfline_proxy_length : e.length;
      ge.spec_edge = static_cast<int>(&e - spec.edges.data());
      g.edges.push_back(ge);
      g.vertices[ge.a].degree++;
      g.vertices[ge.b].degree++;
      if (e.halfline) halfline_end[ge.b] = 1;
    }
    for (int i = 0; i < nv; ++i)
      g.vertices[i].boundary = halfline_end[i] != 0;
    return g;
  }

  if (!spec.canonical())
    throw SpecError("truncate requires a canonical spec (rebase first)");

  std::map<std::array<int, 3>, int> index;  // (spec vertex, z1, z2) -> idx
  auto vertex_at = [&](int sv, const Shift& z) {
    std::array<int, 3> key{sv, z[0], z[1]};
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int idx = static_cast<int>(g.vertices.size());
    g.vertices.push_back(GraphVertex{sv, z, 0, false});
    index.emplace(key, idx);
    return idx;
  };

  std::vector<Shift> cells;
  if (spec.dim == 1) {
    for (int z = -n; z <= n; ++z) cells.push_back({z, 0});
  } else {
    for (int z1 = -n; z1 <= n; ++z1)
      for (int z2 = -n; z2 <= n; ++z2) cells.push_back({z1, z2});
  }

  for (const auto& z : cells)
    for (size_t ei = 0; ei < spec.edges.size(); ++ei) {
      const auto& e = spec.edges[ei];
      Shift target{z[0] + e.shift[0], z[1] + e.shift[1]};
      GraphEdge ge;
      ge.a = vertex_at(spec.vertex_index(e.from), z);
      ge.b = vertex_at(spec.vertex_index(e.to), target);
      ge.length = e.length;
      ge.spec_edge = static_cast<int>(ei);
      ge.cell = z;
      g.edges.push_back(ge);
      g.vertices[ge.a].degree++;
      g.vertices[ge.b].degree++;
    }

  for (auto& v : g.vertices)
    v.boundary = v.degree < spec.infinite_degree(v.spec_vertex);
  return g;
}

bool has_terminal_point(const PeriodicGraphSpec& spec) {
  for (size_t i = 0; i < spec.vertices.size(); ++i) {
    bool halfline_end = false;
    for (const auto& e : spec.edges)
      if (e.halfline && spec.vertex_index(e.to) == static_cast<int>(i))
        halfline_end = true;
    if (!halfline_end && spec.infinite_degree(static_cast<int>(i)) == 1)
      return true;
  }
  return false;
}

double tilde_mu(const PeriodicGraphSpec& spec) {
  return has_terminal_point(spec) ? mu_halfline() : mu_line();
}

namespace {

// reachability from a start vertex, with one edge removed
bool reaches_boundary(const MetricGraph& g, int start, int skip_edge) {
  std::vector<std::vector<std::pair<int, int>>> adj(g.vertices.size());
  for (size_t i = 0; i < g.edges.size(); ++i) {
    if (static_cast<int>(i) == skip_edge) continue;
    adj[g.edges[i].a].push_back({g.edges[i].b, static_cast<int>(i)});
    adj[g.edges[i].b].push_back({g.edges[i].a, static_cast<int>(i)});
  }
  std::vector<char> seen(g.vertices.size(), 0);
  std::queue<int> q;
  q.push(start);
  seen[start] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    if (g.vertices[v].boundary) return true;
    for (const auto& [w, _] : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
  }
  return false;
}

}  // namespace

std::map<std::string, bool> check_assumption_H(const PeriodicGraphSpec& spec,
                                               int probe_radius) {
  if (spec.dim < 1) throw SpecError("assumption (H) applies to periodic specs");
  if (probe_radius < 3) throw SpecError("probe radius must be >= 3");
  const PeriodicGraphSpec s =
      spec.canonical() ? spec : rebase(spec, spec.min_separation());
  MetricGraph g = truncate(s, 2 * probe_radius, BoundaryCondition::neumann);

  std::map<std::string, bool> result;
  for (size_t ei = 0; ei < s.edges.size(); ++ei) {
    // representative copy in the central cell
    int rep = -1;
    for (size_t k = 0; k < g.edges.size(); ++k)
      if (g.edges[k].spec_edge == static_cast<int>(ei) &&
          g.edges[k].cell == Shift{0, 0}) {
        rep = static_cast<int>(k);
        break;
      }
    bool ok = rep >= 0 &&
              reaches_boundary(g, g.edges[rep].a, rep) &&
              reaches_boundary(g, g.edges[rep].b, rep);
    result[s.edges[ei].id] = ok;
  }
  return result;
}

bool assumption_H(const PeriodicGraphSpec& spec, int probe_radius) {
  for (const auto& [_, ok] : check_assumption_H(spec, probe_radius))
    if (!ok) return false;
  return true;
}

namespace {

std::vector<double> dijkstra(const MetricGraph& g,
                             const std::vector<int>& sources) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.vertices.size(), inf);
  std::vector<std::vector<std::pair<int, double>>> adj(g.vertices.size());
  for (const auto& e : g.edges) {
    adj[e.a].push_back({e.b, e.length});
    adj[e.b].push_back({e.a, e.length});
  }
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (int s : sources) {
    dist[s] = 0.0;
    pq.push({0.0, s});
  }
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    for (const auto& [w, len] : adj[v])
      if (d + len < dist[w]) {
        dist[w] = d + len;
        pq.push({dist[w], w});
      }
  }
  return dist;
}

}  // namespace

std::vector<double> boundary_distances(const MetricGraph& graph) {
  return dijkstra(graph, graph.boundary_vertices());
}

std::vector<double> vertex_distances(const MetricGraph& graph, int source) {
  return dijkstra(graph, {source});
}

std::vector<double> source_distances(const MetricGraph& graph,
                                     const std::vector<int>& sources) {
  return dijkstra(graph, sources);
}

double distance_to_complement(const MetricGraph& graph,
                              const std::vector<double>& vertex_dist,
                              int edge, double offset) {
  const auto& e = graph.edges.at(edge);
  if (offset < 0.0 || offset > e.length)
    throw SpecError("offset outside [0, edge length]");
  return std::min(vertex_dist[e.a] + offset,
                  vertex_dist[e.b] + (e.length - offset));
}

MetricGraph make_interval(double length, BoundaryCondition bc) {
  PeriodicGraphSpec spec;
  spec.name = "interval";
  spec.dim = 0;
  spec.vertices = {{"a", {}}, {"b", {}}};
  spec.edges = {{"e", "a", "b", {0, 0}, length, false}};
  MetricGraph g = truncate(spec, 0, bc);
  // both endpoints stand in for infinity on the line proxy
  g.vertices[0].boundary = true;
  g.vertices[1].boundary = true;
  return g;
}

std::vector<std::string> builtin_spec_names() {
  return {"line", "ladder", "comb", "square_grid", "honeycomb",
          "star3", "grid_chords"};
}

PeriodicGraphSpec builtin_spec(const std::string& name) {
  PeriodicGraphSpec s;
  s.name = name;
  if (name == "line") {
    s.dim = 1;
    s.vertices = {{"v", std::array<double, 2>{0, 0}}};
    s.edges = {{"e", "v", "v", {1, 0}, 1.0, false}};
  } else if (name == "ladder") {
    s.dim = 1;
    s.vertices = {{"a", std::array<double, 2>{0, 0}},
                  {"b", std::array<double, 2>{0, 1}}};
    s.edges = {{"rail_a", "a", "a", {1, 0}, 1.0, false},
               {"rail_b", "b", "b", {1, 0}, 1.0, false},
               {"rung", "a", "b", {0, 0}, 1.0, false}};
  } else if (name == "comb") {
    s.dim = 1;
    s.vertices = {{"s", std::array<double, 2>{0, 0}},
                  {"t", std::array<double, 2>{0, 1}}};
    s.edges = {{"spine", "s", "s", {1, 0}, 1.0, false},
               {"tooth", "s", "t", {0, 0}, 1.0, false}};
  } else if (name == "square_grid") {
    s.dim = 2;
    s.vertices = {{"v", std::array<double, 2>{0, 0}}};
    s.edges = {{"right", "v", "v", {1, 0}, 1.0, false},
               {"up", "v", "v", {0, 1}, 1.0, false}};
  } else if (name == "honeycomb") {
    s.dim = 2;
    s.vertices = {{"a", std::array<double, 2>{0, 0}},
                  {"b", std::array<double, 2>{0.5, 0.5}}};
    s.edges = {{"e0", "a", "b", {0, 0}, 1.0, false},
               {"e1", "b", "a", {1, 0}, 1.0, false},
               {"e2", "b", "a", {0, 1}, 1.0, false}};
  } else if (name == "star3") {
    s.dim = 0;
    s.vertices = {{"c", std::array<double, 2>{0, 0}},
                  {"l1", std::array<double, 2>{1, 0}},
                  {"l2", std::array<double, 2>{-0.5, 0.87}},
                  {"l3", std::array<double, 2>{-0.5, -0.87}}};
    s.edges = {{"h1", "c", "l1", {0, 0}, 0.0, true},
               {"h2", "c", "l2", {0, 0}, 0.0, true},
               {"h3", "c", "l3", {0, 0}, 0.0, true}};
  } else if (name == "grid_chords") {
    // square grid plus a long chord skipping a cell: max shift norm 2,
    // so the raw spec is not canonical (s_K = 3)
    s.dim = 2;
    s.vertices = {{"v", std::array<double, 2>{0, 0}}};
    s.edges = {{"right", "v", "v", {1, 0}, 1.0, false},
               {"up", "v", "v", {0, 1}, 1.0, false},
               {"chord", "v", "v", {2, 0}, 2.2, false}};
  } else {
    throw SpecError("unknown builtin spec '" + name + "'");
  }
  return validate_spec(s);
}

}  // namespace graphnls
