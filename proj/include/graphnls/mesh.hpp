#pragma once

#include <memory>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "graphnls/graph.hpp"

namespace graphnls {

// p in (2,6], q in (2,p); alpha free; mass mu > 0
struct EnergyParams {
  double p = 6.0;
  double q = 4.0;
  double alpha = 0.0;
  double mu = 1.0;

  void validate() const {
    if (!(p > 2.0 && p <= 6.0)) throw SpecError("p must lie in (2,6]");
    if (alpha != 0.0 && !(q > 2.0 && q < p))
      throw SpecError("q must lie in (2,p)");
    if (!(mu > 0.0)) throw SpecError("mu must be positive");
  }
};

// P1 conforming space on per-edge uniform subdivisions; endpoint nodes are
// shared global vertex DOFs, so H1 continuity is structural and Kirchhoff
// conditions are natural.
class Mesh {
 public:
  Mesh(const MetricGraph& graph, double h_target);

  const MetricGraph& graph() const { return *graph_; }
  int num_nodes() const { return num_nodes_; }
  int vertex_node(int v) const { return v; }  // graph vertices come first
  const std::vector<int>& dirichlet_nodes() const { return dirichlet_nodes_; }
  bool is_dirichlet(int node) const { return dirichlet_mask_[node] != 0; }

  const Eigen::SparseMatrix<double>& stiffness() const { return K_; }
  const Eigen::SparseMatrix<double>& mass() const { return M_; }
  // lumped mass = trapezoid weights on nodal values
  const Eigen::VectorXd& lumped_mass() const { return W_; }

  struct EdgeMesh {
    int graph_edge = 0;
    double h = 0.0;
    std::vector<int> nodes;  // endpoint-inclusive chain a..b
  };
  const std::vector<EdgeMesh>& edge_meshes() const { return edge_meshes_; }
  double max_h() const { return max_h_; }

  // distance field lifted to nodes (vertex distances + along-edge offsets)
  Eigen::VectorXd nodal_distance(const std::vector<double>& vertex_dist) const;
  // applies Dirichlet zeroing in place
  void apply_bc(Eigen::VectorXd& u) const;

 private:
  std::shared_ptr<const MetricGraph> graph_;
  int num_nodes_ = 0;
  std::vector<EdgeMesh> edge_meshes_;
  std::vector<int> dirichlet_nodes_;
  std::vector<char> dirichlet_mask_;
  Eigen::SparseMatrix<double> K_, M_;
  Eigen::VectorXd W_;
  double max_h_ = 0.0;
};

struct GraphFunction {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd values;
};

double norm_l2sq(const GraphFunction& u);
double norm_lp(const GraphFunction& u, double r);  // returns ||u||_r
double norm_lp_pow(const GraphFunction& u, double r);  // returns ||u||_r^r
// exact per-cell integral of |u|^r for the piecewise-linear interpolant;
// unlike the trapezoid rule this never overestimates peaked profiles
double norm_lp_pow_exact(const GraphFunction& u, double r);
double norm_linf(const GraphFunction& u);
double seminorm_h1sq(const GraphFunction& u);

double energy(const GraphFunction& u, const EnergyParams& params);

// sign(u)|u|^{r-1} applied nodewise
Eigen::VectorXd nonlinearity(const Eigen::VectorXd& u, double r);

// l2: K u - W .* (sign(u)|u|^{p-1} + alpha sign(u)|u|^{q-1}),
// Dirichlet rows zeroed. h1 applies the (K + M) preconditioner solve.
enum class GradMetric { l2, h1 };
GraphFunction grad_energy(const GraphFunction& u, const EnergyParams& params,
                          GradMetric metric);

// Cached SPD factorization of (K + M) with Dirichlet rows/cols set to
// identity; used by the h1 gradient and the solvers.
class Preconditioner {
 public:
  explicit Preconditioner(const Mesh& mesh);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  std::vector<int> dirichlet_;
};

struct Residual {
  double edge = 0.0;       // discrete L2 of -u'' + lambda u - f(u) inside edges
  double kirchhoff = 0.0;  // max |sum of outgoing one-sided derivatives|
};
Residual residual(const GraphFunction& u, double lambda,
                  const EnergyParams& params);

// normalized Gaussian bump exp(-d(x,v0)^2 / (2 width^2)) with ||u||_2^2 = mu
GraphFunction gaussian_bump(const std::shared_ptr<const Mesh>& mesh,
                            int center_vertex, double width, double mu);

// mass renormalization u * sqrt(mu/||u||_2^2)
void renormalize(GraphFunction& u, double mu);

// convenience: graph + mesh in one step
std::shared_ptr<const Mesh> build_mesh(const MetricGraph& graph,
                                       double h_target);

}  // namespace graphnls
