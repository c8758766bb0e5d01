#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace gtsec {

struct Edge {
  int u = 0;  // endpoints, 0-based, canonicalised to u < v
  int v = 0;
  double weight = 1.0;
};

// Undirected weighted communication graph over nodes 0..nodes-1.
struct Network {
  int nodes = 0;
  std::vector<Edge> edges;

  static Network ring(int n, double weight = 1.0);
  static Network path(int n, double weight = 1.0);
  static Network star(int n, int center = 0, double weight = 1.0);
  static Network custom(int n, std::vector<Edge> edges);

  bool has_edge(int u, int v) const;
  Network with_edge(int u, int v, double weight) const;
  Network without_edge(int u, int v) const;
};

// Rejects empty graphs, out-of-range endpoints, self-loops, duplicate
// edges, non-positive weights and disconnected topologies.
void validate(const Network& g);

Eigen::MatrixXd weighted_laplacian(const Network& g);

// Coupling matrix K = s * (L_w (x) I_n) together with the scaling that was
// applied.  Invariants on return: K symmetric, zero column sums (within
// laplacian_slack) and spectral radius strictly below one.
struct ConsensusMatrix {
  Eigen::MatrixXd K;
  double scaling = 0.0;
  double spectral_radius = 0.0;
};

// When s is not given it is chosen as 0.9 / lambda_max(L_w).  An explicit s
// that pushes the spectral radius to 1 or beyond is rejected.
ConsensusMatrix consensus_matrix(const Network& g, int dim,
                                 std::optional<double> s = std::nullopt);

// M (x) I_n.
Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& m, int dim);

}  // namespace gtsec
