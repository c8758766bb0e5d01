#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gtsec/graph.hpp"
#include "gtsec/objective.hpp"

namespace gtsec {

// One discrete-time channel (A, B, C): x+ = Ax + Bu, y = Cx.
struct SystemTriple {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }
};

// Closed loop of the gradient-tracking iteration over all agents, with one
// attacked input channel and one monitored node.  The state stacks every
// agent's iterate x and tracker z, so the dimension is 2*dim*agents.
//
// Update of agent i (K is the coupling built from the graph):
//   x+ = x + sum_j K_ij ((x_j + z_j) - (x_i + z_i)) - alpha grad f_i(x_i) + b_i a
//   z+ = z - sum_j K_ij (x_j - x_i) + b_i a
struct AggregatedSystem {
  int agents = 0;
  int dim = 0;
  int attack_node = 0;   // 0-based
  int monitor_node = 0;  // 0-based
  double alpha = 0.0;

  ConsensusMatrix consensus;
  Eigen::MatrixXd Qblk;   // blockdiag(Q_1..Q_N)
  Eigen::VectorXd cvec;   // stacked c_i

  Eigen::MatrixXd A;        // 2nN x 2nN
  Eigen::MatrixXd B;        // 2nN x n, attack enters x and z of the attacked node
  Eigen::VectorXd forcing;  // constant drive from the linear cost terms
  Eigen::MatrixXd Cp;       // performance: neighbouring iterate differences
  Eigen::MatrixXd Cm;       // monitor: weighted view of one node's (x, z)
  Eigen::VectorXd weight;   // per-coordinate monitor weight w in [0,1]

  Eigen::VectorXd kappa;   // monitor offset, zero until calibrated
  double epsilon = 0.0;    // detector threshold, zero until calibrated

  int state_size() const { return 2 * dim * agents; }

  SystemTriple monitor_triple() const { return {A, B, Cm}; }
  SystemTriple performance_triple() const { return {A, B, Cp}; }

  // Stationary point of the unforced-by-attack loop: iterates all equal to
  // the team optimum, trackers solving the consensus balance equation
  // (minimum-norm representative of the solution family).
  Eigen::VectorXd fixed_point() const;
};

// Difference map x_i - x_{i+1} for i = 1..N-1, zero on the trackers.
Eigen::MatrixXd performance_matrix(int agents, int dim);

// Weighted single-node view: rows (1-w_i) x_{vm,i} followed by w_i z_{vm,i}.
Eigen::MatrixXd monitor_matrix(int agents, int dim, int monitor_node,
                               const Eigen::VectorXd& weight);

AggregatedSystem assemble(const Network& net,
                          const std::vector<QuadraticObjective>& objs,
                          double alpha, int attack_node, int monitor_node,
                          const Eigen::VectorXd& weight,
                          std::optional<double> scaling = std::nullopt);

// Convenience: scalar monitor weight replicated across coordinates.
AggregatedSystem assemble(const Network& net,
                          const std::vector<QuadraticObjective>& objs,
                          double alpha, int attack_node, int monitor_node,
                          double weight,
                          std::optional<double> scaling = std::nullopt);

}  // namespace gtsec
