#pragma once

#include <vector>

#include <Eigen/Dense>

namespace gtsec {
class Rng;

// Local cost 0.5 x'Qx + c'x with Q symmetric positive semidefinite.
struct QuadraticObjective {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
};

// Shape and symmetry checks across all agents; Q must be n-by-n PSD.
void validate(const std::vector<QuadraticObjective>& objs, int dim);

// Scalar objectives with q ~ U[q_lo, q_hi], c ~ U[c_lo, c_hi], one draw per
// agent in agent order.
std::vector<QuadraticObjective> random_scalar_objectives(int agents, Rng& rng,
                                                         double q_lo, double q_hi,
                                                         double c_lo, double c_hi);

// Minimiser of sum_i f_i: solves (sum Q_i) x = -(sum c_i).  The aggregate
// curvature must be positive definite; a singular aggregate is rejected
// with a message pointing at the degenerate direction.
Eigen::VectorXd global_optimum(const std::vector<QuadraticObjective>& objs);

}  // namespace gtsec
