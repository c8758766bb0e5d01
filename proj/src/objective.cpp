#include "gtsec/objective.hpp"

#include <stdexcept>
#include <string>

#include "gtsec/rng.hpp"
#include "gtsec/tolerances.hpp"

namespace gtsec {

void validate(const std::vector<QuadraticObjective>& objs, int dim) {
  if (objs.empty()) throw std::invalid_argument("no objectives given");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const auto& o = objs[i];
    const std::string who = "objective " + std::to_string(i + 1);
    if (o.Q.rows() != dim || o.Q.cols() != dim)
      throw std::invalid_argument(who + ": Q must be " + std::to_string(dim) +
                                  "x" + std::to_string(dim));
    if (o.c.size() != dim)
      throw std::invalid_argument(who + ": c has wrong length");
    if ((o.Q - o.Q.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, o.Q.cwiseAbs().maxCoeff()))
      throw std::invalid_argument(who + ": Q must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(o.Q);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff()))
      throw std::invalid_argument(who + ": Q must be positive semidefinite");
  }
}

std::vector<QuadraticObjective> random_scalar_objectives(int agents, Rng& rng,
                                                         double q_lo, double q_hi,
                                                         double c_lo, double c_hi) {
  std::vector<QuadraticObjective> objs(agents);
  for (int i = 0; i < agents; ++i) {
    objs[i].Q = Eigen::MatrixXd::Constant(1, 1, rng.uniform(q_lo, q_hi));
    objs[i].c = Eigen::VectorXd::Constant(1, rng.uniform(c_lo, c_hi));
  }
  return objs;
}

Eigen::VectorXd global_optimum(const std::vector<QuadraticObjective>& objs) {
  const int dim = static_cast<int>(objs.front().c.size());
  validate(objs, dim);
  Eigen::MatrixXd q_sum = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd c_sum = Eigen::VectorXd::Zero(dim);
  for (const auto& o : objs) {
    q_sum += o.Q;
    c_sum += o.c;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q_sum);
  const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, lmax))
    throw std::invalid_argument(
        "aggregate curvature is singular; the team objective has no unique "
        "minimiser along some direction");
  const Eigen::VectorXd x = eig.eigenvectors() *
                            eig.eigenvalues().cwiseInverse().asDiagonal() *
                            (eig.eigenvectors().transpose() * (-c_sum));
  const double residual = (q_sum * x + c_sum).norm();
  const Tolerances tol = Tolerances::active();
  if (residual > tol.fixed_point * std::max(1.0, c_sum.norm()))
    throw std::runtime_error("optimum solve residual too large");
  return x;
}

}  // namespace gtsec
