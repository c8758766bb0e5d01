#include "gtsec/oracle.hpp"

#include <stdexcept>

#include "gtsec/tolerances.hpp"

namespace gtsec {

Eigen::MatrixXd convolution_matrix(const SystemTriple& sys, int window) {
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  const int ny = sys.outputs(), nu = sys.inputs();
  std::vector<Eigen::MatrixXd> markov(window);
  Eigen::MatrixXd power = sys.B;
  for (int i = 0; i < window; ++i) {
    markov[i] = sys.C * power;
    power = sys.A * power;
  }
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(window * ny, window * nu);
  for (int k = 1; k <= window; ++k)
    for (int j = 0; j < k; ++j)
      o.block((k - 1) * ny, j * nu, ny, nu) = markov[k - 1 - j];
  return o;
}

OracleResult finite_horizon_bound(const SystemTriple& performance,
                                  const SystemTriple& monitor, int window,
                                  double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  const Tolerances tol = Tolerances::active();
  const Eigen::MatrixXd op = convolution_matrix(performance, window);
  const Eigen::MatrixXd om = convolution_matrix(monitor, window);

  const Eigen::MatrixXd gm = om.transpose() * om;
  const Eigen::MatrixXd gp = op.transpose() * op;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gm);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("convolution Gram eigendecomposition failed");

  // Eigenvalues of the Gram matrix are squared singular values of om.
  const double smax = std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 0.0));
  const double cut = tol.rank_rel * std::max(smax, 1e-300);
  const double cut2 = cut * cut;

  const double pnorm = std::sqrt(std::max(0.0,
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gp, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff()));

  std::vector<int> null_idx, range_idx;
  for (int i = 0; i < eig.eigenvalues().size(); ++i)
    (eig.eigenvalues()[i] <= cut2 ? null_idx : range_idx).push_back(i);

  OracleResult res;
  for (int i : null_idx) {
    const Eigen::VectorXd dir = eig.eigenvectors().col(i);
    if ((op * dir).norm() > 1e-7 * std::max(1.0, pnorm)) {
      res.unbounded = true;
      return res;
    }
  }

  if (range_idx.empty()) return res;  // both channels blind: the ratio is zero

  Eigen::MatrixXd v1(gm.rows(), static_cast<int>(range_idx.size()));
  for (std::size_t i = 0; i < range_idx.size(); ++i)
    v1.col(i) = eig.eigenvectors().col(range_idx[i]);

  const Eigen::MatrixXd a1 = v1.transpose() * gp * v1;
  const Eigen::MatrixXd b1 = v1.transpose() * gm * v1;
  Eigen::LLT<Eigen::MatrixXd> llt(b1);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("restricted monitor Gram is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd w = l.triangularView<Eigen::Lower>().solve(a1);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ratio(0.5 * (w + w.transpose()));
  if (ratio.info() != Eigen::Success)
    throw std::runtime_error("generalized ratio eigendecomposition failed");

  int top = 0;
  ratio.eigenvalues().maxCoeff(&top);
  res.value = epsilon * std::max(ratio.eigenvalues()[top], 0.0);

  // Undo the Cholesky change of variables to recover the maximiser.
  const Eigen::VectorXd q =
      l.transpose().triangularView<Eigen::Upper>().solve(ratio.eigenvectors().col(top));
  res.worst_input = v1 * q;
  if (res.worst_input.norm() > 0.0) res.worst_input.normalize();
  return res;
}

}  // namespace gtsec
