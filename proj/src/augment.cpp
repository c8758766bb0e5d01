#include "gtsec/augment.hpp"

#include <stdexcept>
#include <string>

#include "gtsec/zeros.hpp"

namespace gtsec {

AugmentedSystem augment_delays(const SystemTriple& monitor,
                               const SystemTriple& performance) {
  const bool same_shape = monitor.A.rows() == performance.A.rows() &&
                          monitor.B.cols() == performance.B.cols();
  if (!same_shape || !monitor.A.isApprox(performance.A, 0.0) ||
      !monitor.B.isApprox(performance.B, 0.0))
    throw std::invalid_argument("channels must share one loop (A, B)");
  const int dm = relative_degree(monitor);
  const int dp = relative_degree(performance);
  if (dm == kInfiniteDegree)
    throw std::invalid_argument(
        "monitor channel never reacts to the attack; no delay chain can "
        "equalise the channels");
  if (dm < dp)
    throw std::invalid_argument("monitor channel is faster than the performance channel");

  const int d = dm - dp;
  const int nx = monitor.states();
  const int p = performance.outputs();

  AugmentedSystem aug;
  aug.delay = d;
  aug.base_states = nx;
  if (d == 0) {
    aug.A = monitor.A;
    aug.B = monitor.B;
    aug.Cp = performance.C;
    aug.Cm = monitor.C;
    return aug;
  }

  const int total = nx + d * p;
  aug.A = Eigen::MatrixXd::Zero(total, total);
  aug.A.topLeftCorner(nx, nx) = monitor.A;
  aug.A.block(nx, 0, p, nx) = performance.C;        // r1+ = Cp x
  for (int j = 1; j < d; ++j)                        // rj+ = r_{j-1}
    aug.A.block(nx + j * p, nx + (j - 1) * p, p, p).setIdentity();

  aug.B = Eigen::MatrixXd::Zero(total, monitor.inputs());
  aug.B.topRows(nx) = monitor.B;

  aug.Cp = Eigen::MatrixXd::Zero(p, total);
  aug.Cp.rightCols(p).setIdentity();                 // reads the oldest entry

  aug.Cm = Eigen::MatrixXd::Zero(monitor.outputs(), total);
  aug.Cm.leftCols(nx) = monitor.C;

  const int dm_aug = relative_degree(aug.monitor_triple());
  const int dp_aug = relative_degree(aug.performance_triple());
  if (dm_aug != dp_aug)
    throw std::runtime_error("delay chain failed to equalise the channels: " +
                             std::to_string(dm_aug) + " vs " + std::to_string(dp_aug));
  return aug;
}

}  // namespace gtsec
