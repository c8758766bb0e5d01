#pragma once

#include <Eigen/Dense>

#include "gtsec/system.hpp"

namespace gtsec {

// Finite-horizon worst-case ratio, computed by explicit convolution
// matrices rather than any storage-function machinery: stack the maps
// a[0..L-1] -> y[1..L] for both channels and maximise the performance
// energy over inputs the monitor cannot distinguish from silence.
//
// Unbounded when some input direction is invisible to the monitor yet
// visible to the performance output.  Otherwise the value is epsilon times
// the largest generalized Rayleigh quotient on the complement of the
// common blind subspace.  Nondecreasing in the window length, and a lower
// bound on any infinite-horizon certificate over the same channels.
struct OracleResult {
  bool unbounded = false;
  double value = 0.0;
  Eigen::VectorXd worst_input;  // stacked a[0..L-1], unit norm, empty if unbounded
};

OracleResult finite_horizon_bound(const SystemTriple& performance,
                                  const SystemTriple& monitor, int window,
                                  double epsilon);

// The convolution matrix itself: block row k (k = 1..window) maps the
// stacked input to y[k].  Exposed so independent cross-checks can rebuild
// it by simulation.
Eigen::MatrixXd convolution_matrix(const SystemTriple& sys, int window);

}  // namespace gtsec
