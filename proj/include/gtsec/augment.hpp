#pragma once

#include <Eigen/Dense>

#include "gtsec/system.hpp"

namespace gtsec {

// Delay chain appended to the loop so the performance channel answers an
// input exactly as late as the monitor channel does.  The chain stores d
// past performance outputs; the augmented performance output reads the
// oldest entry, while the monitor channel is carried over untouched.
struct AugmentedSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Cp;
  Eigen::MatrixXd Cm;
  int delay = 0;        // d = monitor degree - performance degree
  int base_states = 0;  // leading coordinates hold the original loop state

  SystemTriple monitor_triple() const { return {A, B, Cm}; }
  SystemTriple performance_triple() const { return {A, B, Cp}; }
  int states() const { return static_cast<int>(A.rows()); }
};

// d = 0 embeds the system unchanged.  Requires a finite monitor degree at
// least as large as the performance degree; equality of the two augmented
// degrees is re-derived and asserted before returning.
AugmentedSystem augment_delays(const SystemTriple& monitor,
                               const SystemTriple& performance);

}  // namespace gtsec
