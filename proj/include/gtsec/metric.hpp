#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gtsec/augment.hpp"
#include "gtsec/sdp.hpp"
#include "gtsec/system.hpp"
#include "gtsec/zeros.hpp"

namespace gtsec {

// Which storage-function class certifies the bound.
//  Psd:   nonnegative quadratic storage; sound whenever it is feasible.
//  Cyclo: sign-indefinite storage with a norm cap; covers loops whose
//         monitor channel carries unstable zeros the performance channel
//         does not share.
enum class MetricMode { Psd, Cyclo };

struct MetricOutcome {
  bool unbounded = false;
  double value = 0.0;  // epsilon-scaled worst-case performance energy
};

struct SolveReport {
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
  int phase1_iterations = 0;
  double rel_gap = 0.0;
  double feas_residual = 0.0;
  bool restricted = false;  // retried on the reachable subspace
};

struct MetricResult {
  MetricOutcome outcome;
  MetricMode mode = MetricMode::Psd;
  double epsilon = 0.0;
  double gamma = 0.0;       // multiplier before epsilon scaling
  Eigen::MatrixXd storage;  // certificate P over the augmented state
  SolveReport solver;
};

// Best storage-function certificate for the augmented pair, as a single
// semidefinite program minimising the output-energy multiplier.  An
// infeasible program means no quadratic certificate of the requested class
// exists and the outcome is reported unbounded, not an error.
MetricResult security_bound(const AugmentedSystem& aug, double epsilon,
                            MetricMode mode, const SdpOptions& opts = {});

// End-to-end evaluation of one closed loop: classify the channels, append
// the delay chain when the monitor reacts later than the performance
// output, pick the storage class from the zero pattern, solve, and
// optionally cross-check against finite-horizon ratios.
struct SecurityAnalysis {
  SecurityVerdict verdict;
  AugmentedSystem augmented;
  MetricResult metric;
  bool mode_forced = false;
  // One unstable zero on each channel with distinct moduli and nothing on
  // the marginal band: the pattern under which the sign-indefinite class
  // is known to stay bounded.  Outside it the cyclo result is advisory.
  bool cyclo_pattern = false;
  std::vector<std::pair<int, double>> oracle;  // (window, finite-horizon value)
};

SecurityAnalysis analyze_security(const AggregatedSystem& sys, double epsilon,
                                  std::optional<MetricMode> force_mode = std::nullopt,
                                  const std::vector<int>& oracle_windows = {},
                                  const ZeroOptions& zopts = {},
                                  const SdpOptions& sopts = {});

}  // namespace gtsec
