#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gtsec/system.hpp"

namespace gtsec {

// Sentinel for a channel whose impulse coefficients all vanish.
inline constexpr int kInfiniteDegree = std::numeric_limits<int>::max();

// C A^j B.
Eigen::MatrixXd markov_parameter(const SystemTriple& sys, int j);

// Smallest d >= 1 with C A^(d-1) B nonzero, or kInfiniteDegree.  The scan
// may stop at the state dimension: beyond it the coefficients recur.
int relative_degree(const SystemTriple& sys);

// A frequency where the channel pencil [A - lambda I, B; C, 0] loses rank,
// with the direction pair certifying it: (A - lambda I) x0 + B g = 0 and
// C x0 = 0 up to the stated residual.
struct InvariantZero {
  std::complex<double> lambda;
  Eigen::VectorXcd state_direction;
  Eigen::VectorXcd input_direction;
  double residual = 0.0;
  bool marginal = false;  // |lambda| within the band around 1

  // Strictly outside the unit circle and clear of the marginal band.
  bool unstable() const;
};

struct ZeroOptions {
  int probes = 5;          // random frequencies for the normal rank
  int draws = 3;           // independent square-downs to intersect
  std::uint64_t seed = 0x5eedf00dULL;
};

// All finite frequencies where the pencil drops below its normal rank.
// Wide channels are squared down through random output mixes; a frequency
// must be certified by a rank drop of the original pencil and survive every
// draw to be reported.
std::vector<InvariantZero> invariant_zeros(const SystemTriple& sys,
                                           const ZeroOptions& opts = {});

enum class AttackClass {
  UnboundedViaZero,    // unstable monitor-channel zero the performance channel lacks
  UnboundedViaDegree,  // monitor channel reacts later than the performance channel
  BoundedCandidate,    // neither mechanism applies; a bound may exist
};

struct SecurityVerdict {
  AttackClass kind = AttackClass::BoundedCandidate;
  int monitor_degree = 0;
  int performance_degree = 0;
  std::vector<InvariantZero> monitor_zeros;
  std::vector<InvariantZero> performance_zeros;
  // Unstable monitor zeros with no performance zero nearby; the witness is
  // the one with the largest modulus.
  std::vector<InvariantZero> exploitable;
  std::optional<InvariantZero> witness;
};

SecurityVerdict classify(const SystemTriple& monitor, const SystemTriple& performance,
                         const ZeroOptions& opts = {});

// Attack input over steps 0..horizon together with the initial state that
// makes it invisible (zero-dynamics case) or all-zeros (other cases).
struct AttackSignal {
  enum class Kind { None, ZeroDynamics, TerminalStep, Custom };
  Kind kind = Kind::None;
  Eigen::MatrixXd samples;        // dim x (horizon+1)
  Eigen::VectorXd initial_state;  // full loop state, empty when irrelevant
  std::complex<double> lambda{0.0, 0.0};
  double scale = 1.0;
  double beta = 0.0;
  int monitor_degree = 0;
};

// Geometric input scale * Re(lambda^k g) with the matching starting state
// scale * Re(x0): the monitor output stays identically zero while the state
// grows like |lambda|^k whenever |lambda| > 1.
AttackSignal zero_dynamics_attack(const InvariantZero& zero, int state_size,
                                  double scale, int horizon);

// Quiet until the last monitor_degree steps of the window, then a constant
// push of height beta on every coordinate.  Too late for the monitor to see
// inside the window, early enough to displace the iterates.
AttackSignal terminal_step_attack(int dim, int horizon, int monitor_degree,
                                  double beta);

}  // namespace gtsec
