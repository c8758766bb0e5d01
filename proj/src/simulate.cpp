#include "gtsec/simulate.hpp"

#include <stdexcept>

#include "gtsec/rng.hpp"
#include "gtsec/tolerances.hpp"

namespace gtsec {

Trajectory simulate(const AggregatedSystem& sys, const SimulationInputs& in,
                    int horizon) {
  const int nx = sys.state_size();
  if (in.x0.size() != nx) throw std::invalid_argument("initial state has wrong length");
  if (in.attack.size() > 0 && in.attack.rows() != sys.dim)
    throw std::invalid_argument("attack samples must have one row per coordinate");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");

  const Tolerances tol = Tolerances::active();
  Trajectory t;
  t.state.resize(nx, horizon + 1);
  t.state.col(0) = in.x0;
  int stored = 1;
  for (int k = 0; k < horizon; ++k) {
    Eigen::VectorXd next = sys.A * t.state.col(stored - 1);
    if (in.forcing) next += sys.forcing;
    if (k < in.attack.cols()) next += sys.B * in.attack.col(k);
    t.state.col(stored) = next;
    ++stored;
    if (next.norm() > tol.divergence_cap) {
      t.truncated = true;
      t.truncated_at = k + 1;
      break;
    }
  }
  t.state.conservativeResize(nx, stored);
  t.ym = sys.Cm * t.state;
  if (in.offset) t.ym.colwise() -= sys.kappa;
  t.yp = sys.Cp * t.state;
  return t;
}

Decomposition decompose(const AggregatedSystem& sys, const Eigen::VectorXd& x0,
                        const Eigen::MatrixXd& attack, int horizon) {
  Decomposition d;
  d.full = simulate(sys, {x0, attack, true, true}, horizon);
  d.nominal = simulate(sys, {x0, {}, true, true}, horizon);
  d.attacked = simulate(
      sys, {Eigen::VectorXd::Zero(sys.state_size()), attack, false, false}, horizon);
  return d;
}

double detector_energy(const Trajectory& t, int window) {
  const int last = std::min(window, t.steps());
  double e = 0.0;
  for (int k = 1; k <= last; ++k) e += t.ym.col(k).squaredNorm();
  return e;
}

bool alarm_raised(const Trajectory& t, double threshold, int window) {
  return detector_energy(t, window) > threshold;
}

double optimum_gap(const AggregatedSystem& sys, const Trajectory& t) {
  std::vector<QuadraticObjective> objs(sys.agents);
  for (int i = 0; i < sys.agents; ++i) {
    objs[i].Q = sys.Qblk.block(i * sys.dim, i * sys.dim, sys.dim, sys.dim);
    objs[i].c = sys.cvec.segment(i * sys.dim, sys.dim);
  }
  const Eigen::VectorXd xstar = global_optimum(objs);
  const Eigen::VectorXd last = t.state.col(t.state.cols() - 1);
  double worst = 0.0;
  for (int i = 0; i < sys.agents; ++i)
    worst = std::max(worst,
                     (last.segment(i * sys.dim, sys.dim) - xstar).norm());
  return worst;
}

Eigen::VectorXd calibrate_offset(const AggregatedSystem& sys,
                                 const Eigen::VectorXd& x0, int k1) {
  if (k1 < 1) throw std::invalid_argument("calibration step must be positive");
  const Tolerances tol = Tolerances::active();
  constexpr int kCap = 10000;
  Eigen::VectorXd cur = x0;
  for (int k = 0; k <= kCap; ++k) {
    Eigen::VectorXd next = sys.A * cur + sys.forcing;
    // From k1 on, take the first state whose successor is indistinguishable.
    // A loop still drifting at the cap is read there: for a slow loop any
    // later reading barely differs, which is what makes the offset usable.
    if (k >= k1 && (next - cur).norm() < tol.settle) return sys.Cm * cur;
    cur = next;
    if (cur.norm() > tol.divergence_cap)
      throw std::runtime_error("attack-free run diverged during offset calibration");
  }
  return sys.Cm * cur;
}

double calibrate_threshold(const AggregatedSystem& sys, int trials, int window,
                           double margin, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");
  Rng rng(derive_seed(seed, "threshold"));
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd x0 = rng.unit_vector(sys.state_size());
    const Trajectory run = simulate(sys, {x0, {}, true, true}, window);
    worst = std::max(worst, detector_energy(run, window));
  }
  if (!(worst > 0.0))
    throw std::runtime_error(
        "attack-free runs produced no monitor energy; threshold calibration "
        "is degenerate");
  return margin * worst;
}

}  // namespace gtsec
