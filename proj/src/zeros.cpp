#include "gtsec/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "gtsec/rng.hpp"
#include "gtsec/tolerances.hpp"

namespace gtsec {
namespace {

using Cplx = std::complex<double>;

Eigen::MatrixXcd pencil_at(const SystemTriple& sys, Cplx lambda) {
  const int nx = sys.states(), nu = sys.inputs(), ny = sys.outputs();
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(nx + ny, nx + nu);
  p.topLeftCorner(nx, nx) = sys.A.cast<Cplx>();
  p.topLeftCorner(nx, nx).diagonal().array() -= lambda;
  p.topRightCorner(nx, nu) = sys.B.cast<Cplx>();
  p.bottomLeftCorner(ny, nx) = sys.C.cast<Cplx>();
  return p;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues();
}

int rank_of(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0) return 0;
  const double cut = rel_tol * sv[0];
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++r;
  return r;
}

// Normal rank of the channel pencil, estimated at random frequencies away
// from the unit circle's crowded neighbourhood.  The maximum over probes is
// the generic value; a majority must attain it or the estimate is rejected.
int normal_rank(const SystemTriple& sys, Rng& rng, int probes, double rel_tol) {
  std::vector<int> ranks;
  auto run_batch = [&](int count) {
    for (int i = 0; i < count; ++i) {
      const double radius = rng.uniform(0.4, 2.3);
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      const Cplx lambda = std::polar(radius, angle);
      ranks.push_back(rank_of(singular_values(pencil_at(sys, lambda)), rel_tol));
    }
  };
  run_batch(probes);
  int best = *std::max_element(ranks.begin(), ranks.end());
  auto hits = [&] { return std::count(ranks.begin(), ranks.end(), best); };
  if (2 * hits() < static_cast<long>(ranks.size())) {
    run_batch(probes);
    best = *std::max_element(ranks.begin(), ranks.end());
    if (2 * hits() < static_cast<long>(ranks.size()))
      throw std::runtime_error("channel pencil normal rank is numerically ambiguous");
  }
  return best;
}

// Generalized eigenvalues of (S, T) from a real QZ decomposition, read off
// the 1x1 and 2x2 diagonal blocks.  Infinite pairs are dropped.
std::vector<Cplx> qz_eigenvalues(const Eigen::MatrixXd& s, const Eigen::MatrixXd& t) {
  std::vector<Cplx> out;
  const Eigen::Index n = s.rows();
  Eigen::Index i = 0;
  while (i < n) {
    const bool pair = i + 1 < n &&
                      std::abs(s(i + 1, i)) >
                          1e-14 * (std::abs(s(i, i)) + std::abs(s(i + 1, i + 1)) + 1.0);
    if (!pair) {
      const double alpha = s(i, i), beta = t(i, i);
      if (std::abs(beta) > 1e-12 * (1.0 + std::abs(alpha)))
        out.emplace_back(alpha / beta, 0.0);
      ++i;
      continue;
    }
    // det(S2 - z T2) with T2 upper triangular gives a quadratic in z.
    const double s00 = s(i, i), s01 = s(i, i + 1), s10 = s(i + 1, i), s11 = s(i + 1, i + 1);
    const double t00 = t(i, i), t01 = t(i, i + 1), t11 = t(i + 1, i + 1);
    const double c2 = t00 * t11;
    const double c1 = -(s00 * t11 + s11 * t00 - t01 * s10);
    const double c0 = s00 * s11 - s01 * s10;
    const double scale = std::abs(c1) + std::abs(c0);
    if (std::abs(c2) < 1e-14 * (scale + 1.0)) {
      if (std::abs(c1) > 1e-14 * (std::abs(c0) + 1.0)) out.emplace_back(-c0 / c1, 0.0);
    } else {
      const Cplx disc = std::sqrt(Cplx(c1 * c1 - 4.0 * c2 * c0, 0.0));
      out.push_back((-c1 + disc) / (2.0 * c2));
      out.push_back((-c1 - disc) / (2.0 * c2));
    }
    i += 2;
  }
  return out;
}

// Candidate frequencies from one random square-down of a wide channel (or
// the channel itself when it is already square).
std::vector<Cplx> candidate_frequencies(const SystemTriple& sys,
                                        const Eigen::MatrixXd& mix) {
  const int nx = sys.states(), nu = sys.inputs();
  Eigen::MatrixXd pa = Eigen::MatrixXd::Zero(nx + nu, nx + nu);
  pa.topLeftCorner(nx, nx) = sys.A;
  pa.topRightCorner(nx, nu) = sys.B;
  pa.bottomLeftCorner(nu, nx) = mix * sys.C;
  Eigen::MatrixXd pb = Eigen::MatrixXd::Zero(nx + nu, nx + nu);
  pb.topLeftCorner(nx, nx).setIdentity();
  Eigen::RealQZ<Eigen::MatrixXd> qz(pa, pb);
  if (qz.info() != Eigen::Success)
    throw std::runtime_error("qz iteration failed on a squared-down pencil");
  return qz_eigenvalues(qz.matrixS(), qz.matrixT());
}

bool close_frequencies(Cplx a, Cplx b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(a));
}

}  // namespace

bool InvariantZero::unstable() const { return !marginal && std::abs(lambda) > 1.0; }

Eigen::MatrixXd markov_parameter(const SystemTriple& sys, int j) {
  if (j < 0) throw std::invalid_argument("impulse index must be nonnegative");
  Eigen::MatrixXd power = sys.B;
  for (int i = 0; i < j; ++i) power = sys.A * power;
  return sys.C * power;
}

int relative_degree(const SystemTriple& sys) {
  const Tolerances tol = Tolerances::active();
  Eigen::MatrixXd power = sys.B;
  for (int j = 0; j < sys.states(); ++j) {
    if ((sys.C * power).cwiseAbs().maxCoeff() > tol.markov) return j + 1;
    power = sys.A * power;
  }
  return kInfiniteDegree;
}

std::vector<InvariantZero> invariant_zeros(const SystemTriple& sys,
                                           const ZeroOptions& opts) {
  if (sys.outputs() < sys.inputs())
    throw std::invalid_argument("channel has fewer outputs than inputs; zeros would be generic");
  const Tolerances tol = Tolerances::active();
  Rng rng(derive_seed(opts.seed, "invariant-zeros"));
  const int nrank = normal_rank(sys, rng, opts.probes, tol.rank_rel);

  const bool square = sys.outputs() == sys.inputs();
  const int draws = square ? 1 : std::max(1, opts.draws);

  // Verified frequencies per draw; verification is always against the
  // original pencil, so a square-down can only lose zeros, never add them.
  std::vector<std::vector<Cplx>> verified(draws);
  int failures = 0;
  for (int d = 0; d < draws; ++d) {
    std::vector<Cplx> cands;
    try {
      const Eigen::MatrixXd mix =
          square ? Eigen::MatrixXd::Identity(sys.inputs(), sys.outputs())
                 : rng.normal_matrix(sys.inputs(), sys.outputs());
      cands = candidate_frequencies(sys, mix);
    } catch (const std::runtime_error&) {
      if (++failures > 2) throw;
      --d;
      continue;
    }
    for (Cplx lambda : cands) {
      const Eigen::VectorXd sv = singular_values(pencil_at(sys, lambda));
      if (rank_of(sv, tol.rank_rel) < nrank) {
        const bool dup = std::any_of(verified[d].begin(), verified[d].end(),
                                     [&](Cplx c) { return close_frequencies(c, lambda, tol.zero_match); });
        if (!dup) verified[d].push_back(lambda);
      }
    }
  }

  std::vector<InvariantZero> zeros;
  for (Cplx lambda : verified[0]) {
    bool everywhere = true;
    for (int d = 1; d < draws && everywhere; ++d)
      everywhere = std::any_of(verified[d].begin(), verified[d].end(),
                               [&](Cplx c) { return close_frequencies(c, lambda, tol.zero_match); });
    if (!everywhere) continue;

    const Eigen::MatrixXcd p = pencil_at(sys, lambda);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(p, Eigen::ComputeThinV);
    const Eigen::VectorXcd dir = svd.matrixV().col(svd.matrixV().cols() - 1);
    InvariantZero z;
    z.lambda = lambda;
    z.state_direction = dir.head(sys.states());
    z.input_direction = dir.tail(sys.inputs());
    z.residual = (p * dir).norm();
    z.marginal = std::abs(std::abs(lambda) - 1.0) <= tol.marginal_band;
    const double dirscale = z.state_direction.norm() + z.input_direction.norm();
    if (z.residual > tol.zero_residual * std::max(1.0, dirscale) * std::max(1.0, p.norm()))
      continue;  // rank decision was marginal and the certificate failed
    zeros.push_back(std::move(z));
  }
  std::sort(zeros.begin(), zeros.end(), [](const InvariantZero& a, const InvariantZero& b) {
    return std::abs(a.lambda) > std::abs(b.lambda);
  });
  return zeros;
}

SecurityVerdict classify(const SystemTriple& monitor, const SystemTriple& performance,
                         const ZeroOptions& opts) {
  const Tolerances tol = Tolerances::active();
  SecurityVerdict v;
  v.monitor_degree = relative_degree(monitor);
  v.performance_degree = relative_degree(performance);
  v.monitor_zeros = invariant_zeros(monitor, opts);
  v.performance_zeros = invariant_zeros(performance, opts);

  for (const InvariantZero& z : v.monitor_zeros) {
    if (!z.unstable()) continue;
    const bool shared = std::any_of(
        v.performance_zeros.begin(), v.performance_zeros.end(), [&](const InvariantZero& p) {
          return close_frequencies(p.lambda, z.lambda, tol.zero_match);
        });
    if (!shared) v.exploitable.push_back(z);
  }

  if (!v.exploitable.empty()) {
    v.kind = AttackClass::UnboundedViaZero;
    v.witness = *std::max_element(v.exploitable.begin(), v.exploitable.end(),
                                  [](const InvariantZero& a, const InvariantZero& b) {
                                    return std::abs(a.lambda) < std::abs(b.lambda);
                                  });
  } else if (v.monitor_degree > v.performance_degree) {
    v.kind = AttackClass::UnboundedViaDegree;
  } else {
    v.kind = AttackClass::BoundedCandidate;
  }
  return v;
}

AttackSignal zero_dynamics_attack(const InvariantZero& zero, int state_size,
                                  double scale, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (zero.state_direction.size() != state_size)
    throw std::invalid_argument("zero direction does not match the state size");
  const int dim = static_cast<int>(zero.input_direction.size());
  AttackSignal a;
  a.kind = AttackSignal::Kind::ZeroDynamics;
  a.lambda = zero.lambda;
  a.scale = scale;
  a.samples.resize(dim, horizon + 1);
  Cplx power(1.0, 0.0);
  for (int k = 0; k <= horizon; ++k) {
    a.samples.col(k) = scale * (power * zero.input_direction).real();
    power *= zero.lambda;
  }
  a.initial_state = scale * zero.state_direction.real();
  return a;
}

AttackSignal terminal_step_attack(int dim, int horizon, int monitor_degree,
                                  double beta) {
  if (monitor_degree < 1 || monitor_degree == kInfiniteDegree)
    throw std::invalid_argument("terminal-step attack needs a finite response delay");
  if (horizon < monitor_degree)
    throw std::invalid_argument("window shorter than the response delay");
  AttackSignal a;
  a.kind = AttackSignal::Kind::TerminalStep;
  a.beta = beta;
  a.monitor_degree = monitor_degree;
  a.samples = Eigen::MatrixXd::Zero(dim, horizon + 1);
  for (int k = horizon - monitor_degree + 1; k <= horizon; ++k)
    a.samples.col(k).setConstant(beta);
  a.initial_state = Eigen::VectorXd();
  return a;
}

}  // namespace gtsec
