#include "gtsec/metric.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "gtsec/oracle.hpp"
#include "gtsec/tolerances.hpp"

namespace gtsec {
namespace {

// Orthonormal basis of the span of the columns of m (possibly none).
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.cols() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(rel_tol);
  const int r = static_cast<int>(qr.rank());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), r);
  return q;
}

// Orthonormal basis of the orthogonal complement of the span of m.
Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& m, double rel_tol) {
  const Eigen::Index n = m.rows();
  if (m.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(rel_tol);
  const int r = static_cast<int>(qr.rank());
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - r);
}

Eigen::MatrixXd krylov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int powers) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd k(n, b.cols() * std::max(powers, 0));
  Eigen::MatrixXd cur = b;
  for (int j = 0; j < powers; ++j) {
    k.middleCols(j * b.cols(), b.cols()) = cur;
    cur = a * cur;
  }
  return k;
}

struct PsdLayout {
  SdpProblem prob;
  Eigen::MatrixXd nbasis;  // rows span the complement of the killed subspace
  int gamma_index = 0;     // flat position of the multiplier
  bool has_storage = false;
};

// Nonnegative-storage program.  Positive semidefiniteness of the storage
// together with the input corner of the inequality forces P to vanish on
// the subspace the attack reaches before either output can react; the
// program is posed directly on the complement, and the inequality is
// conjugated past the directions where it holds identically, so that the
// reduced program has an interior whenever the original is feasible.
PsdLayout build_psd(const SystemTriple& perf, const SystemTriple& mon, int s_min,
                    const Tolerances& tol) {
  const Eigen::MatrixXd& a = mon.A;
  const Eigen::MatrixXd& b = mon.B;
  const Eigen::Index nx = a.rows();

  const Eigen::MatrixXd kf = krylov(a, b, s_min);
  const Eigen::MatrixXd kq = krylov(a, b, s_min - 1);
  const Eigen::MatrixXd nb = complement_basis(kf, tol.rank_rel).transpose();  // q x nx
  const Eigen::MatrixXd mb = complement_basis(kq, tol.rank_rel);              // nx x mc

  PsdLayout lay;
  lay.nbasis = nb;
  lay.has_storage = nb.rows() > 0;

  SdpProblem& p = lay.prob;
  if (lay.has_storage) p.vars.mat_sizes.push_back(static_cast<int>(nb.rows()));
  p.vars.scalars = 1;
  lay.gamma_index = p.vars.scalar_offset(0);
  p.cost = Eigen::VectorXd::Zero(p.vars.total());
  p.cost[lay.gamma_index] = 1.0;

  const Eigen::MatrixXd cpm = perf.C * mb;
  const Eigen::MatrixXd cmm = mon.C * mb;
  auto lmi = std::make_unique<CongruenceBlock>(
      static_cast<int>(mb.cols()), Eigen::MatrixXd(-cpm.transpose() * cpm));
  if (lay.has_storage) {
    lmi->add_term(0, -1.0, nb * a * mb);
    lmi->add_term(0, 1.0, nb * mb);
  }
  lmi->add_scalar(0, cmm.transpose() * cmm);
  p.blocks.push_back(std::move(lmi));

  if (lay.has_storage) {
    auto cone = std::make_unique<CongruenceBlock>(
        static_cast<int>(nb.rows()),
        Eigen::MatrixXd(Eigen::MatrixXd::Zero(nb.rows(), nb.rows())));
    cone->add_term(0, 1.0, Eigen::MatrixXd::Identity(nb.rows(), nb.rows()));
    p.blocks.push_back(std::move(cone));
    // Cap the storage so the feasible set is compact: an infeasible program
    // then shows up as a positive interior-search optimum instead of an
    // escape ray the iteration cannot follow to its limit.
    auto cap = std::make_unique<CongruenceBlock>(
        static_cast<int>(nb.rows()),
        Eigen::MatrixXd(tol.p_norm_cap *
                        Eigen::MatrixXd::Identity(nb.rows(), nb.rows())));
    cap->add_term(0, -1.0, Eigen::MatrixXd::Identity(nb.rows(), nb.rows()));
    p.blocks.push_back(std::move(cap));
  }

  auto nonneg = std::make_unique<SparseBlock>(1, Eigen::MatrixXd::Zero(1, 1));
  nonneg->add_coefficient(lay.gamma_index, {Eigen::Triplet<double>(0, 0, 1.0)});
  p.blocks.push_back(std::move(nonneg));
  auto gcap = std::make_unique<SparseBlock>(
      1, Eigen::MatrixXd::Constant(1, 1, tol.p_norm_cap));
  gcap->add_coefficient(lay.gamma_index, {Eigen::Triplet<double>(0, 0, -1.0)});
  p.blocks.push_back(std::move(gcap));
  (void)nx;
  return lay;
}

struct CycloLayout {
  SdpProblem prob;
  int gamma_index = 0;
};

// Sign-indefinite storage with a norm cap standing in for boundedness.
CycloLayout build_cyclo(const SystemTriple& perf, const SystemTriple& mon,
                        const Tolerances& tol) {
  const Eigen::Index nx = mon.A.rows();
  const Eigen::Index nu = mon.B.cols();

  CycloLayout lay;
  SdpProblem& p = lay.prob;
  p.vars.mat_sizes.push_back(static_cast<int>(nx));
  p.vars.scalars = 1;
  lay.gamma_index = p.vars.scalar_offset(0);
  p.cost = Eigen::VectorXd::Zero(p.vars.total());
  p.cost[lay.gamma_index] = 1.0;

  const Eigen::Index ext = nx + nu;
  Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(ext, ext);
  c0.topLeftCorner(nx, nx) = -perf.C.transpose() * perf.C;
  Eigen::MatrixXd dg = Eigen::MatrixXd::Zero(ext, ext);
  dg.topLeftCorner(nx, nx) = mon.C.transpose() * mon.C;

  Eigen::MatrixXd g1(nx, ext);
  g1 << mon.A, mon.B;
  Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(nx, ext);
  g2.topLeftCorner(nx, nx).setIdentity();

  auto lmi = std::make_unique<CongruenceBlock>(static_cast<int>(ext), c0);
  lmi->add_term(0, -1.0, g1);
  lmi->add_term(0, 1.0, g2);
  lmi->add_scalar(0, dg);
  p.blocks.push_back(std::move(lmi));

  const Eigen::MatrixXd cap = tol.p_norm_cap * Eigen::MatrixXd::Identity(nx, nx);
  auto hi = std::make_unique<CongruenceBlock>(static_cast<int>(nx), cap);
  hi->add_term(0, -1.0, Eigen::MatrixXd::Identity(nx, nx));
  p.blocks.push_back(std::move(hi));
  auto lo = std::make_unique<CongruenceBlock>(static_cast<int>(nx), cap);
  lo->add_term(0, 1.0, Eigen::MatrixXd::Identity(nx, nx));
  p.blocks.push_back(std::move(lo));

  auto nonneg = std::make_unique<SparseBlock>(1, Eigen::MatrixXd::Zero(1, 1));
  nonneg->add_coefficient(lay.gamma_index, {Eigen::Triplet<double>(0, 0, 1.0)});
  p.blocks.push_back(std::move(nonneg));
  auto gcap = std::make_unique<SparseBlock>(
      1, Eigen::MatrixXd::Constant(1, 1, tol.p_norm_cap));
  gcap->add_coefficient(lay.gamma_index, {Eigen::Triplet<double>(0, 0, -1.0)});
  p.blocks.push_back(std::move(gcap));
  return lay;
}

struct SolveAttempt {
  bool decided = false;
  MetricResult result;
};

SolveAttempt solve_on(const SystemTriple& perf, const SystemTriple& mon,
                      double epsilon, MetricMode mode, const SdpOptions& opts,
                      const Tolerances& tol) {
  SolveAttempt at;
  MetricResult& res = at.result;
  res.mode = mode;
  res.epsilon = epsilon;

  const int dm = relative_degree(mon);
  const int dp = relative_degree(perf);
  if (dm == kInfiniteDegree) {
    at.decided = true;
    if (dp == kInfiniteDegree) return at;  // both blind: zero by convention
    res.outcome.unbounded = true;          // silent monitor, live performance
    return at;
  }

  SdpProblem* prob = nullptr;
  PsdLayout psd;
  CycloLayout cyc;
  int gamma_index = 0;
  if (mode == MetricMode::Psd) {
    psd = build_psd(perf, mon, std::min(dm, dp), tol);
    prob = &psd.prob;
    gamma_index = psd.gamma_index;
  } else {
    cyc = build_cyclo(perf, mon, tol);
    prob = &cyc.prob;
    gamma_index = cyc.gamma_index;
  }

  const SdpSolution sol = prob->solve(opts);
  res.solver.status = sol.status;
  res.solver.iterations = sol.iterations;
  res.solver.phase1_iterations = sol.phase1_iterations;
  res.solver.rel_gap = sol.rel_gap;
  res.solver.feas_residual = sol.feas_residual;

  if (sol.usable()) {
    at.decided = true;
    res.gamma = std::max(sol.y[gamma_index], 0.0);
    res.outcome.unbounded = false;
    res.outcome.value = epsilon * res.gamma;
    if (mode == MetricMode::Psd) {
      if (psd.has_storage) {
        const Eigen::MatrixXd phat = prob->vars.unpack(sol.y, 0);
        res.storage = psd.nbasis.transpose() * phat * psd.nbasis;
      } else {
        res.storage = Eigen::MatrixXd::Zero(mon.A.rows(), mon.A.cols());
      }
    } else {
      res.storage = prob->vars.unpack(sol.y, 0);
    }
  } else if (sol.status == SdpStatus::Infeasible) {
    at.decided = true;
    res.outcome.unbounded = true;  // no certificate of this class exists
  }
  return at;
}

}  // namespace

MetricResult security_bound(const AugmentedSystem& aug, double epsilon,
                            MetricMode mode, const SdpOptions& opts) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  const Tolerances tol = Tolerances::active();

  SolveAttempt at = solve_on(aug.performance_triple(), aug.monitor_triple(),
                             epsilon, mode, opts, tol);
  if (at.decided) return at.result;

  // The loop state often carries directions the attack cannot excite;
  // dropping them conditions the program without changing the bound.
  const Eigen::MatrixXd reach = range_basis(
      krylov(aug.A, aug.B, static_cast<int>(aug.A.rows())), tol.rank_rel);
  SystemTriple perf{reach.transpose() * aug.A * reach, reach.transpose() * aug.B,
                    aug.Cp * reach};
  SystemTriple mon{perf.A, perf.B, aug.Cm * reach};
  SolveAttempt retry = solve_on(perf, mon, epsilon, mode, opts, tol);
  retry.result.solver.restricted = true;
  if (retry.decided) {
    if (retry.result.storage.size() > 0)
      retry.result.storage =
          (reach * retry.result.storage * reach.transpose()).eval();
    return retry.result;
  }
  throw std::runtime_error(
      "storage-function solve failed even after restricting to the reachable "
      "subspace (solver status " +
      std::to_string(static_cast<int>(retry.result.solver.status)) + ")");
}

SecurityAnalysis analyze_security(const AggregatedSystem& sys, double epsilon,
                                  std::optional<MetricMode> force_mode,
                                  const std::vector<int>& oracle_windows,
                                  const ZeroOptions& zopts, const SdpOptions& sopts) {
  const Tolerances tol = Tolerances::active();
  SecurityAnalysis an;
  an.verdict = classify(sys.monitor_triple(), sys.performance_triple(), zopts);

  const int dm = an.verdict.monitor_degree;
  const int dp = an.verdict.performance_degree;
  if (dm != kInfiniteDegree && dm >= dp) {
    an.augmented = augment_delays(sys.monitor_triple(), sys.performance_triple());
  } else {
    an.augmented.A = sys.A;
    an.augmented.B = sys.B;
    an.augmented.Cp = sys.Cp;
    an.augmented.Cm = sys.Cm;
    an.augmented.delay = 0;
    an.augmented.base_states = sys.state_size();
  }

  int unstable_m = 0, unstable_p = 0;
  bool any_marginal = false;
  for (const auto& z : an.verdict.monitor_zeros) {
    if (z.unstable()) ++unstable_m;
    if (z.marginal) any_marginal = true;
  }
  for (const auto& z : an.verdict.performance_zeros) {
    if (z.unstable()) ++unstable_p;
    if (z.marginal) any_marginal = true;
  }
  an.cyclo_pattern = unstable_m == 1 && unstable_p == 1 && !any_marginal;
  if (an.cyclo_pattern) {
    double mm = 0.0, mp = 0.0;
    for (const auto& z : an.verdict.monitor_zeros)
      if (z.unstable()) mm = std::abs(z.lambda);
    for (const auto& z : an.verdict.performance_zeros)
      if (z.unstable()) mp = std::abs(z.lambda);
    an.cyclo_pattern = std::abs(mm - mp) > tol.zero_match * std::max(1.0, mm);
  }

  MetricMode mode = MetricMode::Psd;
  if (force_mode) {
    mode = *force_mode;
    an.mode_forced = true;
  } else if (!an.verdict.exploitable.empty()) {
    mode = MetricMode::Cyclo;
  }

  an.metric = security_bound(an.augmented, epsilon, mode, sopts);

  for (int window : oracle_windows) {
    const OracleResult o = finite_horizon_bound(an.augmented.performance_triple(),
                                                an.augmented.monitor_triple(),
                                                window, epsilon);
    an.oracle.emplace_back(window,
                           o.unbounded ? std::numeric_limits<double>::infinity()
                                       : o.value);
  }
  return an;
}

}  // namespace gtsec
