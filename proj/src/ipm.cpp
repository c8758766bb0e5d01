// Interior-point solver for the block programs in sdp.hpp: a primal-dual
// path follower in the scaling of Nesterov and Todd, with a Mehrotra-style
// corrector.  Everything runs dense and single-threaded; for fixed inputs
// the iteration sequence is reproducible to the bit.
#include "gtsec/sdp.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace gtsec {
namespace {

struct BlockState {
  Eigen::MatrixXd x;     // dual slack, kept strictly positive definite
  Eigen::MatrixXd z;     // primal matrix
  Eigen::MatrixXd v;     // scaling with v x v = z
  Eigen::MatrixXd xinv;
};

// Largest step in [0, 1] keeping m + alpha dm positive definite, with a
// fraction-to-boundary backoff.
double max_step(const Eigen::MatrixXd& m, const Eigen::MatrixXd& dm) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd s = l.triangularView<Eigen::Lower>().solve(dm);
  s = l.triangularView<Eigen::Lower>().solve(s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return 1.0;
  return std::min(1.0, 0.98 / (-lmin));
}

// v with v x v = z, through z = L M^{-1/2} L' for M = L' x L, L = chol(z).
bool nt_scaling(BlockState& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(b.z);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd m = l.transpose() * b.x * l;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) return false;
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  b.v = l * eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() *
        l.transpose();
  Eigen::LLT<Eigen::MatrixXd> lltx(b.x);
  if (lltx.info() != Eigen::Success) return false;
  b.xinv = lltx.solve(Eigen::MatrixXd::Identity(b.x.rows(), b.x.cols()));
  return true;
}

class Core {
 public:
  Core(const SdpProblem& prob, bool aux) : prob_(prob), aux_(aux) {
    base_ = prob.vars.total();
    dim_ = base_ + (aux_ ? 1 : 0);
    ntotal_ = 0;
    for (const auto& blk : prob.blocks) ntotal_ += blk->size();
  }

  // Evaluate all slacks at y (aux component adds t I to every block).
  void eval_all(const Eigen::VectorXd& y, std::vector<BlockState>& st) const {
    st.resize(prob_.blocks.size());
    for (std::size_t b = 0; b < prob_.blocks.size(); ++b) {
      prob_.blocks[b]->eval(prob_.vars, y.head(base_), st[b].x);
      if (aux_) st[b].x.diagonal().array() += y[base_];
      st[b].x = 0.5 * (st[b].x + st[b].x.transpose()).eval();
    }
  }

  void apply_all(const Eigen::VectorXd& dy, std::vector<Eigen::MatrixXd>& dx) const {
    dx.resize(prob_.blocks.size());
    for (std::size_t b = 0; b < prob_.blocks.size(); ++b) {
      prob_.blocks[b]->apply(prob_.vars, dy.head(base_), dx[b]);
      if (aux_) dx[b].diagonal().array() += dy[base_];
    }
  }

  Eigen::VectorXd adjoint(const std::vector<Eigen::MatrixXd>& m) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
    for (std::size_t b = 0; b < prob_.blocks.size(); ++b) {
      prob_.blocks[b]->accumulate_adjoint(prob_.vars, m[b], out);
      if (aux_) out[base_] += m[b].trace();
    }
    return out;
  }

  Eigen::MatrixXd schur(const std::vector<BlockState>& st) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
    for (std::size_t b = 0; b < prob_.blocks.size(); ++b) {
      prob_.blocks[b]->accumulate_schur(prob_.vars, st[b].v, h);
      if (aux_) {
        // Identity coefficient of the auxiliary margin variable.
        const Eigen::MatrixXd v2 = st[b].v * st[b].v;
        Eigen::VectorXd col = Eigen::VectorXd::Zero(dim_);
        prob_.blocks[b]->accumulate_adjoint(prob_.vars, v2, col);
        h.col(base_).head(base_) += col.head(base_);
        h.row(base_).head(base_) += col.head(base_).transpose();
        h(base_, base_) += v2.trace();
      }
    }
    return 0.5 * (h + h.transpose()).eval();
  }

  // Runs the path follower from a strictly feasible y0.  The stop callback
  // sees the current y and may end the run early (used by the interior
  // search); returns the reason for stopping.
  struct RunResult {
    SdpStatus status = SdpStatus::IterationLimit;
    Eigen::VectorXd y;
    double objective = 0.0, rel_gap = 0.0, feas = 0.0;
    int iterations = 0;
  };

  template <typename StopFn>
  RunResult run(const Eigen::VectorXd& cost, const Eigen::VectorXd& y0,
                const SdpOptions& opts, StopFn early_stop) const {
    RunResult res;
    Eigen::VectorXd y = y0;
    std::vector<BlockState> st;
    eval_all(y, st);
    for (auto& b : st) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.x, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() <= 0.0) {
        res.status = SdpStatus::NumericalFailure;  // start must be interior
        res.y = y;
        return res;
      }
      b.z = (1.0 + cost.cwiseAbs().maxCoeff()) *
            Eigen::MatrixXd::Identity(b.x.rows(), b.x.cols());
    }

    const bool trace = std::getenv("GTSEC_IPM_TRACE") != nullptr;
    double prev_mu = std::numeric_limits<double>::infinity();
    int stall = 0;
    // The endgame can wander once the slacks are nearly singular, so every
    // non-optimal exit hands back the cleanest iterate seen, not the last.
    RunResult best = res;
    double best_score = std::numeric_limits<double>::infinity();
    const auto finish = [&](SdpStatus fallback) {
      best.status = best_score <= 1e-5 ? SdpStatus::NearOptimal : fallback;
      best.iterations = res.iterations;
      return best;
    };
    for (int it = 0; it < opts.max_iterations; ++it) {
      res.iterations = it;
      double gap = 0.0;
      for (const auto& b : st) gap += b.x.cwiseProduct(b.z).sum();
      const double mu = gap / ntotal_;
      const double obj = cost.dot(y);
      res.objective = obj;
      res.rel_gap = gap / (1.0 + std::abs(obj));

      std::vector<Eigen::MatrixXd> zs(st.size());
      for (std::size_t b = 0; b < st.size(); ++b) zs[b] = st[b].z;
      const Eigen::VectorXd rp = cost - adjoint(zs);
      res.feas = rp.norm() / (1.0 + cost.norm());
      res.y = y;

      const double score = std::max(res.rel_gap, res.feas);
      if (score < best_score) {
        best_score = score;
        best = res;
      }

      if (early_stop(y, res)) {
        res.status = SdpStatus::Optimal;
        return res;
      }
      if (res.rel_gap <= opts.rel_gap && res.feas <= opts.feas_tol) {
        res.status = SdpStatus::Optimal;
        return res;
      }
      if (mu < prev_mu * 0.995) {
        stall = 0;
      } else if (++stall >= 10) {
        return finish(SdpStatus::NumericalFailure);
      }
      prev_mu = mu;

      bool scaled = true;
      for (auto& b : st) scaled = scaled && nt_scaling(b);
      if (!scaled) return finish(SdpStatus::NumericalFailure);
      Eigen::MatrixXd h = schur(st);

      Eigen::LLT<Eigen::MatrixXd> hllt;
      double ridge = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd hr = h;
        if (ridge > 0.0) hr.diagonal().array() += ridge;
        hllt.compute(hr);
        if (hllt.info() == Eigen::Success) break;
        ridge = (ridge == 0.0) ? 1e-12 * (1.0 + h.trace() / dim_) : ridge * 100.0;
      }
      if (hllt.info() != Eigen::Success) return finish(SdpStatus::NumericalFailure);

      // Affine scouting direction.
      const Eigen::VectorXd dy_aff = hllt.solve(-cost);
      std::vector<Eigen::MatrixXd> dx_aff;
      apply_all(dy_aff, dx_aff);
      std::vector<Eigen::MatrixXd> dz_aff(st.size());
      for (std::size_t b = 0; b < st.size(); ++b)
        dz_aff[b] = -st[b].z - st[b].v * dx_aff[b] * st[b].v;

      double ad = 1.0, ap = 1.0;
      for (std::size_t b = 0; b < st.size(); ++b) {
        ad = std::min(ad, max_step(st[b].x, dx_aff[b]));
        ap = std::min(ap, max_step(st[b].z, dz_aff[b]));
      }
      double gap_aff = 0.0;
      for (std::size_t b = 0; b < st.size(); ++b)
        gap_aff += (st[b].x + ad * dx_aff[b]).cwiseProduct(st[b].z + ap * dz_aff[b]).sum();
      const double mu_aff = std::max(gap_aff / ntotal_, 0.0);
      double sigma = std::pow(mu_aff / mu, 3.0);
      sigma = std::min(std::max(sigma, 1e-4), 0.9);

      // Corrector right-hand side.
      std::vector<Eigen::MatrixXd> rhs_mats(st.size());
      for (std::size_t b = 0; b < st.size(); ++b) {
        const Eigen::MatrixXd cross = st[b].xinv * dx_aff[b] * dz_aff[b];
        rhs_mats[b] = sigma * mu * st[b].xinv - st[b].z -
                      0.5 * (cross + cross.transpose());
      }
      const Eigen::VectorXd rhs = adjoint(rhs_mats) - rp;
      const Eigen::VectorXd dy = hllt.solve(rhs);
      std::vector<Eigen::MatrixXd> dx;
      apply_all(dy, dx);
      std::vector<Eigen::MatrixXd> dz(st.size());
      for (std::size_t b = 0; b < st.size(); ++b)
        dz[b] = rhs_mats[b] - st[b].v * dx[b] * st[b].v;

      ad = 1.0;
      ap = 1.0;
      for (std::size_t b = 0; b < st.size(); ++b) {
        ad = std::min(ad, max_step(st[b].x, dx[b]));
        ap = std::min(ap, max_step(st[b].z, dz[b]));
      }
      ad *= 0.99;
      ap *= 0.99;

      if (trace)
        std::fprintf(stderr,
                     "ipm it=%d mu=%.3e obj=%.9e feas=%.3e sigma=%.2e ad=%.3f ap=%.3f\n",
                     it, mu, obj, res.feas, sigma, ad, ap);

      // Take the step, halving it while roundoff pushes either cone factor
      // past the boundary; near the optimum the slacks are almost singular
      // and the nominal step can overshoot by an ulp-level amount.
      bool stepped = false;
      for (int bt = 0; bt < 6 && !stepped; ++bt) {
        const double sc = std::pow(0.5, bt);
        const Eigen::VectorXd y_try = y + sc * ad * dy;
        std::vector<BlockState> st_try;
        eval_all(y_try, st_try);
        bool ok = true;
        for (std::size_t b = 0; b < st_try.size() && ok; ++b) {
          st_try[b].z = st[b].z + sc * ap * dz[b];
          st_try[b].z = 0.5 * (st_try[b].z + st_try[b].z.transpose()).eval();
          ok = Eigen::LLT<Eigen::MatrixXd>(st_try[b].x).info() == Eigen::Success &&
               Eigen::LLT<Eigen::MatrixXd>(st_try[b].z).info() == Eigen::Success;
        }
        if (ok) {
          y = y_try;
          st = std::move(st_try);
          stepped = true;
        }
      }
      if (!stepped) return finish(SdpStatus::NumericalFailure);
    }
    return finish(SdpStatus::IterationLimit);
  }

  const SdpProblem& prob_;
  bool aux_;
  int base_ = 0, dim_ = 0;
  double ntotal_ = 0;
};

}  // namespace

SdpSolution SdpProblem::solve(const SdpOptions& opts) const {
  if (cost.size() != vars.total())
    throw std::invalid_argument("cost length does not match the variable layout");
  if (blocks.empty()) throw std::invalid_argument("program has no constraints");

  SdpSolution sol;
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(vars.total());

  if (opts.require_phase1) {
    // Interior search: minimise the uniform margin t added to every block.
    Core aux_core(*this, true);
    std::vector<BlockState> probe;
    aux_core.eval_all((Eigen::VectorXd(vars.total() + 1) << y0, 0.0).finished(), probe);
    double worst = 0.0;
    for (auto& b : probe) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.x, Eigen::EigenvaluesOnly);
      worst = std::min(worst, eig.eigenvalues().minCoeff());
    }
    Eigen::VectorXd start(vars.total() + 1);
    start << y0, -worst + 1.0;

    Eigen::VectorXd aux_cost = Eigen::VectorXd::Zero(vars.total() + 1);
    aux_cost[vars.total()] = 1.0;
    SdpOptions aux_opts = opts;
    aux_opts.rel_gap = 1e-9;
    // Drive the margin well past zero so the main run starts clear of the
    // boundary; a thin feasible set just means the search runs to its
    // optimum, and any strictly negative margin still serves as a start.
    const double margin_goal = -1e-3 * (1.0 - worst);
    auto res = aux_core.run(aux_cost, start, aux_opts,
                            [&](const Eigen::VectorXd& y, const Core::RunResult&) {
                              return y[vars.total()] <= margin_goal;
                            });
    sol.phase1_iterations = res.iterations;
    sol.phase1_margin = res.y[vars.total()];
    if (sol.phase1_margin >= 0.0) {
      if (res.status == SdpStatus::Optimal || res.status == SdpStatus::NearOptimal) {
        // The margin cannot be driven negative: no interior point exists.
        sol.status = (sol.phase1_margin > 1e-7 * (1.0 - worst))
                         ? SdpStatus::Infeasible
                         : SdpStatus::NumericalFailure;
      } else {
        sol.status = res.status;
      }
      sol.y = res.y.head(vars.total());
      return sol;
    }
    y0 = res.y.head(vars.total());
  }

  Core core(*this, false);
  auto res = core.run(cost, y0, opts,
                      [](const Eigen::VectorXd&, const Core::RunResult&) { return false; });
  sol.status = res.status;
  sol.y = res.y;
  sol.objective = res.objective;
  sol.rel_gap = res.rel_gap;
  sol.feas_residual = res.feas;
  sol.iterations = res.iterations;
  return sol;
}

}  // namespace gtsec
