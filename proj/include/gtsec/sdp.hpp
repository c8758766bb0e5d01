#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace gtsec {

// Variable layout for a linear-cost semidefinite program
//
//   minimise  cost' y   subject to   X_b(y) >= 0 for every block b,
//
// where y flattens a list of symmetric matrix variables followed by plain
// scalars.  svec packs the upper triangle (k <= l) at index l(l+1)/2 + k,
// storing plain entries without weighting; the quadratic forms in the
// solver account for the doubled off-diagonal basis elements.
struct SdpVariables {
  std::vector<int> mat_sizes;
  int scalars = 0;

  static int svec_size(int p) { return p * (p + 1) / 2; }
  static int svec_index(int k, int l) { return l * (l + 1) / 2 + k; }  // k <= l

  int mat_offset(int v) const;
  int scalar_offset(int s) const;
  int total() const;

  Eigen::MatrixXd unpack(const Eigen::VectorXd& y, int v) const;
  void pack(const Eigen::MatrixXd& m, int v, Eigen::VectorXd& y) const;
};

// One affine matrix-inequality block X(y) >= 0.  Implementations expose the
// linear map A(.), its adjoint, and the scaled quadratic form the interior
// solver assembles its normal equations from.
class ConstraintBlock {
 public:
  explicit ConstraintBlock(int size) : size_(size) {}
  virtual ~ConstraintBlock() = default;
  int size() const { return size_; }

  virtual void eval(const SdpVariables& vars, const Eigen::VectorXd& y,
                    Eigen::MatrixXd& x) const = 0;
  // Linear part only: dx = A(dy).
  virtual void apply(const SdpVariables& vars, const Eigen::VectorXd& dy,
                     Eigen::MatrixXd& dx) const = 0;
  // out_i += <F_i, m> for every coefficient F_i of this block; m symmetric.
  virtual void accumulate_adjoint(const SdpVariables& vars, const Eigen::MatrixXd& m,
                                  Eigen::VectorXd& out) const = 0;
  // h_ij += <F_i, v F_j v> for this block's coefficient pairs; v symmetric.
  virtual void accumulate_schur(const SdpVariables& vars, const Eigen::MatrixXd& v,
                                Eigen::MatrixXd& h) const = 0;

 protected:
  int size_;
};

// X(y) = C0 + sum_t sign_t G_t' P_v G_t + sum_s y_s D_s for one matrix
// variable P_v.  The solver exploits the congruence structure: its normal
// equations reduce to index arithmetic on G_t v G_t' products, which keeps
// storage-function programs with thousands of matrix entries tractable.
class CongruenceBlock : public ConstraintBlock {
 public:
  CongruenceBlock(int size, Eigen::MatrixXd c0);
  void add_term(int mat_var, double sign, Eigen::MatrixXd g);
  void add_scalar(int scalar, Eigen::MatrixXd d);

  void eval(const SdpVariables&, const Eigen::VectorXd&, Eigen::MatrixXd&) const override;
  void apply(const SdpVariables&, const Eigen::VectorXd&, Eigen::MatrixXd&) const override;
  void accumulate_adjoint(const SdpVariables&, const Eigen::MatrixXd&,
                          Eigen::VectorXd&) const override;
  void accumulate_schur(const SdpVariables&, const Eigen::MatrixXd&,
                        Eigen::MatrixXd&) const override;

 private:
  struct Term {
    int var;
    double sign;
    Eigen::MatrixXd g;  // p x size
  };
  struct ScalarTerm {
    int scalar;
    Eigen::MatrixXd d;
  };
  Eigen::MatrixXd c0_;
  std::vector<Term> terms_;
  std::vector<ScalarTerm> scalar_terms_;
};

// X(y) = C0 + sum_i y_i F_i with explicit sparse symmetric coefficients,
// indexed by flat variable position.  Suited to Gram-matrix constraints
// whose coefficients touch few entries each.
class SparseBlock : public ConstraintBlock {
 public:
  SparseBlock(int size, Eigen::MatrixXd c0);
  // Entries are (row, col, value) with both triangles listed explicitly
  // (or only the diagonal once).
  void add_coefficient(int flat_var, std::vector<Eigen::Triplet<double>> entries);

  void eval(const SdpVariables&, const Eigen::VectorXd&, Eigen::MatrixXd&) const override;
  void apply(const SdpVariables&, const Eigen::VectorXd&, Eigen::MatrixXd&) const override;
  void accumulate_adjoint(const SdpVariables&, const Eigen::MatrixXd&,
                          Eigen::VectorXd&) const override;
  void accumulate_schur(const SdpVariables&, const Eigen::MatrixXd&,
                        Eigen::MatrixXd&) const override;

 private:
  struct Coeff {
    int var;
    std::vector<Eigen::Triplet<double>> f;
  };
  Eigen::MatrixXd c0_;
  std::vector<Coeff> coeffs_;
};

enum class SdpStatus {
  Optimal,
  NearOptimal,      // stalled with moderate accuracy
  Infeasible,       // no point satisfies all blocks strictly
  IterationLimit,
  NumericalFailure,
};

struct SdpOptions {
  double rel_gap = 1e-9;
  double feas_tol = 1e-9;
  int max_iterations = 120;
  bool require_phase1 = true;  // find an interior point first; off when y = 0 is known interior
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  Eigen::VectorXd y;
  double objective = 0.0;
  double rel_gap = 0.0;
  double feas_residual = 0.0;
  int iterations = 0;
  int phase1_iterations = 0;
  double phase1_margin = 0.0;  // final slack of the interior search, negative = interior found

  bool usable() const {
    return status == SdpStatus::Optimal || status == SdpStatus::NearOptimal;
  }
};

struct SdpProblem {
  SdpVariables vars;
  Eigen::VectorXd cost;
  std::vector<std::unique_ptr<ConstraintBlock>> blocks;

  SdpSolution solve(const SdpOptions& opts = {}) const;
};

}  // namespace gtsec
