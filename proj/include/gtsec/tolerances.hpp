#pragma once

namespace gtsec {

// Central numeric policy. Every tolerance that appears in a documented
// contract lives here so the library, the CLI and the tests agree on one
// set of numbers. Each field can be overridden through an environment
// variable GTSEC_<NAME> (upper-cased field name, decimal string), which is
// read once per call to active().
struct Tolerances {
  double laplacian_slack = 1e-12;   // consensus symmetry / row-sum residual
  double rank_rel = 1e-9;           // relative singular-value cutoff for rank
  double markov = 1e-9;             // nonzero threshold for impulse coefficients
  double zero_match = 1e-6;         // zero agreement across square-downs
  double zero_residual = 1e-7;      // direction-certificate residual scale
  double marginal_band = 1e-6;      // |lambda| within this of 1 counts as marginal
  double psd_margin = 1e-8;         // margin realising strict matrix inequalities
  double p_norm_cap = 1e8;          // storage-matrix norm bound in cyclo mode
  double divergence_cap = 1e12;     // state-norm guard in simulate()
  double fixed_point = 1e-10;       // optimum / fixed-point residual scale
  double settle = 1e-8;             // per-step delta that counts as settled
  double design_tie_rel = 1e-9;     // relative tie width in design sweeps
  double comparison_slack = 1e-5;   // slack in bound comparisons (oracle vs SDP)

  // Defaults with environment overrides applied.
  static Tolerances active();
};

}  // namespace gtsec
