#include "gtsec/tolerances.hpp"

#include <cstdlib>
#include <string>

namespace gtsec {
namespace {

void load(const char* name, double& slot) {
  const char* raw = std::getenv(name);
  if (!raw) return;
  try {
    slot = std::stod(raw);
  } catch (...) {
    // Malformed overrides are ignored; the default stays in force.
  }
}

}  // namespace

Tolerances Tolerances::active() {
  Tolerances t;
  load("GTSEC_LAPLACIAN_SLACK", t.laplacian_slack);
  load("GTSEC_RANK_REL", t.rank_rel);
  load("GTSEC_MARKOV", t.markov);
  load("GTSEC_ZERO_MATCH", t.zero_match);
  load("GTSEC_ZERO_RESIDUAL", t.zero_residual);
  load("GTSEC_MARGINAL_BAND", t.marginal_band);
  load("GTSEC_PSD_MARGIN", t.psd_margin);
  load("GTSEC_P_NORM_CAP", t.p_norm_cap);
  load("GTSEC_DIVERGENCE_CAP", t.divergence_cap);
  load("GTSEC_FIXED_POINT", t.fixed_point);
  load("GTSEC_SETTLE", t.settle);
  load("GTSEC_DESIGN_TIE_REL", t.design_tie_rel);
  load("GTSEC_COMPARISON_SLACK", t.comparison_slack);
  return t;
}

}  // namespace gtsec
