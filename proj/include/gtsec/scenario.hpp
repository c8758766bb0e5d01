#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtsec/design.hpp"
#include "gtsec/graph.hpp"
#include "gtsec/metric.hpp"
#include "gtsec/objective.hpp"
#include "gtsec/system.hpp"

namespace gtsec {

// Configuration problem reported with the dotted path of the offending
// field, so scripts can point users at the exact line of their file.
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How the closed loop under test is driven during a simulation run.
enum class AttackKind { None, ZeroDynamics, TerminalStep };

// One parsed scenario file.  Node indices are 0-based here; the file format
// counts agents from 1.  Objectives are either spelled out in the file or
// drawn from the configured ranges when realised against a seed.
struct Scenario {
  Network net;
  std::optional<double> scaling;  // consensus step scale; unset means auto

  bool objectives_generated = false;
  double q_lo = 0.0, q_hi = 0.0;  // curvature range when generated
  double c_lo = 0.0, c_hi = 0.0;
  std::optional<std::uint64_t> objective_seed;  // overrides the derived stream
  std::vector<QuadraticObjective> objectives;   // filled when explicit

  double alpha = 0.0;
  int attack_node = 0;
  int monitor_node = 0;
  Eigen::VectorXd weight;  // per-coordinate monitor weight

  AttackKind attack_kind = AttackKind::None;
  double attack_scale = 1.0;
  double attack_beta = 1.0;

  // Starting state for simulation runs: "random" (seeded unit norm),
  // "zero", or "fixed_point".  A zero-dynamics attack brings its own exact
  // starting state; the perturbation is added on top in every case.
  std::string x0_policy = "random";
  double x0_perturbation = 0.0;

  double epsilon = 0.0;    // detector threshold; 0 means uncalibrated
  int kappa_k1 = 100;      // settle step for the monitor offset
  int calibration_trials = 50;
  double calibration_margin = 1.5;

  std::optional<int> horizon;
  std::vector<int> oracle_windows;
  std::optional<MetricMode> mode;
  std::optional<std::uint64_t> seed;  // master seed named in the file

  AttackBelief belief;                  // empty means "the attack node"
  std::vector<int> monitor_candidates;  // empty means every node
  std::vector<EdgeChange> edge_candidates;

  // Optional polynomial costs, one coefficient list per agent with entry d
  // multiplying x^d; empty means reuse the quadratic objectives.
  std::vector<std::vector<double>> sos_coefficients;
  int sos_basis_degree = 0;
};

// Parses and validates a scenario document.  `origin` names the source in
// diagnostics (a file path or "<inline>").  Unknown keys anywhere in the
// document are rejected with their dotted path.
Scenario parse_scenario(const std::string& text, const std::string& origin);

Scenario load_scenario(const std::string& path);

// The scenario's objectives: the explicit ones, or a fresh draw from the
// configured ranges using the file's objective seed when present and a
// stream derived from `master_seed` otherwise.
std::vector<QuadraticObjective> scenario_objectives(const Scenario& sc,
                                                    std::uint64_t master_seed);

// Assembles the closed loop the scenario describes, detector settings
// included.
AggregatedSystem scenario_system(const Scenario& sc, std::uint64_t master_seed);

// Belief actually used by the design sweeps: the one from the file, or all
// mass on the attack node when the file gives none.
AttackBelief scenario_belief(const Scenario& sc);

}  // namespace gtsec
