#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtsec/csvio.hpp"
#include "gtsec/design.hpp"
#include "gtsec/metric.hpp"
#include "gtsec/report.hpp"
#include "gtsec/rng.hpp"
#include "gtsec/scenario.hpp"
#include "gtsec/simulate.hpp"
#include "gtsec/svgplot.hpp"
#include "gtsec/system.hpp"
#include "gtsec/zeros.hpp"

#ifdef GTSEC_WITH_SOS
#include "gtsec/poly.hpp"
#include "gtsec/sos.hpp"
#endif

namespace {

using gtsec::Scenario;
using gtsec::ScenarioError;
using nlohmann::ordered_json;

struct CliOptions {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::vector<int> oracle_windows;
  std::string mode;
  bool plot = false;
};

void add_common(CLI::App* cmd, CliOptions* o) {
  cmd->add_option("--config", o->config, "scenario file")->required();
  cmd->add_option("--seed", o->seed, "master seed for every randomised step");
  cmd->add_option("--out", o->out, "output directory (created if missing)");
  cmd->add_option("--horizon", o->horizon, "simulation horizon / detector window");
  cmd->add_option("--oracle-L", o->oracle_windows,
                  "finite-horizon cross-check windows, comma separated")
      ->delimiter(',');
  cmd->add_option("--mode", o->mode, "storage class: psd or cyclo")
      ->check(CLI::IsMember({"psd", "cyclo"}));
  cmd->add_flag("--plot", o->plot, "also write an SVG plot where supported");
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed,
                           const std::string& why) {
  if (!seed)
    throw ScenarioError("a master seed is required (" + why +
                        "); pass --seed or add a seed field");
  return *seed;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* verdict_name(gtsec::AttackClass k) {
  switch (k) {
    case gtsec::AttackClass::UnboundedViaZero:
      return "UNBOUNDED_VIA_ZERO";
    case gtsec::AttackClass::UnboundedViaDegree:
      return "UNBOUNDED_VIA_RELATIVE_DEGREE";
    case gtsec::AttackClass::BoundedCandidate:
      return "BOUNDED_CANDIDATE";
  }
  return "BOUNDED_CANDIDATE";
}

const char* status_name(gtsec::SdpStatus s) {
  switch (s) {
    case gtsec::SdpStatus::Optimal:
      return "optimal";
    case gtsec::SdpStatus::NearOptimal:
      return "near_optimal";
    case gtsec::SdpStatus::Infeasible:
      return "infeasible";
    case gtsec::SdpStatus::IterationLimit:
      return "iteration_limit";
    case gtsec::SdpStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "numerical_failure";
}

ordered_json degree_json(int d) {
  if (d == gtsec::kInfiniteDegree) return "infinite";
  return d;
}

ordered_json zeros_json(const std::vector<gtsec::InvariantZero>& zeros) {
  ordered_json arr = ordered_json::array();
  for (const auto& z : zeros) {
    ordered_json e;
    e["re"] = z.lambda.real();
    e["im"] = z.lambda.imag();
    e["modulus"] = std::abs(z.lambda);
    e["unstable"] = z.unstable();
    e["marginal"] = z.marginal;
    arr.push_back(e);
  }
  return arr;
}

ordered_json gamma_json(const gtsec::GammaExt& g) {
  if (g.unbounded) return "unbounded";
  return g.value;
}

// Attack input and matching start state for a simulation run, as the
// scenario requests them.
struct RunSetup {
  Eigen::MatrixXd attack;
  Eigen::VectorXd x0;
  std::string kind = "none";
};

Eigen::VectorXd base_state(const Scenario& sc, const gtsec::AggregatedSystem& sys,
                           const std::optional<std::uint64_t>& seed) {
  if (sc.x0_policy == "zero")
    return Eigen::VectorXd::Zero(sys.state_size());
  if (sc.x0_policy == "fixed_point") return sys.fixed_point();
  gtsec::Rng rng(gtsec::derive_seed(
      require_seed(seed, "the starting state is drawn at random"), "x0"));
  return rng.unit_vector(sys.state_size());
}

RunSetup build_run(const Scenario& sc, const gtsec::AggregatedSystem& sys,
                   int horizon, const std::optional<std::uint64_t>& seed) {
  RunSetup run;
  switch (sc.attack_kind) {
    case gtsec::AttackKind::None:
      run.x0 = base_state(sc, sys, seed);
      break;
    case gtsec::AttackKind::ZeroDynamics: {
      run.kind = "zero-dynamics";
      const gtsec::SecurityVerdict v =
          gtsec::classify(sys.monitor_triple(), sys.performance_triple());
      const gtsec::InvariantZero* pick = nullptr;
      if (v.witness) pick = &*v.witness;
      double best = -1.0;
      if (!pick)
        for (const auto& z : v.monitor_zeros)
          if (std::abs(z.lambda) > best) {
            best = std::abs(z.lambda);
            pick = &z;
          }
      if (!pick)
        throw ScenarioError(
            "the monitor channel has no invariant zero, so no zero-dynamics "
            "attack exists for this loop");
      const gtsec::AttackSignal sig = gtsec::zero_dynamics_attack(
          *pick, sys.state_size(), sc.attack_scale, horizon);
      run.attack = sig.samples;
      run.x0 = sig.initial_state;
      break;
    }
    case gtsec::AttackKind::TerminalStep: {
      run.kind = "terminal-step";
      const int dm = gtsec::relative_degree(sys.monitor_triple());
      if (dm == gtsec::kInfiniteDegree)
        throw ScenarioError(
            "the monitor channel never reacts; a terminal-step attack has no "
            "window to hide in");
      const gtsec::AttackSignal sig =
          gtsec::terminal_step_attack(sys.dim, horizon, dm, sc.attack_beta);
      run.attack = sig.samples;
      run.x0 = base_state(sc, sys, seed);
      break;
    }
  }
  if (sc.x0_perturbation > 0.0) {
    gtsec::Rng rng(gtsec::derive_seed(
        require_seed(seed, "the starting state is perturbed at random"),
        "x0_perturbation"));
    run.x0 += sc.x0_perturbation * rng.unit_vector(sys.state_size());
  }
  return run;
}

int cmd_simulate(const Scenario& sc, const CliOptions& opt, ordered_json* report,
                 const std::string& out_dir) {
  const int horizon = opt.horizon ? *opt.horizon : sc.horizon.value_or(200);
  gtsec::AggregatedSystem sys = gtsec::scenario_system(
      sc, sc.objectives_generated
              ? require_seed(sc.seed, "objectives are drawn from ranges")
              : sc.seed.value_or(0));
  RunSetup run = build_run(sc, sys, horizon, sc.seed);

  sys.kappa = gtsec::calibrate_offset(sys, run.x0, sc.kappa_k1);
  double threshold = sc.epsilon;
  bool calibrated = false;
  if (threshold <= 0.0) {
    threshold = gtsec::calibrate_threshold(
        sys, sc.calibration_trials, horizon, sc.calibration_margin,
        gtsec::derive_seed(
            require_seed(sc.seed, "the detector threshold is calibrated from "
                                  "random trials"),
            "threshold"));
    calibrated = true;
  }
  sys.epsilon = threshold;

  gtsec::SimulationInputs in;
  in.x0 = run.x0;
  in.attack = run.attack;
  const gtsec::Trajectory traj = gtsec::simulate(sys, in, horizon);
  const double energy = gtsec::detector_energy(traj, horizon);
  const bool alarm = energy > threshold;

  double peak = 0.0;
  for (int k = 0; k <= traj.steps(); ++k)
    peak = std::max(peak, traj.state.col(k).norm());

  ordered_json res;
  res["horizon"] = horizon;
  res["attack"] = {{"kind", run.kind},
                   {"scale", sc.attack_scale},
                   {"beta", sc.attack_beta}};
  res["alarm"] = alarm;
  res["detector_energy"] = energy;
  res["epsilon"] = threshold;
  res["epsilon_calibrated"] = calibrated;
  res["kappa_norm"] = sys.kappa.norm();
  res["x0_norm"] = run.x0.norm();
  res["diverged"] = traj.truncated;
  if (traj.truncated) res["diverged_at"] = traj.truncated_at;
  res["steps_stored"] = traj.steps();
  res["peak_state_norm"] = peak;
  res["optimum_gap"] = gtsec::optimum_gap(sys, traj);
  (*report)["results"] = res;

  gtsec::write_trajectory_csv(out_dir + "/simulate.csv", sys, traj, threshold);
  if (opt.plot) {
    const int rows = sys.agents * sys.dim;
    Eigen::MatrixXd series(rows + 1, traj.steps() + 1);
    series.topRows(rows) = traj.state.topRows(rows);
    for (int k = 0; k <= traj.steps(); ++k)
      series(rows, k) = traj.ym.col(k).norm();
    std::vector<std::string> names;
    for (int i = 0; i < sys.agents; ++i)
      for (int j = 0; j < sys.dim; ++j)
        names.push_back("agent " + std::to_string(i + 1) +
                        (sys.dim > 1 ? " [" + std::to_string(j + 1) + "]" : ""));
    names.push_back("|y_m|");
    gtsec::write_line_chart(out_dir + "/simulate.svg", "iterates and monitor residual",
                            names, series);
  }
  return alarm ? 2 : 0;
}

int cmd_analyze(const Scenario& sc, ordered_json* report) {
  const gtsec::AggregatedSystem sys = gtsec::scenario_system(
      sc, sc.objectives_generated
              ? require_seed(sc.seed, "objectives are drawn from ranges")
              : sc.seed.value_or(0));
  const gtsec::SecurityVerdict v =
      gtsec::classify(sys.monitor_triple(), sys.performance_triple());
  ordered_json res;
  res["verdict"] = verdict_name(v.kind);
  res["monitor_degree"] = degree_json(v.monitor_degree);
  res["performance_degree"] = degree_json(v.performance_degree);
  res["monitor_zeros"] = zeros_json(v.monitor_zeros);
  res["performance_zeros"] = zeros_json(v.performance_zeros);
  res["exploitable_zeros"] = zeros_json(v.exploitable);
  if (v.witness) {
    res["witness"] = {{"re", v.witness->lambda.real()},
                      {"im", v.witness->lambda.imag()},
                      {"modulus", std::abs(v.witness->lambda)}};
  }
  (*report)["results"] = res;
  return 0;
}

int cmd_metric(const Scenario& sc, const CliOptions& opt, ordered_json* report) {
  const gtsec::AggregatedSystem sys = gtsec::scenario_system(
      sc, sc.objectives_generated
              ? require_seed(sc.seed, "objectives are drawn from ranges")
              : sc.seed.value_or(0));
  const double epsilon = sc.epsilon > 0.0 ? sc.epsilon : 1.0;
  std::optional<gtsec::MetricMode> mode = sc.mode;
  if (opt.mode == "psd") mode = gtsec::MetricMode::Psd;
  if (opt.mode == "cyclo") mode = gtsec::MetricMode::Cyclo;
  const std::vector<int>& windows =
      opt.oracle_windows.empty() ? sc.oracle_windows : opt.oracle_windows;

  const gtsec::SecurityAnalysis an =
      gtsec::analyze_security(sys, epsilon, mode, windows);

  ordered_json res;
  res["verdict"] = verdict_name(an.verdict.kind);
  res["mode"] = an.metric.mode == gtsec::MetricMode::Psd ? "psd" : "cyclo";
  res["mode_forced"] = an.mode_forced;
  res["cyclo_pattern"] = an.cyclo_pattern;
  res["epsilon"] = epsilon;
  res["unbounded"] = an.metric.outcome.unbounded;
  if (!an.metric.outcome.unbounded) {
    res["value"] = an.metric.outcome.value;
    res["gamma"] = an.metric.gamma;
  }
  res["solver"] = {{"status", status_name(an.metric.solver.status)},
                   {"iterations", an.metric.solver.iterations},
                   {"restricted", an.metric.solver.restricted}};
  ordered_json oracle = ordered_json::array();
  for (const auto& [window, value] : an.oracle)
    oracle.push_back({{"L", window}, {"value", value}});
  res["oracle"] = oracle;
  (*report)["results"] = res;
  return 0;
}

int cmd_design_monitor(const Scenario& sc, ordered_json* report) {
  const std::uint64_t seed =
      sc.objectives_generated
          ? require_seed(sc.seed, "objectives are drawn from ranges")
          : sc.seed.value_or(0);
  const auto objs = gtsec::scenario_objectives(sc, seed);
  const double epsilon = sc.epsilon > 0.0 ? sc.epsilon : 1.0;
  const gtsec::MonitorSweep sweep = gtsec::optimal_monitor(
      sc.net, objs, sc.alpha, sc.weight, gtsec::scenario_belief(sc), epsilon,
      sc.monitor_candidates, sc.scaling);

  ordered_json table = ordered_json::array();
  for (const auto& row : sweep.table) {
    ordered_json e;
    e["node"] = row.node + 1;
    e["expected"] = gamma_json(row.expected);
    ordered_json per = ordered_json::array();
    for (const auto& g : row.per_attacker) per.push_back(gamma_json(g));
    e["per_attacker"] = per;
    table.push_back(e);
  }
  ordered_json res;
  res["winner_node"] = sweep.table[static_cast<std::size_t>(sweep.winner)].node + 1;
  res["epsilon"] = epsilon;
  res["table"] = table;
  (*report)["results"] = res;
  return 0;
}

int cmd_design_edge(const Scenario& sc, ordered_json* report) {
  const std::uint64_t seed =
      sc.objectives_generated
          ? require_seed(sc.seed, "objectives are drawn from ranges")
          : sc.seed.value_or(0);
  const auto objs = gtsec::scenario_objectives(sc, seed);
  const double epsilon = sc.epsilon > 0.0 ? sc.epsilon : 1.0;
  const gtsec::EdgeSweep sweep = gtsec::optimal_edge(
      sc.net, objs, sc.alpha, sc.weight, sc.monitor_node,
      gtsec::scenario_belief(sc), epsilon, sc.edge_candidates, sc.scaling);

  auto kind_name = [](gtsec::EdgeChange::Kind k) {
    switch (k) {
      case gtsec::EdgeChange::Kind::Keep:
        return "keep";
      case gtsec::EdgeChange::Kind::Add:
        return "add";
      case gtsec::EdgeChange::Kind::Remove:
        return "remove";
    }
    return "keep";
  };
  ordered_json table = ordered_json::array();
  for (const auto& row : sweep.table) {
    ordered_json e;
    e["kind"] = kind_name(row.change.kind);
    if (row.change.kind != gtsec::EdgeChange::Kind::Keep) {
      e["u"] = row.change.u + 1;
      e["v"] = row.change.v + 1;
      e["weight"] = row.change.edge_weight;
    }
    e["cost"] = row.change.cost;
    e["security"] = gamma_json(row.security);
    e["total"] = gamma_json(row.total);
    table.push_back(e);
  }
  const auto& win = sweep.table[static_cast<std::size_t>(sweep.winner)];
  ordered_json res;
  res["winner"] = kind_name(win.change.kind);
  if (win.change.kind != gtsec::EdgeChange::Kind::Keep) {
    res["winner_u"] = win.change.u + 1;
    res["winner_v"] = win.change.v + 1;
  }
  res["epsilon"] = epsilon;
  res["table"] = table;
  (*report)["results"] = res;
  return 0;
}

int cmd_sos(const Scenario& sc, ordered_json* report) {
#ifndef GTSEC_WITH_SOS
  (void)sc;
  (void)report;
  throw ScenarioError(
      "this build carries no polynomial analysis (configure with "
      "GTSEC_WITH_SOS=ON)");
#else
  const std::uint64_t seed =
      sc.objectives_generated
          ? require_seed(sc.seed, "objectives are drawn from ranges")
          : sc.seed.value_or(0);
  std::vector<gtsec::Polynomial> objs;
  if (!sc.sos_coefficients.empty()) {
    for (const auto& coeffs : sc.sos_coefficients) {
      gtsec::Polynomial p(1);
      for (std::size_t d = 0; d < coeffs.size(); ++d) {
        if (coeffs[d] == 0.0) continue;
        gtsec::Monomial m(1);
        m.exp[0] = static_cast<int>(d);
        p.add_term(m, coeffs[d]);
      }
      objs.push_back(p);
    }
  } else {
    for (const auto& q : gtsec::scenario_objectives(sc, seed)) {
      gtsec::Polynomial p(1);
      gtsec::Monomial m2(1);
      m2.exp[0] = 2;
      p.add_term(m2, 0.5 * q.Q(0, 0));
      if (q.c(0) != 0.0) {
        gtsec::Monomial m1(1);
        m1.exp[0] = 1;
        p.add_term(m1, q.c(0));
      }
      objs.push_back(p);
    }
  }

  const gtsec::PolySystem ps =
      gtsec::build_poly_system(sc.net, objs, sc.alpha, sc.attack_node,
                               sc.monitor_node, sc.weight[0], sc.scaling);
  const double epsilon = sc.epsilon > 0.0 ? sc.epsilon : 1.0;
  const gtsec::SosBound b =
      gtsec::sos_security_bound(ps, epsilon, sc.sos_basis_degree);

  ordered_json res;
  res["value"] = b.value;
  res["gamma"] = b.gamma;
  res["epsilon"] = epsilon;
  res["basis_degree"] = b.basis_degree;
  res["update_degree"] = ps.update_degree;
  res["delay_levels"] = b.certificate.delay_levels;
  res["solver"] = {{"status", status_name(b.status)},
                   {"iterations", b.iterations}};
  res["certificate"] = {
      {"match_residual", b.certificate.match_residual},
      {"gram_min_eig", b.certificate.gram_min_eig},
      {"storage_min_eig", b.certificate.storage_min_eig},
      {"gram_size", static_cast<int>(b.certificate.gram.rows())},
      {"storage_size", static_cast<int>(b.certificate.storage.rows())}};
  (*report)["results"] = res;
  return 0;
#endif
}

int cmd_calibrate(const Scenario& sc, const CliOptions& opt,
                  ordered_json* report) {
  const std::uint64_t seed =
      require_seed(sc.seed, "calibration runs seeded trials");
  gtsec::AggregatedSystem sys = gtsec::scenario_system(sc, seed);
  const int window = opt.horizon ? *opt.horizon : sc.horizon.value_or(200);

  gtsec::Rng rng(gtsec::derive_seed(seed, "calibrate_x0"));
  const Eigen::VectorXd x0 = rng.unit_vector(sys.state_size());
  sys.kappa = gtsec::calibrate_offset(sys, x0, sc.kappa_k1);
  const double epsilon = gtsec::calibrate_threshold(
      sys, sc.calibration_trials, window, sc.calibration_margin,
      gtsec::derive_seed(seed, "threshold"));

  ordered_json res;
  ordered_json kappa = ordered_json::array();
  for (int i = 0; i < sys.kappa.size(); ++i) kappa.push_back(sys.kappa[i]);
  res["kappa"] = kappa;
  res["epsilon"] = epsilon;
  res["k1"] = sc.kappa_k1;
  res["trials"] = sc.calibration_trials;
  res["margin"] = sc.calibration_margin;
  res["window"] = window;
  (*report)["results"] = res;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"security analysis of gradient-tracking consensus loops"};
  app.require_subcommand(1);
  CliOptions opt;
  const char* names[] = {"simulate",       "analyze",     "metric",
                         "design-monitor", "design-edge", "sos",
                         "calibrate"};
  const char* blurbs[] = {
      "run the closed loop and the detector",
      "classify the loop's exposure to stealthy attacks",
      "solve the security bound",
      "sweep monitor placements",
      "sweep edge modifications",
      "polynomial-cost security bound",
      "calibrate the monitor offset and detector threshold"};
  for (int i = 0; i < 7; ++i) add_common(app.add_subcommand(names[i], blurbs[i]), &opt);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::string text = read_file(opt.config);
    const Scenario base = gtsec::parse_scenario(text, opt.config);

    // Command-line overrides layered onto the file.
    Scenario sc = base;
    if (opt.horizon) sc.horizon = opt.horizon;
    if (!opt.oracle_windows.empty()) sc.oracle_windows = opt.oracle_windows;
    if (opt.seed) sc.seed = opt.seed;

    std::filesystem::create_directories(opt.out);
    ordered_json report = gtsec::report_envelope(
        command, gtsec::config_digest(text), sc.seed.value_or(0));

    int code = 0;
    if (command == "simulate")
      code = cmd_simulate(sc, opt, &report, opt.out);
    else if (command == "analyze")
      code = cmd_analyze(sc, &report);
    else if (command == "metric")
      code = cmd_metric(sc, opt, &report);
    else if (command == "design-monitor")
      code = cmd_design_monitor(sc, &report);
    else if (command == "design-edge")
      code = cmd_design_edge(sc, &report);
    else if (command == "sos")
      code = cmd_sos(sc, &report);
    else
      code = cmd_calibrate(sc, opt, &report);

    report["wall_clock_ms"] =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
    gtsec::write_report(opt.out + "/" + command + ".report.json", report);
    std::cout << report.dump(2) << "\n";
    return code;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
