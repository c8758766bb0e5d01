#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gtsec/metric.hpp"
#include "gtsec/system.hpp"

namespace gtsec {

// Extended value: either a finite bound or "unbounded".  Sums treat an
// unbounded summand as dominant unless its weight is exactly zero, in which
// case it contributes nothing.
struct GammaExt {
  bool unbounded = false;
  double value = 0.0;

  static GammaExt finite(double v) { return {false, v}; }
  static GammaExt infinite() { return {true, 0.0}; }
};

GammaExt weighted_sum(const std::vector<GammaExt>& parts,
                      const std::vector<double>& weights);

// Beliefs about where the attacker sits: nonnegative weight per candidate
// node (0-based), not necessarily normalised.
struct AttackBelief {
  std::vector<int> nodes;
  std::vector<double> weights;
};

struct MonitorChoice {
  int node = 0;  // 0-based
  GammaExt expected;
  std::vector<GammaExt> per_attacker;  // aligned with the belief's nodes
};

struct MonitorSweep {
  std::vector<MonitorChoice> table;  // in candidate order
  int winner = 0;                    // index into table
};

// Evaluates every candidate monitor location against the belief-weighted
// security bound and picks the minimiser.  Finite beats unbounded; exact
// ties (within a relative width) go to the lowest node index, regardless
// of the order candidates were supplied in.
MonitorSweep optimal_monitor(const Network& net,
                             const std::vector<QuadraticObjective>& objs,
                             double alpha, const Eigen::VectorXd& weight,
                             const AttackBelief& belief, double epsilon,
                             std::vector<int> candidates = {},
                             std::optional<double> scaling = std::nullopt,
                             const ZeroOptions& zopts = {},
                             const SdpOptions& sopts = {});

// One candidate modification of the communication graph.
struct EdgeChange {
  enum class Kind { Keep, Add, Remove };
  Kind kind = Kind::Keep;
  int u = 0, v = 0;      // 0-based endpoints (ignored for Keep)
  double edge_weight = 1.0;
  double cost = 0.0;     // modification price phi_i
};

struct EdgeChoice {
  EdgeChange change;
  GammaExt security;  // belief-weighted bound after the change
  GammaExt total;     // security plus modification cost
};

struct EdgeSweep {
  std::vector<EdgeChoice> table;  // baseline first, then candidates in input order
  int winner = 0;                 // index into table (0 = keep the graph)
};

// Compares leaving the graph alone (cost 0) against each candidate edge
// addition or removal.  A removal that disconnects the graph is rejected
// up front.  Tie-breaking matches the monitor sweep: first by total, then
// by position in the canonical candidate ordering.
EdgeSweep optimal_edge(const Network& net,
                       const std::vector<QuadraticObjective>& objs, double alpha,
                       const Eigen::VectorXd& weight, int monitor_node,
                       const AttackBelief& belief, double epsilon,
                       const std::vector<EdgeChange>& candidates,
                       std::optional<double> scaling = std::nullopt,
                       const ZeroOptions& zopts = {},
                       const SdpOptions& sopts = {});

}  // namespace gtsec
