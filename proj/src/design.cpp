#include "gtsec/design.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "gtsec/tolerances.hpp"

namespace gtsec {
namespace {

// Strict comparison with a relative tie band: returns true when a is
// decisively smaller than b.
bool decisively_less(const GammaExt& a, const GammaExt& b, double tie_rel) {
  if (a.unbounded) return false;
  if (b.unbounded) return true;
  const double band = tie_rel * std::max({1.0, std::abs(a.value), std::abs(b.value)});
  return a.value < b.value - band;
}

GammaExt evaluate_pair(const Network& net, const std::vector<QuadraticObjective>& objs,
                       double alpha, const Eigen::VectorXd& weight, int attack_node,
                       int monitor_node, double epsilon,
                       std::optional<double> scaling, const ZeroOptions& zopts,
                       const SdpOptions& sopts) {
  const AggregatedSystem sys =
      assemble(net, objs, alpha, attack_node, monitor_node, weight, scaling);
  const SecurityAnalysis an = analyze_security(sys, epsilon, std::nullopt, {}, zopts, sopts);
  if (an.metric.outcome.unbounded) return GammaExt::infinite();
  return GammaExt::finite(an.metric.outcome.value);
}

void check_belief(const AttackBelief& belief, int nodes) {
  if (belief.nodes.empty()) throw std::invalid_argument("belief lists no attack nodes");
  if (belief.nodes.size() != belief.weights.size())
    throw std::invalid_argument("belief nodes and weights differ in length");
  for (int v : belief.nodes)
    if (v < 0 || v >= nodes) throw std::invalid_argument("belief node out of range");
  for (double w : belief.weights)
    if (!(w >= 0.0)) throw std::invalid_argument("belief weights must be nonnegative");
}

}  // namespace

GammaExt weighted_sum(const std::vector<GammaExt>& parts,
                      const std::vector<double>& weights) {
  if (parts.size() != weights.size())
    throw std::invalid_argument("weight count does not match the summands");
  for (double w : weights)
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
  GammaExt acc = GammaExt::finite(0.0);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (weights[i] == 0.0) continue;  // zero belief silences even an unbounded term
    if (parts[i].unbounded) return GammaExt::infinite();
    acc.value += weights[i] * parts[i].value;
  }
  return acc;
}

MonitorSweep optimal_monitor(const Network& net,
                             const std::vector<QuadraticObjective>& objs,
                             double alpha, const Eigen::VectorXd& weight,
                             const AttackBelief& belief, double epsilon,
                             std::vector<int> candidates,
                             std::optional<double> scaling,
                             const ZeroOptions& zopts, const SdpOptions& sopts) {
  check_belief(belief, net.nodes);
  if (net.nodes == 1) {
    // A lone agent has no peers to drift from; monitoring it is free and
    // nothing is at stake.
    MonitorSweep sweep;
    MonitorChoice only;
    only.node = 0;
    only.per_attacker.assign(belief.nodes.size(), GammaExt::finite(0.0));
    only.expected = GammaExt::finite(0.0);
    sweep.table.push_back(std::move(only));
    sweep.winner = 0;
    return sweep;
  }
  if (candidates.empty()) {
    candidates.resize(net.nodes);
    std::iota(candidates.begin(), candidates.end(), 0);
  }
  for (int c : candidates)
    if (c < 0 || c >= net.nodes)
      throw std::invalid_argument("monitor candidate out of range");

  const Tolerances tol = Tolerances::active();
  MonitorSweep sweep;
  sweep.table.reserve(candidates.size());
  for (int vm : candidates) {
    MonitorChoice choice;
    choice.node = vm;
    for (int va : belief.nodes)
      choice.per_attacker.push_back(evaluate_pair(net, objs, alpha, weight, va, vm,
                                                  epsilon, scaling, zopts, sopts));
    choice.expected = weighted_sum(choice.per_attacker, belief.weights);
    sweep.table.push_back(std::move(choice));
  }

  // Winner by node order so a permuted candidate list picks the same node.
  std::vector<std::size_t> order(sweep.table.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sweep.table[a].node < sweep.table[b].node;
  });
  std::size_t best = order.front();
  for (std::size_t i : order)
    if (decisively_less(sweep.table[i].expected, sweep.table[best].expected,
                        tol.design_tie_rel))
      best = i;
  sweep.winner = static_cast<int>(best);
  return sweep;
}

EdgeSweep optimal_edge(const Network& net,
                       const std::vector<QuadraticObjective>& objs, double alpha,
                       const Eigen::VectorXd& weight, int monitor_node,
                       const AttackBelief& belief, double epsilon,
                       const std::vector<EdgeChange>& candidates,
                       std::optional<double> scaling, const ZeroOptions& zopts,
                       const SdpOptions& sopts) {
  check_belief(belief, net.nodes);

  auto security_of = [&](const Network& g) {
    std::vector<GammaExt> parts;
    for (int va : belief.nodes)
      parts.push_back(evaluate_pair(g, objs, alpha, weight, va, monitor_node, epsilon,
                                    scaling, zopts, sopts));
    return weighted_sum(parts, belief.weights);
  };

  EdgeSweep sweep;
  {
    EdgeChoice base;
    base.change.kind = EdgeChange::Kind::Keep;
    base.security = security_of(net);
    base.total = base.security;  // keeping the graph costs nothing
    sweep.table.push_back(std::move(base));
  }
  for (const EdgeChange& ch : candidates) {
    if (ch.kind == EdgeChange::Kind::Keep)
      throw std::invalid_argument("candidate list may not contain the baseline");
    if (!(ch.cost >= 0.0))
      throw std::invalid_argument("modification cost must be nonnegative");
    Network g = ch.kind == EdgeChange::Kind::Add
                    ? net.with_edge(ch.u, ch.v, ch.edge_weight)
                    : net.without_edge(ch.u, ch.v);
    EdgeChoice choice;
    choice.change = ch;
    choice.security = security_of(g);
    choice.total = choice.security.unbounded
                       ? GammaExt::infinite()
                       : GammaExt::finite(choice.security.value + ch.cost);
    sweep.table.push_back(std::move(choice));
  }

  // Canonical order: baseline, then candidates sorted by endpoints and
  // kind, so a shuffled input cannot change the tie-break.
  const Tolerances tol = Tolerances::active();
  std::vector<std::size_t> order(sweep.table.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (a == 0 || b == 0) return a < b;
    const EdgeChange& ca = sweep.table[a].change;
    const EdgeChange& cb = sweep.table[b].change;
    const auto ka = std::make_tuple(std::min(ca.u, ca.v), std::max(ca.u, ca.v),
                                    static_cast<int>(ca.kind), ca.cost);
    const auto kb = std::make_tuple(std::min(cb.u, cb.v), std::max(cb.u, cb.v),
                                    static_cast<int>(cb.kind), cb.cost);
    return ka < kb;
  });
  std::size_t best = order.front();
  for (std::size_t i : order)
    if (decisively_less(sweep.table[i].total, sweep.table[best].total,
                        tol.design_tie_rel))
      best = i;
  sweep.winner = static_cast<int>(best);
  return sweep;
}

}  // namespace gtsec
