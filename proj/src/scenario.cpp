#include "gtsec/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gtsec/rng.hpp"

namespace gtsec {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& what) {
  throw ScenarioError(origin + ": " + (path.empty() ? "document" : path) +
                      ": " + what);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void reject_unknown(const json& obj, const std::string& origin,
                    const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known) fail(origin, join(path, item.key()), "unknown key");
  }
}

const json& field(const json& obj, const std::string& origin,
                  const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(origin, join(path, key), "missing");
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& object_at(const json& obj, const std::string& origin,
                      const std::string& path, const char* key) {
  const json& v = field(obj, origin, path, key);
  if (!v.is_object()) fail(origin, join(path, key), "expected an object");
  return v;
}

double number_at(const json& v, const std::string& origin,
                 const std::string& path) {
  if (!v.is_number()) fail(origin, path, "expected a number");
  return v.get<double>();
}

int integer_at(const json& v, const std::string& origin,
               const std::string& path) {
  if (!v.is_number_integer()) fail(origin, path, "expected an integer");
  return v.get<int>();
}

std::uint64_t seed_at(const json& v, const std::string& origin,
                      const std::string& path) {
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<long long>() < 0))
    fail(origin, path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string string_at(const json& v, const std::string& origin,
                      const std::string& path) {
  if (!v.is_string()) fail(origin, path, "expected a string");
  return v.get<std::string>();
}

// 1-based node index from the file, returned 0-based.
int node_at(const json& v, const std::string& origin, const std::string& path,
            int nodes) {
  const int raw = integer_at(v, origin, path);
  if (raw < 1 || raw > nodes)
    fail(origin, path,
         "node " + std::to_string(raw) + " outside 1.." + std::to_string(nodes));
  return raw - 1;
}

std::pair<double, double> range_at(const json& v, const std::string& origin,
                                   const std::string& path) {
  if (!v.is_array() || v.size() != 2)
    fail(origin, path, "expected [lo, hi]");
  const double lo = number_at(v[0], origin, path + "[0]");
  const double hi = number_at(v[1], origin, path + "[1]");
  if (!(lo <= hi)) fail(origin, path, "range is empty");
  return {lo, hi};
}

Network parse_graph(const json& g, const std::string& origin,
                    const std::string& path, std::optional<double>* scaling) {
  reject_unknown(g, origin, path,
                 {"type", "N", "edges", "weights", "center", "edge_weight",
                  "scaling"});
  const std::string type = string_at(field(g, origin, path, "type"), origin,
                                     join(path, "type"));
  const int n = integer_at(field(g, origin, path, "N"), origin, join(path, "N"));
  if (n < 1) fail(origin, join(path, "N"), "expected a positive agent count");

  if (const json* s = optional_field(g, "scaling")) {
    if (s->is_string()) {
      if (s->get<std::string>() != "auto")
        fail(origin, join(path, "scaling"), "expected a number or \"auto\"");
    } else {
      const double v = number_at(*s, origin, join(path, "scaling"));
      if (!(v > 0.0)) fail(origin, join(path, "scaling"), "must be positive");
      *scaling = v;
    }
  }

  double uniform = 1.0;
  if (const json* w = optional_field(g, "edge_weight")) {
    if (type == "custom")
      fail(origin, join(path, "edge_weight"),
           "custom graphs take per-edge weights");
    uniform = number_at(*w, origin, join(path, "edge_weight"));
    if (!(uniform > 0.0)) fail(origin, join(path, "edge_weight"), "must be positive");
  }

  try {
    if (type == "ring") return Network::ring(n, uniform);
    if (type == "path") return Network::path(n, uniform);
    if (type == "star") {
      int center = 0;
      if (const json* c = optional_field(g, "center"))
        center = node_at(*c, origin, join(path, "center"), n);
      return Network::star(n, center, uniform);
    }
    if (type != "custom")
      fail(origin, join(path, "type"),
           "expected one of ring, path, star, custom");

    const json& ed = field(g, origin, path, "edges");
    if (!ed.is_array()) fail(origin, join(path, "edges"), "expected an array");
    const json* wt = optional_field(g, "weights");
    if (wt && (!wt->is_array() || wt->size() != ed.size()))
      fail(origin, join(path, "weights"),
           "expected one weight per edge");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < ed.size(); ++i) {
      const std::string epath = join(path, "edges[" + std::to_string(i) + "]");
      const json& e = ed[i];
      if (!e.is_array() || e.size() != 2)
        fail(origin, epath, "expected [u, v]");
      Edge edge;
      edge.u = node_at(e[0], origin, epath + "[0]", n);
      edge.v = node_at(e[1], origin, epath + "[1]", n);
      if (wt) {
        edge.weight = number_at((*wt)[i], origin,
                                join(path, "weights[" + std::to_string(i) + "]"));
        if (!(edge.weight > 0.0))
          fail(origin, join(path, "weights[" + std::to_string(i) + "]"),
               "must be positive");
      }
      edges.push_back(edge);
    }
    return Network::custom(n, std::move(edges));
  } catch (const std::invalid_argument& e) {
    fail(origin, path, e.what());
  }
}

void parse_objectives(const json& o, const std::string& origin,
                      const std::string& path, int agents, Scenario* sc) {
  reject_unknown(o, origin, path, {"n", "seed", "Q_range", "c_range", "Q", "c"});
  if (const json* n = optional_field(o, "n")) {
    if (integer_at(*n, origin, join(path, "n")) != 1)
      fail(origin, join(path, "n"), "only scalar agent states are supported");
  }

  const bool has_ranges = optional_field(o, "Q_range") || optional_field(o, "c_range");
  const bool has_explicit = optional_field(o, "Q") || optional_field(o, "c");
  if (has_ranges && has_explicit)
    fail(origin, path, "give either Q_range/c_range or explicit Q/c, not both");

  if (has_explicit) {
    const json& q = field(o, origin, path, "Q");
    if (!q.is_array() || static_cast<int>(q.size()) != agents)
      fail(origin, join(path, "Q"), "expected one curvature per agent");
    const json* c = optional_field(o, "c");
    if (c && (!c->is_array() || static_cast<int>(c->size()) != agents))
      fail(origin, join(path, "c"), "expected one offset per agent");
    sc->objectives.resize(static_cast<std::size_t>(agents));
    for (int i = 0; i < agents; ++i) {
      const double qv = number_at(q[static_cast<std::size_t>(i)], origin,
                                  join(path, "Q[" + std::to_string(i) + "]"));
      if (qv < 0.0)
        fail(origin, join(path, "Q[" + std::to_string(i) + "]"),
             "curvature must be nonnegative");
      auto& obj = sc->objectives[static_cast<std::size_t>(i)];
      obj.Q = Eigen::MatrixXd::Constant(1, 1, qv);
      obj.c = Eigen::VectorXd::Constant(
          1, c ? number_at((*c)[static_cast<std::size_t>(i)], origin,
                           join(path, "c[" + std::to_string(i) + "]"))
               : 0.0);
    }
    return;
  }

  sc->objectives_generated = true;
  std::tie(sc->q_lo, sc->q_hi) =
      range_at(field(o, origin, path, "Q_range"), origin, join(path, "Q_range"));
  if (sc->q_lo < 0.0) fail(origin, join(path, "Q_range"), "curvature must be nonnegative");
  std::tie(sc->c_lo, sc->c_hi) =
      range_at(field(o, origin, path, "c_range"), origin, join(path, "c_range"));
  if (const json* s = optional_field(o, "seed"))
    sc->objective_seed = seed_at(*s, origin, join(path, "seed"));
}

void parse_attack(const json& a, const std::string& origin,
                  const std::string& path, int agents, Scenario* sc) {
  reject_unknown(a, origin, path, {"node", "kind", "scale", "beta"});
  sc->attack_node = node_at(field(a, origin, path, "node"), origin,
                            join(path, "node"), agents);
  if (const json* k = optional_field(a, "kind")) {
    const std::string kind = string_at(*k, origin, join(path, "kind"));
    if (kind == "none")
      sc->attack_kind = AttackKind::None;
    else if (kind == "zero-dynamics")
      sc->attack_kind = AttackKind::ZeroDynamics;
    else if (kind == "terminal-step")
      sc->attack_kind = AttackKind::TerminalStep;
    else
      fail(origin, join(path, "kind"),
           "expected one of none, zero-dynamics, terminal-step");
  }
  if (const json* s = optional_field(a, "scale")) {
    sc->attack_scale = number_at(*s, origin, join(path, "scale"));
    if (!(sc->attack_scale > 0.0)) fail(origin, join(path, "scale"), "must be positive");
  }
  if (const json* b = optional_field(a, "beta"))
    sc->attack_beta = number_at(*b, origin, join(path, "beta"));
}

void parse_monitor(const json& m, const std::string& origin,
                   const std::string& path, int agents, Scenario* sc) {
  reject_unknown(m, origin, path, {"node", "w"});
  sc->monitor_node = node_at(field(m, origin, path, "node"), origin,
                             join(path, "node"), agents);
  const json& w = field(m, origin, path, "w");
  std::vector<double> entries;
  if (w.is_array()) {
    for (std::size_t i = 0; i < w.size(); ++i)
      entries.push_back(number_at(w[i], origin,
                                  join(path, "w[" + std::to_string(i) + "]")));
    if (entries.size() != 1)
      fail(origin, join(path, "w"), "expected one weight per coordinate");
  } else {
    entries.push_back(number_at(w, origin, join(path, "w")));
  }
  for (double v : entries)
    if (v < 0.0 || v > 1.0) fail(origin, join(path, "w"), "weights live in [0, 1]");
  sc->weight = Eigen::Map<Eigen::VectorXd>(entries.data(),
                                           static_cast<int>(entries.size()));
}

void parse_detector(const json& d, const std::string& origin,
                    const std::string& path, Scenario* sc) {
  reject_unknown(d, origin, path, {"epsilon", "kappa_k1", "trials", "margin"});
  if (const json* e = optional_field(d, "epsilon")) {
    sc->epsilon = number_at(*e, origin, join(path, "epsilon"));
    if (sc->epsilon < 0.0) fail(origin, join(path, "epsilon"), "must be nonnegative");
  }
  if (const json* k = optional_field(d, "kappa_k1")) {
    sc->kappa_k1 = integer_at(*k, origin, join(path, "kappa_k1"));
    if (sc->kappa_k1 < 1) fail(origin, join(path, "kappa_k1"), "must be at least 1");
  }
  if (const json* t = optional_field(d, "trials")) {
    sc->calibration_trials = integer_at(*t, origin, join(path, "trials"));
    if (sc->calibration_trials < 1) fail(origin, join(path, "trials"), "must be at least 1");
  }
  if (const json* m = optional_field(d, "margin")) {
    sc->calibration_margin = number_at(*m, origin, join(path, "margin"));
    if (sc->calibration_margin < 1.0)
      fail(origin, join(path, "margin"), "must be at least 1");
  }
}

void parse_belief(const json& b, const std::string& origin,
                  const std::string& path, int agents, Scenario* sc) {
  reject_unknown(b, origin, path, {"nodes", "weights"});
  const json& nodes = field(b, origin, path, "nodes");
  const json& weights = field(b, origin, path, "weights");
  if (!nodes.is_array() || nodes.empty())
    fail(origin, join(path, "nodes"), "expected a nonempty array");
  if (!weights.is_array() || weights.size() != nodes.size())
    fail(origin, join(path, "weights"), "expected one weight per node");
  std::set<int> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int v = node_at(nodes[i], origin,
                          join(path, "nodes[" + std::to_string(i) + "]"), agents);
    if (!seen.insert(v).second)
      fail(origin, join(path, "nodes[" + std::to_string(i) + "]"),
           "node listed twice");
    const double w = number_at(weights[i], origin,
                               join(path, "weights[" + std::to_string(i) + "]"));
    if (w < 0.0)
      fail(origin, join(path, "weights[" + std::to_string(i) + "]"),
           "must be nonnegative");
    sc->belief.nodes.push_back(v);
    sc->belief.weights.push_back(w);
    total += w;
  }
  if (!(total > 0.0)) fail(origin, join(path, "weights"), "all weights are zero");
}

void parse_edge_candidates(const json& arr, const std::string& origin,
                           const std::string& path, int agents, Scenario* sc) {
  if (!arr.is_array()) fail(origin, path, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string epath = path + "[" + std::to_string(i) + "]";
    const json& e = arr[i];
    if (!e.is_object()) fail(origin, epath, "expected an object");
    reject_unknown(e, origin, epath, {"u", "v", "kind", "weight", "cost"});
    EdgeChange c;
    c.u = node_at(field(e, origin, epath, "u"), origin, join(epath, "u"), agents);
    c.v = node_at(field(e, origin, epath, "v"), origin, join(epath, "v"), agents);
    if (c.u == c.v) fail(origin, epath, "endpoints coincide");
    const std::string kind = string_at(field(e, origin, epath, "kind"), origin,
                                       join(epath, "kind"));
    if (kind == "add")
      c.kind = EdgeChange::Kind::Add;
    else if (kind == "remove")
      c.kind = EdgeChange::Kind::Remove;
    else
      fail(origin, join(epath, "kind"), "expected add or remove");
    if (const json* w = optional_field(e, "weight")) {
      c.edge_weight = number_at(*w, origin, join(epath, "weight"));
      if (!(c.edge_weight > 0.0)) fail(origin, join(epath, "weight"), "must be positive");
    }
    if (const json* cost = optional_field(e, "cost")) {
      c.cost = number_at(*cost, origin, join(epath, "cost"));
      if (c.cost < 0.0) fail(origin, join(epath, "cost"), "must be nonnegative");
    }
    sc->edge_candidates.push_back(c);
  }
}

void parse_sos(const json& s, const std::string& origin, const std::string& path,
               int agents, Scenario* sc) {
  reject_unknown(s, origin, path, {"objectives", "basis_degree"});
  if (const json* o = optional_field(s, "objectives")) {
    if (!o->is_array() || static_cast<int>(o->size()) != agents)
      fail(origin, join(path, "objectives"),
           "expected one coefficient list per agent");
    for (std::size_t i = 0; i < o->size(); ++i) {
      const std::string cpath =
          join(path, "objectives[" + std::to_string(i) + "]");
      const json& coeffs = (*o)[i];
      if (!coeffs.is_array() || coeffs.empty())
        fail(origin, cpath, "expected a nonempty coefficient array");
      if (coeffs.size() > 5)
        fail(origin, cpath, "cost degree is capped at 4");
      std::vector<double> list;
      for (std::size_t d = 0; d < coeffs.size(); ++d)
        list.push_back(number_at(coeffs[d], origin,
                                 cpath + "[" + std::to_string(d) + "]"));
      sc->sos_coefficients.push_back(std::move(list));
    }
  }
  if (const json* d = optional_field(s, "basis_degree")) {
    sc->sos_basis_degree = integer_at(*d, origin, join(path, "basis_degree"));
    if (sc->sos_basis_degree < 0)
      fail(origin, join(path, "basis_degree"), "must be nonnegative");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
  if (!doc.is_object()) fail(origin, "", "expected a top-level object");
  reject_unknown(doc, origin, "",
                 {"graph", "objectives", "alpha", "attack", "monitor",
                  "detector", "horizon", "oracle_L", "mode", "seed", "x0",
                  "x0_perturbation", "belief", "monitor_candidates",
                  "edge_candidates", "sos"});

  Scenario sc;
  sc.net = parse_graph(object_at(doc, origin, "", "graph"), origin, "graph",
                       &sc.scaling);
  const int agents = sc.net.nodes;

  parse_objectives(object_at(doc, origin, "", "objectives"), origin,
                   "objectives", agents, &sc);

  sc.alpha = number_at(field(doc, origin, "", "alpha"), origin, "alpha");
  if (!(sc.alpha > 0.0)) fail(origin, "alpha", "must be positive");

  parse_attack(object_at(doc, origin, "", "attack"), origin, "attack", agents,
               &sc);
  parse_monitor(object_at(doc, origin, "", "monitor"), origin, "monitor",
                agents, &sc);
  if (const json* d = optional_field(doc, "detector"))
    parse_detector(*d, origin, "detector", &sc);

  if (const json* h = optional_field(doc, "horizon")) {
    sc.horizon = integer_at(*h, origin, "horizon");
    if (*sc.horizon < 1) fail(origin, "horizon", "must be at least 1");
  }
  if (const json* o = optional_field(doc, "oracle_L")) {
    if (!o->is_array()) fail(origin, "oracle_L", "expected an array");
    for (std::size_t i = 0; i < o->size(); ++i) {
      const int L = integer_at((*o)[i], origin,
                               "oracle_L[" + std::to_string(i) + "]");
      if (L < 1) fail(origin, "oracle_L[" + std::to_string(i) + "]", "must be at least 1");
      sc.oracle_windows.push_back(L);
    }
  }
  if (const json* m = optional_field(doc, "mode")) {
    const std::string mode = string_at(*m, origin, "mode");
    if (mode == "psd")
      sc.mode = MetricMode::Psd;
    else if (mode == "cyclo")
      sc.mode = MetricMode::Cyclo;
    else
      fail(origin, "mode", "expected psd or cyclo");
  }
  if (const json* s = optional_field(doc, "seed"))
    sc.seed = seed_at(*s, origin, "seed");
  if (const json* x = optional_field(doc, "x0")) {
    sc.x0_policy = string_at(*x, origin, "x0");
    if (sc.x0_policy != "random" && sc.x0_policy != "zero" &&
        sc.x0_policy != "fixed_point")
      fail(origin, "x0", "expected one of random, zero, fixed_point");
  }
  if (const json* p = optional_field(doc, "x0_perturbation")) {
    sc.x0_perturbation = number_at(*p, origin, "x0_perturbation");
    if (sc.x0_perturbation < 0.0)
      fail(origin, "x0_perturbation", "must be nonnegative");
  }

  if (const json* b = optional_field(doc, "belief"))
    parse_belief(*b, origin, "belief", agents, &sc);
  if (const json* mc = optional_field(doc, "monitor_candidates")) {
    if (!mc->is_array() || mc->empty())
      fail(origin, "monitor_candidates", "expected a nonempty array");
    std::set<int> seen;
    for (std::size_t i = 0; i < mc->size(); ++i) {
      const int v = node_at((*mc)[i], origin,
                            "monitor_candidates[" + std::to_string(i) + "]",
                            agents);
      if (!seen.insert(v).second)
        fail(origin, "monitor_candidates[" + std::to_string(i) + "]",
             "node listed twice");
      sc.monitor_candidates.push_back(v);
    }
  }
  if (const json* ec = optional_field(doc, "edge_candidates"))
    parse_edge_candidates(*ec, origin, "edge_candidates", agents, &sc);
  if (const json* s = optional_field(doc, "sos"))
    parse_sos(*s, origin, "sos", agents, &sc);

  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

std::vector<QuadraticObjective> scenario_objectives(const Scenario& sc,
                                                    std::uint64_t master_seed) {
  if (!sc.objectives_generated) return sc.objectives;
  Rng rng(sc.objective_seed ? *sc.objective_seed
                            : derive_seed(master_seed, "objectives"));
  return random_scalar_objectives(sc.net.nodes, rng, sc.q_lo, sc.q_hi, sc.c_lo,
                                  sc.c_hi);
}

AggregatedSystem scenario_system(const Scenario& sc, std::uint64_t master_seed) {
  AggregatedSystem sys =
      assemble(sc.net, scenario_objectives(sc, master_seed), sc.alpha,
               sc.attack_node, sc.monitor_node, sc.weight, sc.scaling);
  sys.epsilon = sc.epsilon;
  return sys;
}

AttackBelief scenario_belief(const Scenario& sc) {
  if (!sc.belief.nodes.empty()) return sc.belief;
  AttackBelief b;
  b.nodes = {sc.attack_node};
  b.weights = {1.0};
  return b;
}

}  // namespace gtsec
