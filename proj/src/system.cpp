#include "gtsec/system.hpp"

#include <stdexcept>
#include <string>

#include "gtsec/tolerances.hpp"

namespace gtsec {

Eigen::MatrixXd performance_matrix(int agents, int dim) {
  if (agents < 2) throw std::invalid_argument("need at least 2 agents for differences");
  const int n = dim, half = agents * n;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero((agents - 1) * n, 2 * half);
  for (int i = 0; i + 1 < agents; ++i) {
    c.block(i * n, i * n, n, n).setIdentity();
    c.block(i * n, (i + 1) * n, n, n) = -Eigen::MatrixXd::Identity(n, n);
  }
  return c;
}

Eigen::MatrixXd monitor_matrix(int agents, int dim, int monitor_node,
                               const Eigen::VectorXd& weight) {
  if (monitor_node < 0 || monitor_node >= agents)
    throw std::invalid_argument("monitor node out of range");
  if (weight.size() != dim) throw std::invalid_argument("monitor weight has wrong length");
  for (Eigen::Index i = 0; i < dim; ++i)
    if (weight[i] < 0.0 || weight[i] > 1.0)
      throw std::invalid_argument("monitor weight must lie in [0, 1]");
  const int n = dim, half = agents * n;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * n, 2 * half);
  for (int i = 0; i < n; ++i) {
    c(i, monitor_node * n + i) = 1.0 - weight[i];
    c(n + i, half + monitor_node * n + i) = weight[i];
  }
  return c;
}

AggregatedSystem assemble(const Network& net,
                          const std::vector<QuadraticObjective>& objs,
                          double alpha, int attack_node, int monitor_node,
                          const Eigen::VectorXd& weight,
                          std::optional<double> scaling) {
  if (static_cast<int>(objs.size()) != net.nodes)
    throw std::invalid_argument("one objective per agent is required");
  if (!(alpha > 0.0)) throw std::invalid_argument("step size must be positive");
  if (attack_node < 0 || attack_node >= net.nodes)
    throw std::invalid_argument("attack node out of range");
  const int n = static_cast<int>(objs.front().c.size());
  validate(objs, n);

  AggregatedSystem sys;
  sys.agents = net.nodes;
  sys.dim = n;
  sys.attack_node = attack_node;
  sys.monitor_node = monitor_node;
  sys.alpha = alpha;
  sys.weight = weight;
  sys.consensus = consensus_matrix(net, n, scaling);

  const int half = sys.agents * n;
  sys.Qblk = Eigen::MatrixXd::Zero(half, half);
  sys.cvec = Eigen::VectorXd::Zero(half);
  for (int i = 0; i < sys.agents; ++i) {
    sys.Qblk.block(i * n, i * n, n, n) = objs[i].Q;
    sys.cvec.segment(i * n, n) = objs[i].c;
  }

  const Eigen::MatrixXd& k = sys.consensus.K;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(half, half);
  sys.A = Eigen::MatrixXd::Zero(2 * half, 2 * half);
  sys.A.topLeftCorner(half, half) = id - k - alpha * sys.Qblk;
  sys.A.topRightCorner(half, half) = -k;
  sys.A.bottomLeftCorner(half, half) = k;
  sys.A.bottomRightCorner(half, half) = id;

  sys.B = Eigen::MatrixXd::Zero(2 * half, n);
  sys.B.block(attack_node * n, 0, n, n).setIdentity();
  sys.B.block(half + attack_node * n, 0, n, n).setIdentity();

  sys.forcing = Eigen::VectorXd::Zero(2 * half);
  sys.forcing.head(half) = -alpha * sys.cvec;

  sys.Cp = performance_matrix(sys.agents, n);
  sys.Cm = monitor_matrix(sys.agents, n, monitor_node, weight);
  sys.kappa = Eigen::VectorXd::Zero(2 * n);
  return sys;
}

AggregatedSystem assemble(const Network& net,
                          const std::vector<QuadraticObjective>& objs,
                          double alpha, int attack_node, int monitor_node,
                          double weight, std::optional<double> scaling) {
  const int n = net.nodes > 0 && !objs.empty() ? static_cast<int>(objs.front().c.size()) : 1;
  return assemble(net, objs, alpha, attack_node, monitor_node,
                  Eigen::VectorXd::Constant(n, weight), scaling);
}

Eigen::VectorXd AggregatedSystem::fixed_point() const {
  const int half = agents * dim;
  std::vector<QuadraticObjective> objs(agents);
  for (int i = 0; i < agents; ++i) {
    objs[i].Q = Qblk.block(i * dim, i * dim, dim, dim);
    objs[i].c = cvec.segment(i * dim, dim);
  }
  const Eigen::VectorXd xstar = global_optimum(objs);
  Eigen::VectorXd x_all(half);
  for (int i = 0; i < agents; ++i) x_all.segment(i * dim, dim) = xstar;

  // Tracker balance: K z = -alpha (Q x_all + c).  The right-hand side is
  // orthogonal to ker(K) = span(1) exactly when x_all is the optimum, so a
  // minimum-norm solve is well posed.
  const Eigen::VectorXd rhs = -alpha * (Qblk * x_all + cvec);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(consensus.K);
  const Eigen::VectorXd z = cod.solve(rhs);
  const Tolerances tol = Tolerances::active();
  if ((consensus.K * z - rhs).norm() > tol.fixed_point * std::max(1.0, rhs.norm()) * 1e2)
    throw std::runtime_error("tracker balance equation is inconsistent");

  Eigen::VectorXd state(2 * half);
  state.head(half) = x_all;
  state.tail(half) = z;
  return state;
}

}  // namespace gtsec
