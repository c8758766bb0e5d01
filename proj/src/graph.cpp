#include "gtsec/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "gtsec/tolerances.hpp"

namespace gtsec {
namespace {

Edge make_edge(int u, int v, double weight) {
  if (u > v) std::swap(u, v);
  return Edge{u, v, weight};
}

}  // namespace

Network Network::ring(int n, double weight) {
  if (n < 3) throw std::invalid_argument("ring topology needs at least 3 nodes");
  Network g;
  g.nodes = n;
  for (int i = 0; i < n; ++i) g.edges.push_back(make_edge(i, (i + 1) % n, weight));
  return g;
}

Network Network::path(int n, double weight) {
  if (n < 2) throw std::invalid_argument("path topology needs at least 2 nodes");
  Network g;
  g.nodes = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back(make_edge(i, i + 1, weight));
  return g;
}

Network Network::star(int n, int center, double weight) {
  if (n < 2) throw std::invalid_argument("star topology needs at least 2 nodes");
  if (center < 0 || center >= n) throw std::invalid_argument("star center out of range");
  Network g;
  g.nodes = n;
  for (int i = 0; i < n; ++i)
    if (i != center) g.edges.push_back(make_edge(center, i, weight));
  return g;
}

Network Network::custom(int n, std::vector<Edge> edges) {
  Network g;
  g.nodes = n;
  g.edges.reserve(edges.size());
  for (const Edge& e : edges) g.edges.push_back(make_edge(e.u, e.v, e.weight));
  validate(g);
  return g;
}

bool Network::has_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::any_of(edges.begin(), edges.end(),
                     [&](const Edge& e) { return e.u == u && e.v == v; });
}

Network Network::with_edge(int u, int v, double weight) const {
  if (has_edge(u, v)) throw std::invalid_argument("edge already present");
  Network g = *this;
  g.edges.push_back(make_edge(u, v, weight));
  validate(g);
  return g;
}

Network Network::without_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  Network g = *this;
  const auto it = std::find_if(g.edges.begin(), g.edges.end(),
                               [&](const Edge& e) { return e.u == u && e.v == v; });
  if (it == g.edges.end()) throw std::invalid_argument("edge not present");
  g.edges.erase(it);
  validate(g);  // also rejects a removal that disconnects the graph
  return g;
}

void validate(const Network& g) {
  if (g.nodes <= 0) throw std::invalid_argument("network has no nodes");
  std::vector<std::vector<int>> adj(g.nodes);
  std::vector<std::pair<int, int>> seen;
  for (const Edge& e : g.edges) {
    if (e.u < 0 || e.v < 0 || e.u >= g.nodes || e.v >= g.nodes)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loops are not allowed");
    if (!(e.weight > 0.0))
      throw std::invalid_argument("edge weights must be strictly positive");
    const std::pair<int, int> key{std::min(e.u, e.v), std::max(e.u, e.v)};
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw std::invalid_argument("duplicate edge " + std::to_string(key.first + 1) +
                                  "-" + std::to_string(key.second + 1));
    seen.push_back(key);
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  // Connectivity by breadth-first sweep from node 0.
  std::vector<char> visited(g.nodes, 0);
  std::vector<int> queue{0};
  visited[0] = 1;
  while (!queue.empty()) {
    const int u = queue.back();
    queue.pop_back();
    for (int v : adj[u])
      if (!visited[v]) {
        visited[v] = 1;
        queue.push_back(v);
      }
  }
  if (std::find(visited.begin(), visited.end(), 0) != visited.end())
    throw std::invalid_argument("network must be connected");
}

Eigen::MatrixXd weighted_laplacian(const Network& g) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(g.nodes, g.nodes);
  for (const Edge& e : g.edges) {
    l(e.u, e.u) += e.weight;
    l(e.v, e.v) += e.weight;
    l(e.u, e.v) -= e.weight;
    l(e.v, e.u) -= e.weight;
  }
  return l;
}

Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& m, int dim) {
  if (dim == 1) return m;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows() * dim, m.cols() * dim);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0)
        out.block(i * dim, j * dim, dim, dim) =
            m(i, j) * Eigen::MatrixXd::Identity(dim, dim);
  return out;
}

ConsensusMatrix consensus_matrix(const Network& g, int dim, std::optional<double> s) {
  validate(g);
  if (dim < 1) throw std::invalid_argument("state dimension must be positive");
  const Eigen::MatrixXd l = weighted_laplacian(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("laplacian eigendecomposition failed");
  const double lmax = eig.eigenvalues().maxCoeff();
  double scale = 0.0;
  if (s) {
    if (!(*s > 0.0)) throw std::invalid_argument("consensus scaling must be positive");
    scale = *s;
  } else {
    scale = 0.9 / lmax;
  }
  ConsensusMatrix out;
  out.scaling = scale;
  out.spectral_radius = scale * lmax;
  if (!(out.spectral_radius < 1.0))
    throw std::invalid_argument(
        "consensus spectral radius " + std::to_string(out.spectral_radius) +
        " is not below 1; lower the scaling (auto picks 0.9/lambda_max)");
  out.K = kron_identity(scale * l, dim);
  // Construction gives symmetry and zero column sums up to roundoff; the
  // checks below pin the tolerance contract rather than guard a bug.
  const Tolerances tol = Tolerances::active();
  const double asym = (out.K - out.K.transpose()).cwiseAbs().maxCoeff();
  const double colsum = out.K.colwise().sum().cwiseAbs().maxCoeff();
  if (asym > tol.laplacian_slack || colsum > tol.laplacian_slack)
    throw std::runtime_error("consensus matrix invariants violated");
  return out;
}

}  // namespace gtsec
