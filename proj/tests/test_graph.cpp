#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gtsec/graph.hpp"
#include "gtsec/rng.hpp"

using namespace gtsec;

TEST_CASE("three-node ring with unit weights and explicit scaling") {
  const auto cm = consensus_matrix(Network::ring(3), 1, 0.25);
  Eigen::MatrixXd expect(3, 3);
  expect << 0.5, -0.25, -0.25, -0.25, 0.5, -0.25, -0.25, -0.25, 0.5;
  CHECK((cm.K - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(cm.scaling == 0.25);
  CHECK(cm.spectral_radius == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("two-node path with explicit scaling") {
  const auto cm = consensus_matrix(Network::path(2), 1, 0.4);
  Eigen::MatrixXd expect(2, 2);
  expect << 0.4, -0.4, -0.4, 0.4;
  CHECK((cm.K - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("auto scaling lands the spectral radius on 0.9") {
  const auto cm = consensus_matrix(Network::ring(10), 1);

  // Independent check by power iteration on K itself.
  Rng rng(123);
  Eigen::VectorXd v = rng.unit_vector(10);
  double lambda = 0.0;
  for (int i = 0; i < 600; ++i) {
    const Eigen::VectorXd w = cm.K * v;
    lambda = w.norm();
    v = w / lambda;
  }
  CHECK(lambda == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(cm.spectral_radius == doctest::Approx(0.9).epsilon(1e-9));
}

TEST_CASE("consensus invariants hold on an irregular weighted graph") {
  const auto net = Network::custom(
      5, {{0, 1, 0.3}, {1, 2, 2.0}, {2, 3, 0.7}, {3, 4, 1.1}, {0, 4, 0.2}, {1, 3, 0.9}});
  const auto cm = consensus_matrix(net, 2);
  CHECK((cm.K - cm.K.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(cm.K.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(cm.spectral_radius < 1.0);
  CHECK(cm.K.rows() == 10);
}

TEST_CASE("kron with the identity expands blockwise") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Eigen::MatrixXd k = kron_identity(m, 2);
  CHECK(k(0, 0) == 1.0);
  CHECK(k(1, 1) == 1.0);
  CHECK(k(0, 2) == 2.0);
  CHECK(k(1, 3) == 2.0);
  CHECK(k(2, 0) == 3.0);
  CHECK(k(3, 3) == 4.0);
  CHECK(k(0, 1) == 0.0);
  CHECK(k(2, 1) == 0.0);
}

TEST_CASE("invalid graphs are rejected with clear errors") {
  CHECK_THROWS_AS(validate(Network{3, {{0, 1, 1.0}}}), std::invalid_argument);  // disconnected
  CHECK_THROWS_AS(Network::custom(3, {{0, 0, 1.0}}), std::invalid_argument);   // self loop
  CHECK_THROWS_AS(Network::custom(3, {{0, 1, 1.0}, {1, 0, 2.0}, {1, 2, 1.0}}),
                  std::invalid_argument);  // duplicate
  CHECK_THROWS_AS(Network::custom(2, {{0, 1, -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Network::custom(2, {{0, 3, 1.0}}), std::invalid_argument);
}

TEST_CASE("an explicit scaling past radius one is rejected") {
  // The even ring's largest laplacian eigenvalue is 4, so 0.26 overshoots.
  CHECK_THROWS_AS(consensus_matrix(Network::ring(10), 1, 0.26), std::invalid_argument);
  CHECK_NOTHROW(consensus_matrix(Network::ring(10), 1, 0.24));
}

TEST_CASE("edge edits preserve validity") {
  const auto ring = Network::ring(4);
  const auto more = ring.with_edge(0, 2, 1.0);
  CHECK(more.has_edge(0, 2));
  const auto less = more.without_edge(0, 2);
  CHECK(!less.has_edge(0, 2));
  CHECK_THROWS_AS(Network::path(3).without_edge(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ring.with_edge(0, 1, 1.0), std::invalid_argument);
}
