#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include <Eigen/Dense>

#include "gtsec/system.hpp"
#include "gtsec/zeros.hpp"

using namespace gtsec;

namespace {

SystemTriple make_triple(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c) {
  return SystemTriple{std::move(a), std::move(b), std::move(c)};
}

// Companion pair with poles 0.5 and 0.2; the output row picks the numerator.
SystemTriple companion(double c0, double c1) {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -0.1, 0.7;
  Eigen::MatrixXd b(2, 1);
  b << 0.0, 1.0;
  Eigen::MatrixXd c(1, 2);
  c << c0, c1;
  return make_triple(a, b, c);
}

SystemTriple double_integrator(double c0, double c1) {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, 0.0, 0.0;
  Eigen::MatrixXd b(2, 1);
  b << 0.0, 1.0;
  Eigen::MatrixXd c(1, 2);
  c << c0, c1;
  return make_triple(a, b, c);
}

}  // namespace

TEST_CASE("impulse coefficients and response delay") {
  const auto sys = companion(-1.4, 1.0);
  CHECK(markov_parameter(sys, 0)(0, 0) == doctest::Approx(1.0));
  CHECK(markov_parameter(sys, 1)(0, 0) == doctest::Approx(-0.7));

  CHECK(relative_degree(double_integrator(1.0, 0.0)) == 2);
  CHECK(relative_degree(double_integrator(0.0, 1.0)) == 1);

  // Output decoupled from the input entirely.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 0.5;
  Eigen::MatrixXd b(2, 1);
  b << 0.0, 1.0;
  Eigen::MatrixXd c(1, 2);
  c << 1.0, 0.0;
  CHECK(relative_degree(make_triple(a, b, c)) == kInfiniteDegree);
}

TEST_CASE("the numerator root is found with a certificate") {
  // Transfer (z - 1.4) / ((z - 0.5)(z - 0.2)).
  const auto zeros = invariant_zeros(companion(-1.4, 1.0));
  REQUIRE(zeros.size() == 1);
  const auto& z = zeros[0];
  CHECK(std::abs(z.lambda - std::complex<double>(1.4, 0.0)) <= 1e-6);
  CHECK_FALSE(z.marginal);
  CHECK(z.unstable());
  CHECK(z.residual <= 1e-7 * (z.state_direction.norm() + z.input_direction.norm() + 1.0) * 10.0);
}

TEST_CASE("a root on the unit circle is flagged marginal") {
  const auto zeros = invariant_zeros(companion(-1.0, 1.0));
  REQUIRE(zeros.size() == 1);
  CHECK(std::abs(zeros[0].lambda - std::complex<double>(1.0, 0.0)) <= 1e-6);
  CHECK(zeros[0].marginal);
  CHECK_FALSE(zeros[0].unstable());
}

TEST_CASE("square-down artifacts are filtered out") {
  // Full-state output: the pencil never loses rank, so any root a random
  // output mix produces must be discarded.
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -0.1, 0.7;
  Eigen::MatrixXd b(2, 1);
  b << 0.0, 1.0;
  const auto zeros = invariant_zeros(make_triple(a, b, Eigen::MatrixXd::Identity(2, 2)));
  CHECK(zeros.empty());
}

TEST_CASE("a genuine root survives every output mix") {
  const auto base = companion(-1.4, 1.0);
  Eigen::MatrixXd stacked(2, 2);
  stacked.row(0) = base.C.row(0);
  stacked.row(1) = 0.5 * base.C.row(0);
  const auto zeros = invariant_zeros(make_triple(base.A, base.B, stacked));
  REQUIRE(zeros.size() == 1);
  CHECK(std::abs(zeros[0].lambda - std::complex<double>(1.4, 0.0)) <= 1e-6);
}

TEST_CASE("wide channels are rejected") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2) * 0.5;
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd c(1, 2);
  c << 1.0, 0.0;
  CHECK_THROWS_AS(invariant_zeros(make_triple(a, b, c)), std::invalid_argument);
}

TEST_CASE("classification covers all three outcomes") {
  const auto unstable_zero = companion(-1.4, 1.0);  // zero at 1.4
  const auto origin_zero = companion(0.0, 1.0);     // zero at 0
  const auto slow = companion(1.0, 0.0);            // no finite zero, delay 2

  SUBCASE("an unshared unstable root wins") {
    const auto v = classify(unstable_zero, origin_zero);
    CHECK(v.kind == AttackClass::UnboundedViaZero);
    REQUIRE(v.witness.has_value());
    CHECK(std::abs(v.witness->lambda - std::complex<double>(1.4, 0.0)) <= 1e-6);
    CHECK(v.exploitable.size() == 1);
  }
  SUBCASE("a later monitor response wins next") {
    const auto v = classify(slow, origin_zero);
    CHECK(v.kind == AttackClass::UnboundedViaDegree);
    CHECK(v.monitor_degree == 2);
    CHECK(v.performance_degree == 1);
    CHECK(v.exploitable.empty());
  }
  SUBCASE("identical channels leave a bounded candidate") {
    const auto v = classify(origin_zero, origin_zero);
    CHECK(v.kind == AttackClass::BoundedCandidate);
    CHECK(v.exploitable.empty());
  }
}

TEST_CASE("geometric attack samples follow the frozen powers") {
  InvariantZero z;
  z.lambda = {1.4, 0.0};
  z.state_direction = Eigen::VectorXcd::Zero(2);
  z.state_direction << std::complex<double>(1.0, 0.0), std::complex<double>(1.4, 0.0);
  z.input_direction = Eigen::VectorXcd::Constant(1, std::complex<double>(1.0, 0.0));
  const auto a = zero_dynamics_attack(z, 2, 1.0, 2);
  REQUIRE(a.samples.cols() == 3);
  CHECK(a.samples(0, 0) == doctest::Approx(1.0));
  CHECK(a.samples(0, 1) == doctest::Approx(1.4));
  CHECK(a.samples(0, 2) == doctest::Approx(1.96));
  CHECK(a.initial_state[0] == doctest::Approx(1.0));
  CHECK(a.initial_state[1] == doctest::Approx(1.4));
}

TEST_CASE("the computed root drives the output silently while the state grows") {
  const auto sys = companion(-1.4, 1.0);
  const auto zeros = invariant_zeros(sys);
  REQUIRE(zeros.size() == 1);
  const auto attack = zero_dynamics_attack(zeros[0], 2, 1.0, 20);

  Eigen::VectorXd x = attack.initial_state;
  double worst_output = 0.0;
  for (int k = 0; k <= 20; ++k) {
    worst_output = std::max(worst_output, (sys.C * x).cwiseAbs().maxCoeff());
    x = sys.A * x + sys.B * attack.samples.col(k);
  }
  CHECK(worst_output <= 1e-8 * std::max(1.0, x.norm()));
  CHECK(x.norm() >= 100.0 * attack.initial_state.norm());
}

TEST_CASE("terminal push stays quiet until the last delay steps") {
  const auto a = terminal_step_attack(1, 5, 2, 7.0);
  REQUIRE(a.samples.cols() == 6);
  CHECK(a.samples(0, 0) == 0.0);
  CHECK(a.samples(0, 1) == 0.0);
  CHECK(a.samples(0, 2) == 0.0);
  CHECK(a.samples(0, 3) == 0.0);
  CHECK(a.samples(0, 4) == 7.0);
  CHECK(a.samples(0, 5) == 7.0);

  CHECK_THROWS_AS(terminal_step_attack(1, 5, kInfiniteDegree, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(terminal_step_attack(1, 1, 2, 1.0), std::invalid_argument);
}

TEST_CASE("a balanced monitor on the ring leaves no unstable root") {
  std::vector<QuadraticObjective> objs(5);
  for (int i = 0; i < 5; ++i) {
    objs[i].Q = Eigen::MatrixXd::Constant(1, 1, 1.0 + 0.2 * i);
    objs[i].c = Eigen::VectorXd::Constant(1, 0.5 * i - 1.0);
  }
  const auto sys = assemble(Network::ring(5), objs, 0.05, 2, 0, 0.5);
  const auto zeros = invariant_zeros(sys.monitor_triple());
  for (const auto& z : zeros) CHECK_FALSE(z.unstable());
  const int d = relative_degree(sys.monitor_triple());
  CHECK(d >= 1);
  CHECK(d != kInfiniteDegree);
}
