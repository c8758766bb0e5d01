#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gtsec/system.hpp"

using namespace gtsec;

namespace {

std::vector<QuadraticObjective> scalar_objs(std::initializer_list<double> q,
                                            std::initializer_list<double> c) {
  std::vector<QuadraticObjective> out;
  auto qi = q.begin();
  auto ci = c.begin();
  for (; qi != q.end(); ++qi, ++ci) {
    QuadraticObjective o;
    o.Q = Eigen::MatrixXd::Constant(1, 1, *qi);
    o.c = Eigen::VectorXd::Constant(1, *ci);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace

TEST_CASE("two balanced scalar costs meet at one") {
  // 0.5 x^2 + x and 0.5 x^2 - 3x: the sum is minimised at x = 1.
  const auto x = global_optimum(scalar_objs({1.0, 1.0}, {1.0, -3.0}));
  CHECK(x.size() == 1);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a flat aggregate objective is rejected") {
  CHECK_THROWS_AS(global_optimum(scalar_objs({0.0, 0.0}, {1.0, -1.0})),
                  std::invalid_argument);
}

TEST_CASE("difference map reads neighbouring iterates only") {
  const Eigen::MatrixXd cp2 = performance_matrix(2, 1);
  CHECK(cp2.rows() == 1);
  CHECK(cp2.cols() == 4);
  CHECK(cp2(0, 0) == 1.0);
  CHECK(cp2(0, 1) == -1.0);
  CHECK(cp2(0, 2) == 0.0);
  CHECK(cp2(0, 3) == 0.0);

  const Eigen::MatrixXd cp3 = performance_matrix(3, 2);
  CHECK(cp3.rows() == 4);
  CHECK(cp3.cols() == 12);
  CHECK(cp3.block(0, 0, 2, 2).isIdentity(0.0));
  CHECK(cp3.block(0, 2, 2, 2).isApprox(-Eigen::MatrixXd::Identity(2, 2), 0.0));
  CHECK(cp3.block(2, 2, 2, 2).isIdentity(0.0));
  CHECK(cp3.block(2, 4, 2, 2).isApprox(-Eigen::MatrixXd::Identity(2, 2), 0.0));
  CHECK(cp3.rightCols(6).cwiseAbs().maxCoeff() == 0.0);  // trackers invisible
}

TEST_CASE("monitor map weights the iterate and tracker parts") {
  const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd m = monitor_matrix(3, 1, 1, w0);
  CHECK(m.rows() == 2);
  CHECK(m(0, 1) == 1.0);                          // iterate of node 2 fully visible
  CHECK(m.row(1).cwiseAbs().maxCoeff() == 0.0);   // tracker row dark at w = 0

  const Eigen::VectorXd w1 = Eigen::VectorXd::Ones(1);
  m = monitor_matrix(3, 1, 1, w1);
  CHECK(m.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m(1, 4) == 1.0);

  const Eigen::VectorXd wh = Eigen::VectorXd::Constant(1, 0.5);
  m = monitor_matrix(3, 1, 1, wh);
  CHECK(m(0, 1) == 0.5);
  CHECK(m(1, 4) == 0.5);
}

TEST_CASE("attack torque enters both halves at the attacked node") {
  const auto sys = assemble(Network::ring(3), scalar_objs({1, 2, 3}, {1, -3, 0.5}),
                            0.1, 1, 0, 0.5);
  CHECK(sys.B.rows() == 6);
  CHECK(sys.B.cols() == 1);
  CHECK(sys.B(1, 0) == 1.0);
  CHECK(sys.B(4, 0) == 1.0);
  CHECK(sys.B.cwiseAbs().sum() == 2.0);
}

TEST_CASE("loop blocks follow the update law") {
  const double alpha = 0.1;
  const auto sys = assemble(Network::ring(3), scalar_objs({1, 2, 3}, {1, -3, 0.5}),
                            alpha, 1, 0, 0.5, 0.25);
  const Eigen::MatrixXd& k = sys.consensus.K;
  CHECK(sys.A.topLeftCorner(3, 3).isApprox(
      Eigen::MatrixXd::Identity(3, 3) - k - alpha * sys.Qblk.topLeftCorner(3, 3), 1e-15));
  CHECK(sys.A.topRightCorner(3, 3).isApprox(-k, 1e-15));
  CHECK(sys.A.bottomLeftCorner(3, 3).isApprox(k, 1e-15));
  CHECK(sys.A.bottomRightCorner(3, 3).isIdentity(0.0));
  CHECK(sys.forcing.head(3).isApprox(-alpha * sys.cvec, 1e-15));
  CHECK(sys.forcing.tail(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the stationary state is a fixed point of the update") {
  const auto sys = assemble(Network::ring(3), scalar_objs({1, 2, 3}, {1, -3, 0.5}),
                            0.1, 1, 0, 0.5);
  const Eigen::VectorXd xs = sys.fixed_point();
  // All iterates sit at the team optimum -(1 - 3 + 0.5)/6.
  const double opt = -(1.0 - 3.0 + 0.5) / 6.0;
  CHECK(xs[0] == doctest::Approx(opt).epsilon(1e-12));
  CHECK(xs[1] == doctest::Approx(opt).epsilon(1e-12));
  CHECK(xs[2] == doctest::Approx(opt).epsilon(1e-12));
  const Eigen::VectorXd next = sys.A * xs + sys.forcing;
  CHECK((next - xs).norm() <= 1e-10 * std::max(1.0, xs.norm()));
}

TEST_CASE("assembly rejects malformed inputs") {
  const auto objs = scalar_objs({1, 1, 1}, {0, 0, 0});
  CHECK_THROWS_AS(assemble(Network::ring(3), objs, -0.1, 0, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(assemble(Network::ring(3), objs, 0.1, 3, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(assemble(Network::ring(3), objs, 0.1, 0, 5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(assemble(Network::ring(3), objs, 0.1, 0, 0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(assemble(Network::ring(3), scalar_objs({1, 1}, {0, 0}), 0.1, 0, 0, 0.5),
                  std::invalid_argument);
}
