#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "gtsec/rng.hpp"
#include "gtsec/sdp.hpp"

using namespace gtsec;

namespace {

std::vector<Eigen::Triplet<double>> dense_triplets(const Eigen::MatrixXd& f) {
  std::vector<Eigen::Triplet<double>> out;
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j)
      if (f(i, j) != 0.0) out.emplace_back(i, j, f(i, j));
  return out;
}

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::MatrixXd m = rng.normal_matrix(n, n);
  return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("scalar bounds pin the optimum") {
  SdpProblem prob;
  prob.vars.scalars = 1;
  prob.cost = Eigen::VectorXd::Ones(1);
  auto lower = std::make_unique<SparseBlock>(1, Eigen::MatrixXd::Ones(1, 1));
  lower->add_coefficient(0, {{0, 0, 1.0}});
  auto upper = std::make_unique<SparseBlock>(1, Eigen::MatrixXd::Ones(1, 1));
  upper->add_coefficient(0, {{0, 0, -1.0}});
  prob.blocks.push_back(std::move(lower));
  prob.blocks.push_back(std::move(upper));

  auto sol = prob.solve();
  REQUIRE(sol.usable());
  CHECK(sol.objective == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(sol.y[0] == doctest::Approx(-1.0).epsilon(1e-7));

  prob.cost[0] = -1.0;
  sol = prob.solve();
  REQUIRE(sol.usable());
  CHECK(sol.y[0] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("largest eigenvalue as a one-scalar program") {
  const Eigen::MatrixXd s = random_symmetric(5, derive_seed(3, "lmax"));
  SdpProblem prob;
  prob.vars.scalars = 1;
  prob.cost = Eigen::VectorXd::Ones(1);
  auto blk = std::make_unique<SparseBlock>(5, -s);
  std::vector<Eigen::Triplet<double>> id;
  for (int i = 0; i < 5; ++i) id.emplace_back(i, i, 1.0);
  blk->add_coefficient(0, std::move(id));
  prob.blocks.push_back(std::move(blk));

  const auto sol = prob.solve();
  REQUIRE(sol.usable());
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s)
                          .eigenvalues()
                          .maxCoeff();
  CHECK(sol.objective == doctest::Approx(lmax).epsilon(1e-7));
  // The found multiplier touches the constraint.
  const Eigen::MatrixXd slack = sol.y[0] * Eigen::MatrixXd::Identity(5, 5) - s;
  const double eigmin =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(slack).eigenvalues().minCoeff();
  CHECK(std::abs(eigmin) <= 1e-6 * std::max(1.0, std::abs(lmax)));
}

TEST_CASE("generalized eigenvalue bound matches the dense solver") {
  const Eigen::MatrixXd a = random_symmetric(4, derive_seed(5, "gen-a"));
  Rng rng(derive_seed(5, "gen-b"));
  const Eigen::MatrixXd m = rng.normal_matrix(4, 4);
  const Eigen::MatrixXd b =
      m * m.transpose() + Eigen::MatrixXd::Identity(4, 4);

  SdpProblem prob;
  prob.vars.scalars = 1;
  prob.cost = Eigen::VectorXd::Ones(1);
  auto blk = std::make_unique<SparseBlock>(4, -a);
  blk->add_coefficient(0, dense_triplets(b));
  prob.blocks.push_back(std::move(blk));

  const auto sol = prob.solve();
  REQUIRE(sol.usable());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(a, b);
  const double target = ges.eigenvalues().maxCoeff();
  CHECK(sol.objective == doctest::Approx(target).epsilon(1e-7));
}

TEST_CASE("rectangular congruence term with a known optimum") {
  // X = diag(2, 3) + p [1 2]' [1 2]; positivity caps p below at -6/11.
  SdpProblem prob;
  prob.vars.mat_sizes = {1};
  prob.cost = Eigen::VectorXd::Ones(1);
  Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(2, 2);
  c0(0, 0) = 2.0;
  c0(1, 1) = 3.0;
  auto blk = std::make_unique<CongruenceBlock>(2, c0);
  Eigen::MatrixXd g(1, 2);
  g << 1.0, 2.0;
  blk->add_term(0, 1.0, g);
  prob.blocks.push_back(std::move(blk));

  const auto sol = prob.solve();
  REQUIRE(sol.usable());
  CHECK(sol.objective == doctest::Approx(-6.0 / 11.0).epsilon(1e-7));
}

TEST_CASE("matrix and scalar terms combine in one block") {
  // min g subject to S >= I and g I >= S: the optimum is g = 1.
  SdpProblem prob;
  prob.vars.mat_sizes = {2};
  prob.vars.scalars = 1;
  prob.cost = Eigen::VectorXd::Zero(prob.vars.total());
  prob.cost[prob.vars.scalar_offset(0)] = 1.0;

  auto lower = std::make_unique<CongruenceBlock>(2, -Eigen::MatrixXd::Identity(2, 2));
  lower->add_term(0, 1.0, Eigen::MatrixXd::Identity(2, 2));
  auto upper = std::make_unique<CongruenceBlock>(2, Eigen::MatrixXd::Zero(2, 2));
  upper->add_term(0, -1.0, Eigen::MatrixXd::Identity(2, 2));
  upper->add_scalar(0, Eigen::MatrixXd::Identity(2, 2));
  prob.blocks.push_back(std::move(lower));
  prob.blocks.push_back(std::move(upper));

  const auto sol = prob.solve();
  REQUIRE(sol.usable());
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
  const Eigen::MatrixXd s = prob.vars.unpack(sol.y, 0);
  const double smin =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues().minCoeff();
  CHECK(smin >= 1.0 - 1e-6);
}

TEST_CASE("stability certificate exists and both encodings agree") {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 0.3, 0.0, 0.2;

  const auto solve_congruence = [&] {
    SdpProblem prob;
    prob.vars.mat_sizes = {2};
    prob.cost = Eigen::VectorXd::Zero(3);
    prob.cost[SdpVariables::svec_index(0, 0)] = 1.0;
    prob.cost[SdpVariables::svec_index(1, 1)] = 1.0;
    auto floor_blk = std::make_unique<CongruenceBlock>(2, -Eigen::MatrixXd::Identity(2, 2));
    floor_blk->add_term(0, 1.0, Eigen::MatrixXd::Identity(2, 2));
    auto decay = std::make_unique<CongruenceBlock>(2, -0.1 * Eigen::MatrixXd::Identity(2, 2));
    decay->add_term(0, 1.0, Eigen::MatrixXd::Identity(2, 2));
    decay->add_term(0, -1.0, a);
    prob.blocks.push_back(std::move(floor_blk));
    prob.blocks.push_back(std::move(decay));
    return prob.solve();
  };

  const auto solve_sparse = [&] {
    SdpProblem prob;
    prob.vars.mat_sizes = {2};
    prob.cost = Eigen::VectorXd::Zero(3);
    prob.cost[SdpVariables::svec_index(0, 0)] = 1.0;
    prob.cost[SdpVariables::svec_index(1, 1)] = 1.0;
    auto floor_blk = std::make_unique<SparseBlock>(2, -Eigen::MatrixXd::Identity(2, 2));
    auto decay = std::make_unique<SparseBlock>(2, -0.1 * Eigen::MatrixXd::Identity(2, 2));
    for (int k = 0; k < 2; ++k)
      for (int l = k; l < 2; ++l) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2, 2);
        e(k, l) = 1.0;
        e(l, k) = 1.0;
        const int var = SdpVariables::svec_index(k, l);
        floor_blk->add_coefficient(var, dense_triplets(e));
        decay->add_coefficient(var, dense_triplets(e - a.transpose() * e * a));
      }
    prob.blocks.push_back(std::move(floor_blk));
    prob.blocks.push_back(std::move(decay));
    return prob.solve();
  };

  const auto sc = solve_congruence();
  const auto ss = solve_sparse();
  REQUIRE(sc.usable());
  REQUIRE(ss.usable());
  CHECK(sc.objective == doctest::Approx(ss.objective).epsilon(1e-6));

  SdpProblem check;
  check.vars.mat_sizes = {2};
  const Eigen::MatrixXd p = check.vars.unpack(sc.y, 0);
  const auto eig = [](const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
  };
  CHECK(eig(p - Eigen::MatrixXd::Identity(2, 2)) >= -1e-7);
  CHECK(eig(p - a.transpose() * p * a - 0.1 * Eigen::MatrixXd::Identity(2, 2)) >= -1e-7);
}

TEST_CASE("contradictory bounds are reported infeasible") {
  SdpProblem prob;
  prob.vars.scalars = 1;
  prob.cost = Eigen::VectorXd::Ones(1);
  auto lower = std::make_unique<SparseBlock>(1, -Eigen::MatrixXd::Ones(1, 1));
  lower->add_coefficient(0, {{0, 0, 1.0}});
  auto upper = std::make_unique<SparseBlock>(1, -Eigen::MatrixXd::Ones(1, 1));
  upper->add_coefficient(0, {{0, 0, -1.0}});
  prob.blocks.push_back(std::move(lower));
  prob.blocks.push_back(std::move(upper));

  const auto sol = prob.solve();
  CHECK(sol.status == SdpStatus::Infeasible);
  CHECK_FALSE(sol.usable());
}

TEST_CASE("diagonal program with several scalars") {
  // min -x - y subject to x, y in [0, 1] encoded in one diagonal block.
  SdpProblem prob;
  prob.vars.scalars = 2;
  prob.cost = -Eigen::VectorXd::Ones(2);
  Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(4, 4);
  c0(0, 0) = 1.0;
  c0(1, 1) = 1.0;
  auto blk = std::make_unique<SparseBlock>(4, c0);
  blk->add_coefficient(0, {{0, 0, -1.0}, {2, 2, 1.0}});
  blk->add_coefficient(1, {{1, 1, -1.0}, {3, 3, 1.0}});
  prob.blocks.push_back(std::move(blk));

  const auto sol = prob.solve();
  REQUIRE(sol.usable());
  CHECK(sol.objective == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(sol.y[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.y[1] == doctest::Approx(1.0).epsilon(1e-6));
}
