#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace gtsec {

// 64-bit FNV-1a over the bytes of a string.  Used to derive stream names
// into seed material.
std::uint64_t fnv1a64(std::string_view s);

// One round of the splitmix64 output function.
std::uint64_t splitmix64(std::uint64_t x);

// Keyed seed fan-out: every named consumer of randomness derives its own
// seed from the master seed, so adding a consumer never shifts the draws
// seen by the others.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

// Deterministic random stream.  All distributions are implemented locally
// on top of mt19937_64 (whose output sequence the standard pins down), so
// results are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller.
  double normal();

  // Uniform integer on [lo, hi], both ends included.
  int uniform_int(int lo, int hi);

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi);
  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

  // Uniform direction on the unit sphere.
  Eigen::VectorXd unit_vector(Eigen::Index n);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gtsec
