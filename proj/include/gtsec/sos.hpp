#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gtsec/graph.hpp"
#include "gtsec/poly.hpp"
#include "gtsec/sdp.hpp"

namespace gtsec {

// Closed loop with polynomial gradient updates, one scalar state pair per
// agent.  Coordinates run [x_1..x_N, z_1..z_N]; the update of every
// coordinate is a polynomial over the full vector and the attack enters
// additively at the misbehaving node, both halves.
struct PolySystem {
  int agents = 0;
  int attack_node = 0;
  int monitor_node = 0;
  int update_degree = 1;

  std::vector<Monomial> basis;     // monomials up to update_degree, constant first
  Eigen::MatrixXd A;               // update coefficients over basis
  Eigen::VectorXd B;               // attack direction
  Eigen::MatrixXd Cp;              // pairwise-difference rows over basis
  Eigen::MatrixXd Cm;              // monitor rows over basis
  std::vector<Polynomial> update;  // same content as A, kept symbolic

  int vars() const { return 2 * agents; }
  bool forced() const;  // any update carries a constant term
  Eigen::VectorXd basis_values(const Eigen::VectorXd& state) const;
  Eigen::VectorXd step(const Eigen::VectorXd& state, double attack) const;
};

// Assembles the loop for scalar agents with polynomial objectives.  Guards
// keep the construction at desk scale: 2 to 4 agents, objective degree at
// most 4.
PolySystem build_poly_system(const Network& net,
                             const std::vector<Polynomial>& objectives,
                             double alpha, int attack_node, int monitor_node,
                             double weight,
                             std::optional<double> scaling = std::nullopt);

// Dissipation certificate for the polynomial loop.  The storage S = Z'DZ is
// a quadratic form over `storage_basis`, polynomials chosen constant along
// every direction the intruder can push before either output reacts; that
// invariance is what lets the certified decrease condition drop the attack
// input yet keep holding on attacked runs.  When the defended differences
// react to the intruder sooner than the monitor does, delayed copies of
// them are appended to the state so both channels answer at the same depth.
struct SosCertificate {
  // Loop the certificate lives on: the first base_states coordinates are
  // the original ones, the remaining delay_levels blocks hold the appended
  // copies of the defended output.
  int base_states = 0;
  int delay_levels = 0;
  std::vector<Polynomial> ext_update;  // autonomous update, padded state
  Eigen::VectorXd ext_B;               // attack direction, padded state
  Eigen::MatrixXd ext_Cp;              // defended rows over padded coordinates
  Eigen::MatrixXd ext_Cm;              // monitor rows over padded coordinates

  std::vector<Polynomial> storage_basis;  // Z entries carrying S
  std::vector<Polynomial> gram_basis;     // frame certifying the decrease
  Eigen::MatrixXd storage;                // D
  Eigen::MatrixXd gram;                   // PSD witness over gram_basis
  Eigen::VectorXd multipliers;            // moves along colliding products
  double gamma = 0.0;

  double storage_min_eig = 0.0;
  double gram_min_eig = 0.0;
  double match_residual = 0.0;  // worst coefficient gap, witness vs target

  int states() const { return static_cast<int>(ext_B.size()); }
  // Embeds an original state, appended delays zeroed.
  Eigen::VectorXd pad_state(const Eigen::VectorXd& base_state) const;
  Eigen::VectorXd step(const Eigen::VectorXd& ext_state, double attack) const;
  double storage_at(const Eigen::VectorXd& ext_state) const;
  // gamma |y_m|^2 - |y_p|^2; the certified ceiling on the storage increase.
  double supply_at(const Eigen::VectorXd& ext_state) const;
};

struct SosBound {
  double value = 0.0;  // epsilon-scaled bound on the defended energy
  double gamma = 0.0;
  double epsilon = 0.0;
  int basis_degree = 0;
  SosCertificate certificate;
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
};

// Least supply multiplier the loop can be certified dissipative against,
// established by a sum-of-squares identity at the given basis degree
// (0 picks the smallest degree that can carry the update composition).
// Throws if the program is infeasible at that degree or the construction
// cannot be carried there.
SosBound sos_security_bound(const PolySystem& sys, double epsilon,
                            int basis_degree = 0, const SdpOptions& opts = {});

}  // namespace gtsec
