#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "gtsec/system.hpp"

namespace gtsec {

// Recorded run of the closed loop.  Column k of each matrix belongs to step
// k; outputs are evaluated on the stored states, so the columns align.
struct Trajectory {
  Eigen::MatrixXd state;  // 2nN rows
  Eigen::MatrixXd ym;     // monitor residual rows (offset already applied)
  Eigen::MatrixXd yp;     // performance rows
  bool truncated = false;
  int truncated_at = -1;

  int steps() const { return static_cast<int>(state.cols()) - 1; }
};

struct SimulationInputs {
  Eigen::VectorXd x0;
  Eigen::MatrixXd attack;  // dim x S, column k applies at step k; empty means none
  bool forcing = true;     // include the constant drive from the cost terms
  bool offset = true;      // subtract the calibrated monitor offset
};

// Runs the loop for `horizon` steps.  When the state norm passes the
// divergence cap the run is cut short and flagged; the overflowing state is
// the last stored column.
Trajectory simulate(const AggregatedSystem& sys, const SimulationInputs& in,
                    int horizon);

// Splits a run into the attack-free response (forcing and offset active)
// and the pure attack response from a zero state (no forcing, no offset).
// By linearity the two add up to the full run, state by state.
struct Decomposition {
  Trajectory full;
  Trajectory nominal;
  Trajectory attacked;
};
Decomposition decompose(const AggregatedSystem& sys, const Eigen::VectorXd& x0,
                        const Eigen::MatrixXd& attack, int horizon);

// Monitor energy sum_{k=1..window} |ym[k]|^2 (clipped to the stored steps).
double detector_energy(const Trajectory& t, int window);

// Alarm fires when the windowed energy exceeds the threshold; an attack
// that keeps the energy at or below it stays unnoticed by construction.
bool alarm_raised(const Trajectory& t, double threshold, int window);

// Largest distance of any agent's iterate from the team optimum at the last
// stored step.
double optimum_gap(const AggregatedSystem& sys, const Trajectory& t);

// Monitor offset: the attack-free response from x0 is run until consecutive
// states differ by less than the settle tolerance (checked from step k1 on,
// hard cap 10^4 steps) and the raw monitor output there becomes the offset.
// A loop still drifting at the cap is read at the cap.
Eigen::VectorXd calibrate_offset(const AggregatedSystem& sys,
                                 const Eigen::VectorXd& x0, int k1 = 100);

// Detector threshold: margin times the largest windowed energy over
// `trials` attack-free runs from seeded unit-norm initial states.  Uses the
// offset already stored in the system.
double calibrate_threshold(const AggregatedSystem& sys, int trials, int window,
                           double margin, std::uint64_t seed);

}  // namespace gtsec
