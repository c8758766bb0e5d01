#pragma once

#include <string>

#include "gtsec/simulate.hpp"
#include "gtsec/system.hpp"

namespace gtsec {

// Long-format trajectory table, one row per (step, agent, coordinate):
//   k,agent,coordinate,x,z,y_m_norm,y_p_norm,alarm
// Output norms repeat across the rows of a step.  `alarm` reflects the
// cumulative detector energy over [1, k] against the threshold.  Agents and
// coordinates are numbered from 1 to match the scenario format.
std::string trajectory_csv(const AggregatedSystem& sys, const Trajectory& t,
                           double threshold);

void write_trajectory_csv(const std::string& path, const AggregatedSystem& sys,
                          const Trajectory& t, double threshold);

}  // namespace gtsec
