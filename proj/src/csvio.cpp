#include "gtsec/csvio.hpp"

#include <sstream>

#include "gtsec/report.hpp"

namespace gtsec {

std::string trajectory_csv(const AggregatedSystem& sys, const Trajectory& t,
                           double threshold) {
  const int n = sys.dim;
  const int agents = sys.agents;
  std::ostringstream out;
  out << "k,agent,coordinate,x,z,y_m_norm,y_p_norm,alarm\n";
  double energy = 0.0;
  for (int k = 0; k <= t.steps(); ++k) {
    if (k >= 1) energy += t.ym.col(k).squaredNorm();
    const bool alarm = k >= 1 && energy > threshold;
    const std::string ym_norm = format_double(t.ym.col(k).norm());
    const std::string yp_norm = format_double(t.yp.col(k).norm());
    for (int i = 0; i < agents; ++i)
      for (int j = 0; j < n; ++j) {
        out << k << ',' << i + 1 << ',' << j + 1 << ','
            << format_double(t.state(i * n + j, k)) << ','
            << format_double(t.state(agents * n + i * n + j, k)) << ','
            << ym_norm << ',' << yp_norm << ',' << (alarm ? 1 : 0) << '\n';
      }
  }
  return out.str();
}

void write_trajectory_csv(const std::string& path, const AggregatedSystem& sys,
                          const Trajectory& t, double threshold) {
  write_text_atomic(path, trajectory_csv(sys, t, threshold));
}

}  // namespace gtsec
