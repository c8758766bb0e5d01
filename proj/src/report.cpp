#include "gtsec/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace gtsec {

std::string config_digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[32];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(probe, "%lf", &back);
    if (back == v) return probe;
  }
  return buf;
}

nlohmann::ordered_json report_envelope(const std::string& command,
                                       const std::string& digest,
                                       std::uint64_t seed) {
  nlohmann::ordered_json r;
  r["schema_version"] = kReportSchemaVersion;
  r["tool"] = kToolVersion;
  r["command"] = command;
  r["config_digest"] = digest;
  r["seed"] = seed;
  return r;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error(tmp + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error(path + ": rename failed");
  }
}

void write_report(const std::string& path, const nlohmann::ordered_json& report) {
  write_text_atomic(path, report.dump(2) + "\n");
}

}  // namespace gtsec
