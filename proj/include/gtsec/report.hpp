#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace gtsec {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// 64-bit FNV-1a over the raw configuration text, hex encoded.  Stable
// across platforms, so reports from the same file always carry the same
// digest.
std::string config_digest(const std::string& text);

// Shortest decimal that round-trips the value; used everywhere a report or
// CSV serialises a floating-point number so identical runs produce
// identical bytes.
std::string format_double(double v);

// Common envelope: schema_version, tool, command, config digest and seed.
// Results are attached by the caller before writing.
nlohmann::ordered_json report_envelope(const std::string& command,
                                       const std::string& digest,
                                       std::uint64_t seed);

// Writes through a temporary file in the same directory followed by a
// rename, so a crash never leaves a half-written file at `path`.
void write_text_atomic(const std::string& path, const std::string& text);

void write_report(const std::string& path, const nlohmann::ordered_json& report);

}  // namespace gtsec
