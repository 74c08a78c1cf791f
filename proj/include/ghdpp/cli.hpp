#pragma once

#include <string>
#include <vector>

namespace ghdpp::cli {

/// Runs one subcommand: sample-dpp, sample-rho, calibrate, integrate,
/// experiment, spherical-diag, bench, compare.
/// Returns 0 on success, 2 on bad usage, 1 on runtime failure.
int dispatch(int argc, char** argv);
int dispatch(const std::vector<std::string>& args);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

/// FNV-1a 64-bit hash, hex encoded.
std::string fnv1a_hex(const std::string& data);

/// Environment variable consulted for a calibration table when --calibration is absent.
inline constexpr const char* kCalibrationEnv = "GHDPP_CALIBRATION";

}  // namespace ghdpp::cli
