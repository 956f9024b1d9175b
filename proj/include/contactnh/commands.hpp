#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "contactnh/config.hpp"

namespace contactnh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// 2 for configuration, parse and off-constraint errors; 3 for numerical failures.
int exit_code_for(const std::exception& e);

std::string engine_version();

/// Writes trajectory.csv and manifest.json into out_dir. Lagrangian configs take
/// x0 = (q, v, z) and record the Legendre image.
int simulate(const SystemConfig& cfg, const std::string& x0, const std::filesystem::path& out_dir, std::ostream& err);

/// Check name -> {max_residual, tolerance, pass} or {skipped, reason}.
nlohmann::json verify_report(const SystemConfig& cfg, int samples, std::uint64_t seed);
bool report_passes(const nlohmann::json& report);
int verify(const SystemConfig& cfg, int samples, std::uint64_t seed, std::ostream& out, std::ostream& err);

nlohmann::json bracket_report(const SystemConfig& cfg, const std::string& f, const std::string& g,
                              const std::string& point);
int bracket(const SystemConfig& cfg, const std::string& f, const std::string& g, const std::string& point,
            std::ostream& out, std::ostream& err);

}  // namespace contactnh::cli
