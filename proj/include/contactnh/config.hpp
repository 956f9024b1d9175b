#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "contactnh/lagrangian.hpp"

namespace contactnh {

/// Expression strings for one force one-form; empty strings mean 0.
struct ForceConfig {
  std::vector<std::string> dq;
  std::vector<std::string> dp;
  std::string dz;
  bool operator==(const ForceConfig&) const = default;
};

/// Sectioned key/value system description. See configs/ for annotated examples.
struct SystemConfig {
  enum class Mode { Hamiltonian, Lagrangian };

  Mode mode = Mode::Hamiltonian;
  int n = 1;

  // [hamiltonian]
  std::string hamiltonian;
  std::vector<std::string> constraints;
  std::vector<ForceConfig> forces;

  // [lagrangian]
  std::vector<std::vector<std::string>> metric;
  std::string potential;
  std::vector<std::vector<std::string>> forms;

  // [integrator]
  double h = 1e-3;
  double t_end = 1.0;
  bool project = false;

  // [run]
  std::uint64_t seed = 0;
  int sample_count = 20;

  bool operator==(const SystemConfig&) const = default;
};

SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const SystemConfig& c);

/// The Hamiltonian system the config describes (induced from the Lagrangian in lagrangian mode).
ConstrainedSystem build_system(const SystemConfig& c);
std::optional<MechanicalSystem> build_mechanical(const SystemConfig& c);

/// Comma-separated reals.
Vec parse_vector(std::string_view text);

}  // namespace contactnh
