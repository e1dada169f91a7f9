#pragma once

// Workflows behind the tpdo command line. Each subcommand reads a JSON
// config, runs its module's checks and writes CSV/JSON reports.
//
// Exit codes: 0 every check passed, 1 a numeric check failed, 2 the config
// or the command line was rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpdo/symbols.hpp"

namespace tpdo::cli {

inline constexpr int kPass = 0;
inline constexpr int kNumericFailure = 1;
inline constexpr int kUsageError = 2;

/// Schema violations: unknown fields, wrong types, values out of range.
struct ConfigError : Error {
  using Error::Error;
};

struct RunOptions {
  /// Overrides the config's output_dir.
  std::optional<std::filesystem::path> output;
  /// Overrides the config's seed.
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  /// Relative file names in the config resolve against this directory.
  std::filesystem::path config_dir;
};

struct RunResult {
  int exit_code = kPass;
  /// One line per check, or the reason for rejection.
  std::vector<std::string> messages;
  std::vector<std::filesystem::path> files;
};

const std::vector<std::string>& subcommands();

/// Never throws; failures are reported through the exit code.
RunResult run(const std::string& command, const nlohmann::json& config, const RunOptions& options = {});
RunResult run_file(const std::string& command, const std::filesystem::path& config, const RunOptions& options = {});

/// Symbol presets, as a string "kind key=value ..." or an object {"kind": ..., key: value}:
///   const      c (1)           sigma = c
///   bracket    m               sigma = <xi>^m
///   exp        k (1), m (0)    sigma = e^{i k x_1} <xi>^m
///   cos, sin   k (1), m (0), c (0)
///                              sigma = (c + cos(k x_1)) <xi>^m, likewise sin
///   tabulated  file            {n, N, K, order_m, rho, delta, values: [[x-index, xi-index, re, im], ...]}
///                              with linear x-index on the grid and linear xi-index on the window {-K..K-1}^n.
/// Relative file names resolve against `base`.
ToroidalSymbol parse_symbol(const nlohmann::json& spec, int dim, const std::filesystem::path& base = {});

/// True when the preset does not depend on x.
bool is_multiplier(const nlohmann::json& spec);

}  // namespace tpdo::cli
