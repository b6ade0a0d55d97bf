#pragma once

// Command layer behind the hpa_dyn CLI. Each command resolves a RunConfig,
// writes its CSV reports and a replayable manifest into the output
// directory, and reports failures through exit codes:
//   0 success, 1 input error, 2 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpa/io.hpp"

namespace hpa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;

inline constexpr const char* kManifestFile = "manifest.cfg";

// Command-line overrides; set fields take precedence over the config file.
struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> out;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> free;
  std::optional<std::uint64_t> synth_seed;
};

std::span<const std::string_view> command_names();

// Resolves the configuration for `command` from the options.
RunConfig resolve_config(std::string_view command, const CommandOptions& opts);

void cmd_simulate(const RunConfig& cfg, std::ostream& log);
void cmd_validate(const RunConfig& cfg, std::ostream& log);
void cmd_fit(const RunConfig& cfg, std::ostream& log);
void cmd_sensitivity(const RunConfig& cfg, std::ostream& log);
void cmd_daylight(const RunConfig& cfg, std::ostream& log);
// Writes a synthetic observation file generated from cfg.params.
void cmd_synth(const RunConfig& cfg, std::ostream& log);

// Resolves the config, dispatches, and maps exceptions to exit codes.
int run_command(std::string_view command, const CommandOptions& opts, std::ostream& log,
                std::ostream& err);

}  // namespace hpa
