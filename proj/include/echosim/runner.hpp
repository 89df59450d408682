#pragma once

#include "echosim/analysis.hpp"
#include "echosim/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace echosim {

inline constexpr int kManifestVersion = 1;

struct RunResult {
  EnsembleTrace trace;
  EchoReport report;
  std::vector<std::string> files; // written, relative to the output directory
  double wall_time_s = 0;
};

/// Simulate, analyse and write every requested artifact into config.output_dir.
RunResult run(const RunConfig& config);

/// Simulate and analyse only.
RunResult simulate(const RunConfig& config);

nlohmann::json report_to_json(const EchoReport& report);
nlohmann::json manifest_json(const RunConfig& config, const RunResult& result);

/// "%.11e" (12 significant digits), the fixed numeric format of every CSV.
std::string format_number(double v);

} // namespace echosim
