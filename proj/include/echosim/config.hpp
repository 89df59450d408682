#pragma once

#include "echosim/dynamics.hpp"
#include "echosim/ensemble.hpp"
#include "echosim/protocols.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace echosim {

/// Decay rates as configured, in ordinary kHz.
struct DecaysKhz {
  double pop21 = 0, pop23 = 0, pop31 = 0, pop32 = 0;
  double deph12 = 0, deph13 = 0, deph23 = 0;

  DecayRatesd angular() const;
  bool operator==(const DecaysKhz&) const = default;
};

struct OutputRequest {
  bool trace = true;
  std::vector<Observable> trace_observables; // empty means all
  std::vector<Observable> maps;
  std::vector<double> grating_times;
  std::vector<double> bloch_deltas_khz;
  bool echoes = true;
};

struct RunConfig {
  std::string preset; // informational, empty for hand-written configs
  EnsembleSpec ensemble;
  DecaysKhz decays;
  PulseSequence sequence;
  double dt = 0.01;
  unsigned threads = 0;
  Index group_stride = 1;
  OutputRequest outputs;
  std::string output_dir = "out";
  std::vector<std::string> assumed; // values chosen by the preset rather than given for the figure
};

/// Strict parse: unknown keys, wrong types and failed builder preconditions are ValidationErrors
/// naming the offending path. A manifest is accepted in place of a config.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& config);

/// Sequence section alone, as used by `predict`.
PulseSequence parse_sequence(const nlohmann::json& doc);
nlohmann::json sequence_to_json(const PulseSequence& seq);

} // namespace echosim
