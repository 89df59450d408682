// echosim command line: run presets or config files, predict echo times, list presets.
#include "echosim/oracles.hpp"
#include "echosim/presets.hpp"
#include "echosim/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace echosim;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

PulseSequence sequence_from_document(const json& doc) {
  if (doc.is_object() && (doc.contains("manifest_version") || doc.contains("sequence"))) {
    return parse_config(doc).sequence;
  }
  return parse_sequence(doc);
}

json predictions(const PulseSequence& seq) {
  json out;
  out["protocol"] = protocol_name(seq.protocol);
  json times = json::array();
  for (const auto& p : echo_times(seq)) {
    times.push_back({{"label", p.label}, {"time", p.time}});
  }
  out["echo_times"] = times;
  const auto beams = beam_directions(seq);
  json kv = json::array();
  for (const auto& [label, k] : echo_wavevectors(seq)) {
    kv.push_back({{"label", label}, {"symbolic", k.to_string()}, {"beams", phase_match(k, beams).to_string()}});
  }
  out["wave_vectors"] = kv;
  json expected = json::array();
  for (const auto& p : seq.predicted) {
    json j = {{"label", p.label}, {"time", p.time}};
    j["expected_sign"] = p.expected_sign ? json(to_string(*p.expected_sign)) : json(nullptr);
    if (p.assumed_silenced) {
      j["note"] = "assumed silenced by phase mismatch";
    } else if (p.stark_silenced) {
      j["note"] = "silenced by the Stark window";
    }
    expected.push_back(j);
  }
  out["expected"] = expected;
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-echo ensemble simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "simulate a preset or config file and write outputs");
  std::string preset_name, config_path, out_dir, observables;
  double dt = 0;
  unsigned threads = 0;
  auto* preset_opt = run_cmd->add_option("--preset", preset_name, "figure preset name");
  auto* config_opt = run_cmd->add_option("--config", config_path, "JSON config or manifest");
  preset_opt->excludes(config_opt);
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--dt", dt, "integration step, us");
  run_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  run_cmd->add_option("--observables", observables, "comma-separated trace columns");

  auto* predict_cmd = app.add_subcommand("predict", "print oracle echo times and wave vectors");
  std::string predict_path, predict_preset;
  auto* predict_file = predict_cmd->add_option("file", predict_path, "sequence, config or manifest file");
  predict_cmd->add_option("--preset", predict_preset, "figure preset name")->excludes(predict_file);

  auto* list_cmd = app.add_subcommand("list-presets", "list the built-in figure presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& p : list_presets()) {
        std::printf("%-8s %s\n", p.name.c_str(), p.description.c_str());
      }
      return kOk;
    }

    if (predict_cmd->parsed()) {
      PulseSequence seq;
      if (!predict_preset.empty()) {
        seq = preset(predict_preset).sequence;
      } else if (!predict_path.empty()) {
        seq = sequence_from_document(read_json_file(predict_path));
      } else {
        throw ValidationError("predict: give a file or --preset");
      }
      std::cout << predictions(seq).dump(2) << '\n';
      return kOk;
    }

    RunConfig config;
    if (!preset_name.empty()) {
      config = preset(preset_name);
    } else if (!config_path.empty()) {
      config = load_config(config_path);
    } else {
      throw ValidationError("run: give --preset or --config");
    }
    if (!out_dir.empty()) {
      config.output_dir = out_dir;
    }
    if (dt > 0) {
      config.dt = dt;
    } else if (run_cmd->count("--dt")) {
      throw ValidationError("--dt must be positive");
    }
    if (run_cmd->count("--threads")) {
      config.threads = threads;
    }
    if (!observables.empty()) {
      config.outputs.trace_observables.clear();
      std::size_t pos = 0;
      while (pos <= observables.size()) {
        const auto comma = observables.find(',', pos);
        const auto token = observables.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        config.outputs.trace_observables.push_back(observable_from_string(token));
        if (comma == std::string::npos) {
          break;
        }
        pos = comma + 1;
      }
    }
    // Re-validate anything the overrides could have broken before spending compute.
    config = parse_config(to_json(config));

    const auto result = run(config);
    for (const auto& e : result.report.echoes) {
      std::printf("echo %-3s t=%.3f us  |Im rho12|=%.3e  %s%s\n", e.label.empty() ? "?" : e.label.c_str(),
                  e.time, e.amplitude, to_string(e.sign).c_str(), e.matched ? "" : "  (unmatched)");
    }
    std::printf("wrote %zu files to %s\n", result.files.size(), config.output_dir.c_str());
    return kOk;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o failure: %s\n", e.what());
    return kIo;
  }
}
