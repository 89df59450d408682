#include "echosim/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace echosim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Short stable token for file names: 10 -> "10", 5.1 -> "5.1", -40 -> "-40".
std::string name_token(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

class CsvFile {
public:
  CsvFile(const fs::path& path) : path_(path), out_(path) {
    if (!out_) {
      throw IoError("cannot write " + path.string());
    }
  }
  CsvFile& cell(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  CsvFile& cell(double v) { return cell(format_number(v)); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  void close() {
    out_.close();
    if (!out_) {
      throw IoError("failed writing " + path_.string());
    }
  }

private:
  fs::path path_;
  std::ofstream out_;
  bool first_ = true;
};

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << doc.dump(2) << '\n';
  out.close();
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

std::vector<Observable> all_observables() {
  std::vector<Observable> out;
  for (int i = 0; i < kObservableCount; ++i) {
    out.push_back(static_cast<Observable>(i));
  }
  return out;
}

} // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v == 0.0 ? 0.0 : v); // no "-0"
  return buf;
}

RunResult simulate(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  const auto grid = build_grid(config.ensemble);
  SimulationOptions options;
  options.threads = config.threads;
  options.group_stride = config.group_stride;
  options.keep_groups = true;
  result.trace = simulate_ensemble(config.sequence, grid, config.decays.angular(), config.dt, options,
                                   config.ensemble.initial);
  result.report = detect_echoes(result.trace, config.sequence);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

json report_to_json(const EchoReport& report) {
  json echoes = json::array();
  for (const auto& e : report.echoes) {
    json j = {{"label", e.label},
              {"time", e.time},
              {"amplitude", e.amplitude},
              {"im_rho12", e.signed_value},
              {"sign", to_string(e.sign)},
              {"matched", e.matched},
              {"predicted_time", e.predicted_time ? json(*e.predicted_time) : json(nullptr)},
              {"inversion_at_echo", e.inversion},
              {"rho22", e.rho22}};
    if (e.assumed_silenced) {
      j["note"] = "assumed silenced by phase mismatch";
    } else if (e.stark_silenced) {
      j["note"] = "predicted silent by the Stark window";
    }
    echoes.push_back(j);
  }
  json missing = json::array();
  for (const auto& p : report.missing) {
    json j = {{"label", p.label}, {"predicted_time", p.time}};
    if (p.expected_sign) {
      j["expected_sign"] = to_string(*p.expected_sign);
    }
    j["assumed_silenced"] = p.assumed_silenced;
    j["stark_silenced"] = p.stark_silenced;
    missing.push_back(j);
  }
  return {{"reference_sign", report.reference_sign},
          {"reference_peak", report.reference_peak},
          {"threshold", report.threshold},
          {"echoes", echoes},
          {"undetected_predictions", missing}};
}

json manifest_json(const RunConfig& config, const RunResult& result) {
  const auto d = config.decays.angular();
  json pulses = json::array();
  for (const auto& p : config.sequence.pulses) {
    pulses.push_back({{"label", p.label},
                      {"transition", to_string(p.transition)},
                      {"start", p.start},
                      {"end", p.end()},
                      {"area_pi", p.area},
                      {"rabi_rad_per_us", p.rabi()},
                      {"phase", p.phase},
                      {"k_label", p.k_label}});
  }
  json predicted = json::array();
  for (const auto& p : config.sequence.predicted) {
    predicted.push_back({{"label", p.label},
                         {"time", p.time},
                         {"expected_sign", p.expected_sign ? json(to_string(*p.expected_sign)) : json(nullptr)},
                         {"assumed_silenced", p.assumed_silenced},
                         {"stark_silenced", p.stark_silenced}});
  }
  const auto& groups = result.trace.groups;
  return {
      {"manifest_version", kManifestVersion},
      {"code_version", ECHOSIM_VERSION},
      {"config", to_json(config)},
      {"resolved",
       {{"units", "times in us, rates and detunings in rad/us"},
        {"decays_rad_per_us",
         {{"Gamma21", d.pop21},
          {"Gamma23", d.pop23},
          {"Gamma31", d.pop31},
          {"Gamma32", d.pop32},
          {"gamma12", d.deph12},
          {"gamma13", d.deph13},
          {"gamma23", d.deph23}}},
        {"medium", to_string(config.sequence.medium)},
        {"horizon", config.sequence.horizon},
        {"steps", result.trace.samples() - 1},
        {"pulses", pulses},
        {"predicted_echoes", predicted},
        {"groups",
         {{"count", groups.size()},
          {"detuning_min_rad_per_us", groups.empty() ? 0.0 : groups.front().delta_base},
          {"detuning_max_rad_per_us", groups.empty() ? 0.0 : groups.back().delta_base},
          {"grid_covers_line", grid_covers_line(config.ensemble)}}},
        {"invariants",
         {{"max_trace_error", result.trace.max_trace_error},
          {"max_population_excursion", result.trace.max_population_excursion},
          {"max_positivity_violation", result.trace.max_positivity_violation}}}}},
      {"assumed", config.assumed},
      {"wall_time_s", result.wall_time_s},
  };
}

RunResult run(const RunConfig& config) {
  RunResult result = simulate(config);
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
  const auto& trace = result.trace;

  if (config.outputs.trace) {
    const auto obs = config.outputs.trace_observables.empty() ? all_observables()
                                                              : config.outputs.trace_observables;
    CsvFile csv(dir / "trace.csv");
    csv.cell("time");
    for (auto o : obs) {
      csv.cell(to_string(o));
    }
    csv.end_row();
    for (Index k = 0; k < trace.samples(); ++k) {
      csv.cell(trace.times(k));
      for (auto o : obs) {
        csv.cell(trace.collective_at(k, o));
      }
      csv.end_row();
    }
    csv.close();
    result.files.push_back("trace.csv");
  }

  for (auto o : config.outputs.maps) {
    const auto m = spectral_map(trace, o);
    const std::string name = "map_" + to_string(o) + ".csv";
    CsvFile csv(dir / name);
    csv.cell("time\\delta_khz");
    for (const auto& g : trace.groups) {
      csv.cell(g.delta_khz());
    }
    csv.end_row();
    for (Index k = 0; k < m.rows(); ++k) {
      csv.cell(trace.group_time(k));
      for (Index j = 0; j < m.cols(); ++j) {
        csv.cell(m(k, j));
      }
      csv.end_row();
    }
    csv.close();
    result.files.push_back(name);
  }

  for (double t : config.outputs.grating_times) {
    const Observable cols[] = {Observable::ReRho12, Observable::ImRho12, Observable::Rho11, Observable::Rho22};
    std::vector<std::vector<GratingPoint>> slices;
    for (auto o : cols) {
      slices.push_back(grating_slice(trace, t, o));
    }
    const std::string name = "grating_t" + name_token(t) + ".csv";
    CsvFile csv(dir / name);
    csv.cell("delta_khz");
    for (auto o : cols) {
      csv.cell(to_string(o));
    }
    csv.end_row();
    for (std::size_t j = 0; j < slices.front().size(); ++j) {
      csv.cell(slices.front()[j].delta_khz);
      for (const auto& s : slices) {
        csv.cell(s[j].value);
      }
      csv.end_row();
    }
    csv.close();
    result.files.push_back(name);
  }

  for (double delta : config.outputs.bloch_deltas_khz) {
    const auto path = bloch_trajectory(trace, config.sequence, delta);
    const std::string name = "bloch_d" + name_token(delta) + ".csv";
    CsvFile csv(dir / name);
    csv.cell("time").cell("re_rho12").cell("im_rho12").cell("segment");
    csv.end_row();
    for (const auto& p : path) {
      csv.cell(p.time).cell(p.re).cell(p.im).cell(p.segment);
      csv.end_row();
    }
    csv.close();
    result.files.push_back(name);
  }

  if (config.outputs.echoes) {
    write_json(dir / "echoes.json", report_to_json(result.report));
    result.files.push_back("echoes.json");
  }
  write_json(dir / "manifest.json", manifest_json(config, result));
  result.files.push_back("manifest.json");
  return result;
}

} // namespace echosim
