#include "echosim/presets.hpp"
#include "echosim/runner.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace echosim;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

bool mentions(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

json custom_sequence() {
  return json::parse(R"({
    "protocol": "custom",
    "medium": "solid",
    "horizon": 20,
    "pulses": [
      {"label": "D", "transition": "1-2", "start": 5, "duration": 0.1, "area": 0.5, "k_label": "+k_D"},
      {"label": "R", "transition": "1-2", "start": 10, "duration": 0.1, "area": 1}
    ],
    "events": [{"type": "stark_window", "start": 6, "duration": 2, "delta_omega": 0.3, "polarity": -1}],
    "data_pulse": "D"
  })");
}

} // namespace

TEST_CASE("every preset round-trips through JSON") {
  REQUIRE(list_presets().size() == 10);
  for (const auto& info : list_presets()) {
    CAPTURE(info.name);
    const auto config = preset(info.name);
    const json once = to_json(config);
    const auto back = parse_config(once);
    CHECK(to_json(back) == once);
    CHECK(back.sequence == config.sequence);
    CHECK(config.output_dir == "out/" + info.name);
    CHECK_FALSE(config.assumed.empty());
  }
  CHECK_THROWS_AS(preset("fig99"), ValidationError);
}

TEST_CASE("preset values") {
  const auto dr = preset("fig5");
  CHECK(dr.ensemble.fwhm_khz == 670.0);
  CHECK(dr.sequence == double_rephasing({}));
  const auto& p = std::get<DoubleRephasingParams>(dr.sequence.protocol);
  CHECK(p.t_rephase2 == 32.0);

  const auto crib_cfg = preset("fig2");
  CHECK(crib_cfg.ensemble.fwhm_khz == 510.0);
  CHECK(crib_cfg.ensemble.group_count == 121);
  CHECK(crib_cfg.sequence.medium == Medium::Doppler);

  const auto afc = preset("supp2");
  CHECK(std::get<AfcParams>(afc.sequence.protocol).n_sets == 10);
  CHECK(afc.group_stride == 10);
}

TEST_CASE("custom sequences parse and serialize") {
  json doc = to_json(preset("fig1"));
  doc["sequence"] = custom_sequence();
  const auto config = parse_config(doc);
  const auto& seq = config.sequence;
  REQUIRE(seq.pulses.size() == 2);
  CHECK(seq.pulses[1].k_label.empty());
  CHECK(*seq.data_pulse == 0);
  REQUIRE(seq.events.size() == 1);
  CHECK(std::get<StarkWindow>(seq.events[0]).polarity == -1);
  CHECK(std::holds_alternative<std::monostate>(seq.protocol));
  CHECK(parse_sequence(sequence_to_json(seq)) == seq);
}

TEST_CASE("strict parsing names the offending path") {
  const json base = to_json(preset("fig5"));

  json doc = base;
  doc["ensemble"]["fwhm"] = 3;
  CHECK(mentions(error_of(doc), "ensemble.fwhm"));

  doc = base;
  doc["sequence"]["params"]["t_rephase"] = "ten";
  CHECK(mentions(error_of(doc), "sequence.params.t_rephase"));

  doc = base;
  doc["colour"] = "blue";
  CHECK(mentions(error_of(doc), "colour"));

  doc = base;
  doc["sequence"]["protocol"] = "teleport";
  CHECK(mentions(error_of(doc), "teleport"));

  doc = base;
  doc["sequence"]["params"]["t_rephase2"] = 12;
  CHECK_FALSE(error_of(doc).empty()); // RR before e1

  doc = base;
  doc["dt"] = -0.01;
  CHECK(mentions(error_of(doc), "dt"));

  doc = base;
  doc["outputs"]["observables"] = json::array({"rho44"});
  CHECK(mentions(error_of(doc), "rho44"));

  doc = base;
  doc["outputs"]["bloch_deltas_khz"] = json::array({15.0});
  CHECK_FALSE(error_of(doc).empty()); // not on the 10 kHz grid

  doc = base;
  doc["outputs"]["grating_times"] = json::array({99.0});
  CHECK_FALSE(error_of(doc).empty()); // past the horizon

  doc = base;
  doc["sequence"] = custom_sequence();
  doc["sequence"]["pulses"][1]["start"] = 5.05;
  const auto overlap = error_of(doc);
  CHECK(mentions(overlap, "D"));
  CHECK(mentions(overlap, "R"));

  doc = base;
  doc["sequence"] = custom_sequence();
  doc["sequence"]["pulses"][0]["transition"] = "1-3";
  CHECK(mentions(error_of(doc), "1-3"));
}

TEST_CASE("a manifest is accepted as a config") {
  auto config = preset("fig4e");
  config.ensemble.group_count = 21;
  RunResult result;
  result.trace = simulate_ensemble(config.sequence, build_grid(config.ensemble), config.decays.angular(), config.dt);
  result.report = detect_echoes(result.trace, config.sequence);
  const json manifest = manifest_json(config, result);
  CHECK(manifest["manifest_version"] == kManifestVersion);
  CHECK(to_json(parse_config(manifest)) == to_json(config));
}

TEST_CASE("config files") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "echosim_test_config";
  fs::create_directories(dir);
  const auto good = dir / "good.json";
  std::ofstream(good) << to_json(preset("fig1")).dump(2);
  CHECK(to_json(load_config(good.string())) == to_json(preset("fig1")));

  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{ \"dt\": ";
  CHECK_THROWS_AS(load_config(bad.string()), ValidationError);
  CHECK_THROWS_AS(load_config((dir / "absent.json").string()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("decay conversion to angular units") {
  DecaysKhz d;
  d.pop21 = 1.0;
  d.deph12 = 10.0;
  const auto g = d.angular();
  CHECK(g.pop21 == doctest::Approx(2 * std::numbers::pi * 1e-3));
  CHECK(g.deph12 == doctest::Approx(2 * std::numbers::pi * 1e-2));
}

TEST_CASE("numbers are written with twelve significant digits") {
  CHECK(format_number(0.0) == "0.00000000000e+00");
  CHECK(format_number(-1.0 / 3) == "-3.33333333333e-01");
  CHECK(format_number(15.064) == "1.50640000000e+01");
}
