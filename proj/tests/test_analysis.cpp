#include "echosim/analysis.hpp"

#include <doctest.h>

#include <cmath>

using namespace echosim;

namespace {

EnsembleSpec line(double fwhm, int count) {
  EnsembleSpec s;
  s.fwhm_khz = fwhm;
  s.spacing_khz = 10;
  s.group_count = count;
  return s;
}

PulseSequence data_only(double horizon = 8) {
  PulseSequence seq;
  Pulse d;
  d.label = "D";
  d.start = 1.0;
  d.duration = 0.1;
  d.area = 0.5;
  seq.pulses = {d};
  seq.horizon = horizon;
  seq.data_pulse = 0;
  return seq;
}

EnsembleTrace run(const PulseSequence& seq, int groups = 69) {
  return simulate_ensemble(seq, build_grid(line(340, groups)), DecayRatesd{}, 0.01);
}

} // namespace

TEST_CASE("a lone data pulse produces no echoes") {
  const auto seq = data_only();
  const auto report = detect_echoes(run(seq), seq);
  CHECK(report.echoes.empty());
  CHECK(report.missing.empty());
  CHECK(report.reference_sign == -1); // Im rho12 < 0 after a pulse from the ground state
  CHECK(report.reference_peak > 0);
}

TEST_CASE("two-pulse echo is found, matched and emissive") {
  const auto seq = two_pulse_echo({});
  const auto tr = run(seq);
  const auto report = detect_echoes(tr, seq);
  const auto* e1 = report.find("e1");
  REQUIRE(e1 != nullptr);
  CHECK(e1->matched);
  CHECK(std::abs(e1->time - 15.0) < 0.1 + 0.01);
  CHECK(e1->sign == EchoSign::Emissive);
  CHECK(e1->signed_value * report.reference_sign < 0);
  CHECK(e1->amplitude > report.threshold);
  CHECK(e1->inversion == doctest::Approx(e1->rho22 - (1 - e1->rho22)).epsilon(1e-9));
  CHECK(report.find("e9") == nullptr);

  // Detection is a pure function of its inputs.
  const auto again = detect_echoes(tr, seq);
  REQUIRE(again.echoes.size() == report.echoes.size());
  for (std::size_t i = 0; i < again.echoes.size(); ++i) {
    CHECK(again.echoes[i].time == report.echoes[i].time);
    CHECK(again.echoes[i].signed_value == report.echoes[i].signed_value);
  }

  const auto peak = amplitude_near(tr, 15.0, 0.3);
  CHECK(peak.amplitude == doctest::Approx(e1->amplitude).epsilon(1e-3));

  auto other = seq;
  other.horizon = 30;
  CHECK_THROWS_AS(detect_echoes(tr, other), ValidationError);
}

TEST_CASE("echo sign is stable as the data area shrinks") {
  TwoPulseParams p;
  EchoSign previous{};
  for (int i = 0; i < 3; ++i) {
    p.area_data = 0.2 / double(1 << i);
    const auto seq = two_pulse_echo(p);
    const auto report = detect_echoes(run(seq), seq);
    const auto* e1 = report.find("e1");
    REQUIRE(e1 != nullptr);
    if (i > 0) {
      CHECK(e1->sign == previous);
    }
    previous = e1->sign;
  }
}

TEST_CASE("predictions without a peak are reported as missing") {
  ControlledEchoParams p;
  p.controls = {{12.0, 2.0}};
  auto seq = controlled_echo(p);
  seq.predicted.push_back({"e_far", 18.0, std::nullopt, false, false});
  const auto report = detect_echoes(run(seq), seq);
  REQUIRE(report.missing.size() == 1);
  CHECK(report.missing[0].label == "e_far");
}

TEST_CASE("inversion of the ground state is -1") {
  PulseSequence seq;
  seq.horizon = 2;
  const auto tr = run(seq, 5);
  CHECK(inversion_check(tr, 1.0) == -1.0);
  CHECK_THROWS_AS(inversion_check(tr, 3.0), ValidationError);
}

TEST_CASE("FID fall time scales inversely with the linewidth") {
  const auto seq = data_only(6);
  const auto narrow = simulate_ensemble(seq, build_grid(line(340, 137)), DecayRatesd{}, 0.01);
  const auto wide = simulate_ensemble(seq, build_grid(line(680, 273)), DecayRatesd{}, 0.01);
  const auto a = fid_metrics(narrow, 1.1);
  const auto b = fid_metrics(wide, 1.1);
  REQUIRE(a.fall_time);
  REQUIRE(b.fall_time);
  CHECK(std::abs(a.peak_time - 1.1) <= 0.05);
  CHECK(*b.fall_time / *a.fall_time == doctest::Approx(0.5).epsilon(0.2));

  // A single group never dephases.
  const auto single = simulate_ensemble(seq, build_grid(line(340, 1)), DecayRatesd{}, 0.01);
  CHECK_FALSE(fid_metrics(single, 1.1).fall_time.has_value());

  PulseSequence empty;
  empty.horizon = 3;
  CHECK_THROWS_AS(fid_metrics(run(empty, 5), 1.0), ValidationError);
}

TEST_CASE("Bloch trajectories") {
  const auto seq = two_pulse_echo({});
  const auto tr = run(seq, 41);
  const auto centre = bloch_trajectory(tr, seq, 0.0);
  REQUIRE(centre.size() == static_cast<std::size_t>(tr.group_samples()));
  double worst_re = 0;
  for (const auto& p : centre) worst_re = std::max(worst_re, std::abs(p.re));
  CHECK(worst_re < 1e-12); // resonant atoms stay on the imaginary axis
  CHECK(centre.front().segment == "pre");
  CHECK(bloch_trajectory(tr, seq, 0.0)[502].segment == "D");
  CHECK(centre[700].segment == "D+");
  CHECK(centre[1005].segment == "R");
  CHECK(centre.back().segment == "R+");

  const auto off = bloch_trajectory(tr, seq, 50.0);
  const auto map = spectral_map(tr, Observable::ImRho12);
  const Index col = tr.group_at(50.0);
  for (std::size_t k = 0; k < off.size(); k += 97) {
    CHECK(off[k].im == map(static_cast<Index>(k), col));
  }
  CHECK_THROWS_AS(bloch_trajectory(tr, seq, 55.0), ValidationError);
}
