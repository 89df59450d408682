#include "echosim/oracles.hpp"
#include "echosim/protocols.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace echosim;

namespace {

constexpr double kPi = std::numbers::pi;

double predicted(const PulseSequence& seq, const std::string& label) {
  for (const auto& p : seq.predicted) {
    if (p.label == label) return p.time;
  }
  FAIL("no prediction " << label);
  return 0;
}

const PredictedEcho& prediction(const PulseSequence& seq, const std::string& label) {
  for (const auto& p : seq.predicted) {
    if (p.label == label) return p;
  }
  throw std::runtime_error("missing prediction");
}

void check_matches_oracle(const PulseSequence& seq) {
  const auto oracle = echo_times(seq);
  REQUIRE(oracle.size() == seq.predicted.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    CHECK(oracle[i].label == seq.predicted[i].label);
    CHECK(oracle[i].time == seq.predicted[i].time);
  }
}

} // namespace

TEST_CASE("two-pulse echo") {
  const auto seq = two_pulse_echo({});
  REQUIRE(seq.pulses.size() == 2);
  CHECK(seq.pulses[0].label == "D");
  CHECK(seq.pulses[1].label == "R");
  CHECK(predicted(seq, "e1") == 15.0);
  CHECK(seq.pulses[0].rabi() == doctest::Approx(0.5 * kPi / 0.1));
  CHECK(seq.medium == Medium::Solid);
  CHECK(*seq.data_pulse == 0);
  check_matches_oracle(seq);

  TwoPulseParams p;
  p.t_data = 0;
  p.t_rephase = 7;
  CHECK(predicted(two_pulse_echo(p), "e1") == 14.0);

  p = {};
  p.area_rephase = 0.5;
  p.split_rephase = true;
  const auto split = two_pulse_echo(p);
  REQUIRE(split.pulses.size() == 3);
  CHECK(split.pulses[1].start == 10.0);
  CHECK(split.pulses[2].start == doctest::Approx(10.1));
  check_matches_oracle(split);

  p = {};
  p.t_rephase = 5.05;
  CHECK_THROWS_AS(two_pulse_echo(p), ValidationError);
}

TEST_CASE("CRIB") {
  const auto seq = crib({});
  CHECK(seq.medium == Medium::Doppler);
  CHECK(predicted(seq, "e1") == 9.0);
  REQUIRE(seq.events.size() == 1);
  // The detuning swap takes effect as C2 switches on.
  CHECK(std::get<DetuningSignFlip>(seq.events[0]).time == 7.0);
  CHECK(seq.pulses[1].transition == Transition::Control23);
  CHECK(seq.pulses[1].k_label == "+k_C1");
  CHECK(seq.pulses[2].k_label == "-k_C1");
  check_matches_oracle(seq);

  CribParams p;
  p.t_control2 = p.t_control1 + p.duration; // no storage
  CHECK(predicted(crib(p), "e1") == doctest::Approx(2 * p.t_control1 - p.t_data + p.duration));
  p.t_control2 = 5.05;
  CHECK_THROWS_AS(crib(p), ValidationError);

  auto solid = crib({});
  solid.medium = Medium::Solid;
  CHECK_THROWS_AS(solid.validate(), ValidationError);
}

TEST_CASE("Raman drive") {
  RamanParams p;
  const auto seq = raman_drive(p);
  REQUIRE(seq.pulses.size() == 2);
  const double rd = seq.pulses[0].rabi(), rc = seq.pulses[1].rabi();
  CHECK(rd == doctest::Approx(rc));
  CHECK(std::hypot(rd, rc) * p.duration == doctest::Approx(8 * kPi));
  CHECK(echo_times(seq).empty());

  p.ratio_data_to_control = std::numeric_limits<double>::infinity();
  const auto direct = raman_drive(p);
  REQUIRE(direct.pulses.size() == 1);
  CHECK(direct.pulses[0].area == 8.0);

  p = {};
  p.direct_reference_start = 1.0;
  const auto with_ref = raman_drive(p);
  CHECK(with_ref.pulses.front().label == "Ddirect");
  p.direct_reference_start = 4.0;
  CHECK_THROWS_AS(raman_drive(p), ValidationError);
  p = {};
  p.ratio_data_to_control = 0;
  CHECK_THROWS_AS(raman_drive(p), ValidationError);
}

TEST_CASE("controlled echo signs and timing") {
  ControlledEchoParams p;
  p.controls = {{12.0, 2.0}};
  auto seq = controlled_echo(p);
  CHECK(prediction(seq, "e1").expected_sign == EchoSign::Absorptive);
  CHECK(predicted(seq, "e1") == 15.0);
  check_matches_oracle(seq);

  p.controls = {{12.0, 4.0}};
  CHECK(prediction(controlled_echo(p), "e1").expected_sign == EchoSign::Emissive);

  p.controls = {{11.0, 1.0}, {21.0, 3.0}};
  seq = controlled_echo(p);
  CHECK(predicted(seq, "e1") == 25.0);
  CHECK(prediction(seq, "e1").expected_sign == EchoSign::Emissive);
  check_matches_oracle(seq);

  p.controls = {{16.0, 2.0}};
  CHECK_THROWS_AS(controlled_echo(p), ValidationError); // after the natural echo
  p.controls = {{12.0, 3.0}};
  CHECK_THROWS_AS(controlled_echo(p), ValidationError); // odd multiple of pi
}

TEST_CASE("double rephasing") {
  const auto seq = double_rephasing({});
  CHECK(predicted(seq, "e1") == 15.0);
  CHECK(predicted(seq, "e2") == 49.0);
  CHECK(prediction(seq, "e2").expected_sign == EchoSign::Absorptive);
  CHECK(prediction(seq, "e1").assumed_silenced);
  check_matches_oracle(seq);

  DoubleRephasingParams p;
  p.t_rephase2 = 14.0;
  CHECK_THROWS_AS(double_rephasing(p), ValidationError);
}

TEST_CASE("controlled double rephasing") {
  const auto seq = cdr({});
  CHECK(predicted(seq, "e1") == 15.0);
  CHECK(predicted(seq, "e2") == doctest::Approx(44.9));
  CHECK(prediction(seq, "e2").expected_sign == EchoSign::Emissive);
  check_matches_oracle(seq);

  // Zero storage: the double-rephasing time, inverted by the 2 pi control.
  CdrParams p;
  p.t_control2 = p.t_control1 + p.duration;
  const auto quick = cdr(p);
  CHECK(predicted(quick, "e2") == doctest::Approx(25.0 + p.duration));
  CHECK(prediction(quick, "e2").expected_sign == EchoSign::Emissive);

  // Controls parked between R and e1.
  p = {};
  p.t_control1 = 11;
  p.t_control2 = 13;
  const auto early = cdr(p);
  CHECK(predicted(early, "e1") == 17.0);
  check_matches_oracle(early);

  p = {};
  p.t_control1 = 16;
  CHECK_THROWS_AS(cdr(p), ValidationError);
  p = {};
}

TEST_CASE("AFC pulse train") {
  const auto seq = afc_train({});
  CHECK(seq.pulses.size() == 21);
  CHECK(seq.pulses[18].start == 275.0);
  CHECK(seq.pulses[19].start == 285.0);
  CHECK(predicted(seq, "e1") == 350.0);
  REQUIRE(seq.data_pulse);
  CHECK(seq.pulses[*seq.data_pulse].start == 340.0);
  check_matches_oracle(seq);

  AfcParams p;
  p.readouts = {340, 365};
  const auto two = afc_train(p);
  CHECK(predicted(two, "e1") == 350.0);
  CHECK(predicted(two, "e2") == 375.0);
  check_matches_oracle(two);

  p = {};
  p.afc_tau = 30;
  CHECK_THROWS_AS(afc_train(p), ValidationError);
  p = {};
  p.n_sets = 0;
  CHECK_THROWS_AS(afc_train(p), ValidationError);
  p = {};
  p.readouts = {280};
  CHECK_THROWS_AS(afc_train(p), ValidationError);
}

TEST_CASE("dc Stark echo metadata and constraints") {
  DcStarkParams p;
  p.dc1 = {5.5, 4.0, kPi / 8, +1};
  p.dc2 = {20.0, 4.0, kPi / 8, +1};
  auto seq = dc_stark_echo(p);
  CHECK(prediction(seq, "e1").stark_silenced);
  CHECK(prediction(seq, "e2").expected_sign == EchoSign::Absorptive);
  CHECK(seq.events.size() == 2);
  check_matches_oracle(seq);

  p.dc2.polarity = -1;
  CHECK(prediction(dc_stark_echo(p), "e2").expected_sign == EchoSign::Emissive);

  p.dc1.delta_omega = kPi / 16;
  CHECK_FALSE(prediction(dc_stark_echo(p), "e1").stark_silenced);

  p = {};
  p.dc1 = {9.0, 2.0, 0.1, 1}; // straddles R1
  p.dc2 = {20.0, 4.0, 0.1, 1};
  CHECK_THROWS_AS(dc_stark_echo(p), ValidationError);

  p.dc1 = {5.5, 4.0, 0.1, 1};
  p.dc2 = {11.0, 2.0, 0.1, 1}; // before e1
  CHECK_THROWS_AS(dc_stark_echo(p), ValidationError);
  p.enforce_dc2_after_e1 = false;
  CHECK_NOTHROW(dc_stark_echo(p));
}

TEST_CASE("validation names overlapping pulses") {
  PulseSequence seq;
  seq.horizon = 20;
  Pulse a;
  a.label = "A";
  a.start = 1;
  a.duration = 1;
  a.area = 1;
  Pulse b = a;
  b.label = "B";
  b.start = 1.5;
  seq.pulses = {a, b};
  try {
    seq.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("A") != std::string::npos);
    CHECK(what.find("B") != std::string::npos);
  }
  // Different transitions may overlap (Raman drive).
  seq.pulses[1].transition = Transition::Control23;
  CHECK_NOTHROW(seq.validate());

  seq.pulses[1].duration = 0;
  CHECK_THROWS_AS(seq.validate(), ValidationError);
  seq.pulses[1].duration = 30;
  CHECK_THROWS_AS(seq.validate(), ValidationError);
}

TEST_CASE("custom sequences have no builder") {
  CHECK_THROWS_AS(build(ProtocolParams{}), ValidationError);
  CHECK(protocol_name(ProtocolParams{}) == "custom");
  CHECK(build(ProtocolParams{DoubleRephasingParams{}}) == double_rephasing({}));
}

TEST_CASE("enum strings") {
  CHECK(transition_from_string(to_string(Transition::Control23)) == Transition::Control23);
  CHECK(medium_from_string(to_string(Medium::Doppler)) == Medium::Doppler);
  CHECK_THROWS_AS(transition_from_string("1-3"), ValidationError);
  CHECK_THROWS_AS(medium_from_string("gas"), ValidationError);
}
