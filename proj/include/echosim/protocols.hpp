#pragma once

#include "echosim/common.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace echosim {

enum class Transition { Probe12, Control23 };
enum class Medium { Solid, Doppler };
enum class EchoSign { Emissive, Absorptive };

std::string to_string(Transition t);
std::string to_string(Medium m);
std::string to_string(EchoSign s);
Transition transition_from_string(const std::string& s);
Medium medium_from_string(const std::string& s);

/// Square pulse. `area` is in units of pi; the Rabi frequency follows from area and duration.
struct Pulse {
  std::string label;
  Transition transition = Transition::Probe12;
  double start = 0;    // us
  double duration = 0; // us
  double area = 0;     // multiples of pi
  double phase = 0;    // rad
  std::string k_label; // wave vector this pulse carries, e.g. "+k_D" or "-k_C1"

  double end() const { return start + duration; }
  double rabi() const;                // rad/us
  Complex<double> rabi_field() const; // rabi() * exp(i phase)
  bool operator==(const Pulse&) const = default;
};

/// Flips the sign of every group's effective detuning from `time` on.
struct DetuningSignFlip {
  double time = 0;
  bool operator==(const DetuningSignFlip&) const = default;
};

/// Shifts each group's optical detuning by polarity * stark_sign * delta_omega while active.
struct StarkWindow {
  double start = 0;
  double duration = 0;    // stark_tau, us
  double delta_omega = 0; // rad/us
  int polarity = +1;

  double end() const { return start + duration; }
  double phase() const { return delta_omega * duration; }
  bool operator==(const StarkWindow&) const = default;
};

using Event = std::variant<DetuningSignFlip, StarkWindow>;

struct PredictedEcho {
  std::string label;
  double time = 0;
  std::optional<EchoSign> expected_sign;
  bool assumed_silenced = false; // macroscopically silent through phase mismatch, not simulated
  bool stark_silenced = false;   // silenced by a Stark window inside the simulation
  bool operator==(const PredictedEcho&) const = default;
};

// Builder parameters, kept on the sequence so predictions can be recomputed independently.
struct TwoPulseParams {
  double t_data = 5, t_rephase = 10;
  double area_data = 0.5, area_rephase = 1;
  double duration = 0.1;
  bool split_rephase = false;
  bool backward_rephase = false;
  bool operator==(const TwoPulseParams&) const = default;
};
struct CribParams {
  double t_data = 3, t_control1 = 5, t_control2 = 7;
  double area_data = 0.5;
  double duration = 0.1;
  bool operator==(const CribParams&) const = default;
};
struct RamanParams {
  double t_start = 5;
  double area_total = 8;
  double ratio_data_to_control = 1;
  double duration = 2;
  std::optional<double> direct_reference_start; // optional D-only pulse of the same area first
  bool operator==(const RamanParams&) const = default;
};
struct ControlPulseSpec {
  double start = 0;
  double area = 0;
  bool operator==(const ControlPulseSpec&) const = default;
};
struct ControlledEchoParams {
  double t_data = 5, t_rephase = 10;
  double area_data = 0.5, area_rephase = 1;
  std::vector<ControlPulseSpec> controls; // one or two pulses on 2<->3
  double duration = 0.1;
  bool operator==(const ControlledEchoParams&) const = default;
};
struct DoubleRephasingParams {
  double t_data = 5, t_rephase = 10, t_rephase2 = 32;
  double area_data = 0.5, area_rephase = 1, area_rephase2 = 1;
  double duration = 0.1;
  bool backward_rephase = true;
  bool operator==(const DoubleRephasingParams&) const = default;
};
struct CdrParams {
  double t_data = 5, t_rephase = 10, t_rephase2 = 20, t_control1 = 20.1, t_control2 = 40;
  double area_data = 0.2;
  double duration = 0.1;
  bool backward_rephase = true;
  bool operator==(const CdrParams&) const = default;
};
struct AfcParams {
  int n_sets = 10;
  double first_set = 5;
  double set_period = 30;
  double afc_tau = 10;
  double weak_area = 0.2;
  double readout_area = 0.5;
  std::vector<double> readouts{340};
  double duration = 0.1;
  bool operator==(const AfcParams&) const = default;
};
struct DcStarkParams {
  double t_data = 5, t_rephase1 = 10, t_rephase2 = 32;
  double area_data = 0.5;
  double duration = 0.1;
  StarkWindow dc1;
  StarkWindow dc2;
  bool enforce_dc2_after_e1 = true;
  bool operator==(const DcStarkParams&) const = default;
};

using ProtocolParams = std::variant<std::monostate, TwoPulseParams, CribParams, RamanParams,
                                    ControlledEchoParams, DoubleRephasingParams, CdrParams,
                                    AfcParams, DcStarkParams>;

/// Protocol name as used in configuration files ("custom" for explicit sequences).
std::string protocol_name(const ProtocolParams& p);

/// Ordered pulses and events on a common time axis plus the builder's predictions.
struct PulseSequence {
  std::vector<Pulse> pulses; // sorted by start
  std::vector<Event> events;
  Medium medium = Medium::Solid;
  double horizon = 0;
  ProtocolParams protocol;
  std::vector<PredictedEcho> predicted;
  std::optional<std::size_t> data_pulse; // reference for echo sign and detection threshold

  double max_pulse_duration() const;
  /// Throws ValidationError naming the offending pulses or events.
  void validate() const;
  bool operator==(const PulseSequence&) const = default;
};

double event_time(const Event& e);

PulseSequence two_pulse_echo(const TwoPulseParams& p);
PulseSequence crib(const CribParams& p);
PulseSequence raman_drive(const RamanParams& p);
PulseSequence controlled_echo(const ControlledEchoParams& p);
PulseSequence double_rephasing(const DoubleRephasingParams& p);
PulseSequence cdr(const CdrParams& p);
PulseSequence afc_train(const AfcParams& p);
PulseSequence dc_stark_echo(const DcStarkParams& p);

/// Dispatch on the parameter type; monostate is rejected.
PulseSequence build(const ProtocolParams& p);

} // namespace echosim
