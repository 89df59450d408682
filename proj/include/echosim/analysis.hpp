#pragma once

#include "echosim/ensemble.hpp"
#include "echosim/protocols.hpp"

#include <optional>
#include <string>
#include <vector>

namespace echosim {

struct DetectedEcho {
  std::string label; // label of the matched prediction, empty if unmatched
  double time = 0;
  double amplitude = 0;    // collective |Im rho12| at the peak
  double signed_value = 0; // collective Im rho12 at the peak
  EchoSign sign = EchoSign::Emissive;
  std::optional<double> predicted_time;
  bool matched = false;
  double rho22 = 0;     // collective excited population at the peak
  double inversion = 0; // collective rho22 - rho11 at the peak
  bool assumed_silenced = false;
  bool stark_silenced = false;
};

struct EchoReport {
  std::vector<DetectedEcho> echoes; // ascending time
  std::vector<PredictedEcho> missing; // predictions with no detected peak
  int reference_sign = 0;            // sign of collective Im rho12 after the data pulse
  double reference_peak = 0;         // FID peak of the data pulse
  double threshold = 0;

  const DetectedEcho* find(const std::string& label) const;
};

struct DetectionOptions {
  double threshold_fraction = 0.05; // of the data-pulse FID peak
  double peak_window = 0.5;         // us; a peak dominates this neighbourhood
};

/// Local maxima of collective |Im rho12| away from pulses, classified against the data pulse.
EchoReport detect_echoes(const EnsembleTrace& trace, const PulseSequence& seq,
                         const DetectionOptions& options = {});

/// Largest collective |Im rho12| within `half_width` of `t`, with its time and signed value.
struct Extremum {
  double time = 0;
  double amplitude = 0;
  double signed_value = 0;
};
Extremum amplitude_near(const EnsembleTrace& trace, double t, double half_width);

struct BlochPoint {
  double time = 0;
  double re = 0;
  double im = 0;
  std::string segment; // "pre", a pulse label while it is on, "<label>+" after it
};

/// Coherence-plane path of the group at `delta_khz`.
std::vector<BlochPoint> bloch_trajectory(const EnsembleTrace& trace, const PulseSequence& seq,
                                         double delta_khz);

/// Collective rho22 - rho11 at the sample nearest `t`.
double inversion_check(const EnsembleTrace& trace, double t);

struct FidMetrics {
  double peak = 0;
  double peak_time = 0;
  std::optional<double> fall_time; // after the pulse end, until |rho12| < 10% of the peak
};

/// Free-induction decay of collective |rho12| after a pulse ending at `t_pulse_end`.
FidMetrics fid_metrics(const EnsembleTrace& trace, double t_pulse_end);

} // namespace echosim
