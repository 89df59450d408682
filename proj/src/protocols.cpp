#include "echosim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace echosim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHorizonMargin = 5.0; // us of free evolution kept after the last feature

template <typename T>
std::string fmt(T v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw ValidationError(what);
  }
}

Pulse make_pulse(std::string label, Transition tr, double start, double duration, double area,
                 std::string k_label) {
  Pulse p;
  p.label = std::move(label);
  p.transition = tr;
  p.start = start;
  p.duration = duration;
  p.area = area;
  p.k_label = std::move(k_label);
  return p;
}

void finish(PulseSequence& seq) {
  std::stable_sort(seq.pulses.begin(), seq.pulses.end(),
                   [](const Pulse& a, const Pulse& b) { return a.start < b.start; });
  double last = 0;
  for (const auto& p : seq.pulses) {
    last = std::max(last, p.end());
  }
  for (const auto& e : seq.events) {
    last = std::max(last, event_time(e));
    if (const auto* w = std::get_if<StarkWindow>(&e)) {
      last = std::max(last, w->end());
    }
  }
  for (const auto& e : seq.predicted) {
    last = std::max(last, e.time);
  }
  seq.horizon = std::ceil(last + kHorizonMargin);
  seq.validate();
}

std::size_t index_of(const PulseSequence& seq, const std::string& label) {
  for (std::size_t i = 0; i < seq.pulses.size(); ++i) {
    if (seq.pulses[i].label == label) {
      return i;
    }
  }
  throw ValidationError("no pulse labelled " + label);
}

bool near_integer(double x, double tol = 1e-9) { return std::abs(x - std::round(x)) <= tol; }

} // namespace

std::string to_string(Transition t) { return t == Transition::Probe12 ? "1-2" : "2-3"; }
std::string to_string(Medium m) { return m == Medium::Solid ? "solid" : "doppler"; }
std::string to_string(EchoSign s) { return s == EchoSign::Emissive ? "emissive" : "absorptive"; }

Transition transition_from_string(const std::string& s) {
  if (s == "1-2") {
    return Transition::Probe12;
  }
  if (s == "2-3") {
    return Transition::Control23;
  }
  throw ValidationError("unknown transition '" + s + "' (expected 1-2 or 2-3)");
}

Medium medium_from_string(const std::string& s) {
  if (s == "solid") {
    return Medium::Solid;
  }
  if (s == "doppler") {
    return Medium::Doppler;
  }
  throw ValidationError("unknown medium '" + s + "' (expected solid or doppler)");
}

double Pulse::rabi() const { return area * kPi / duration; }

Complex<double> Pulse::rabi_field() const { return std::polar(rabi(), phase); }

double event_time(const Event& e) {
  return std::visit(
      [](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, DetuningSignFlip>) {
          return ev.time;
        } else {
          return ev.start;
        }
      },
      e);
}

std::string protocol_name(const ProtocolParams& p) {
  struct Namer {
    std::string operator()(std::monostate) const { return "custom"; }
    std::string operator()(const TwoPulseParams&) const { return "two_pulse_echo"; }
    std::string operator()(const CribParams&) const { return "crib"; }
    std::string operator()(const RamanParams&) const { return "raman_drive"; }
    std::string operator()(const ControlledEchoParams&) const { return "controlled_echo"; }
    std::string operator()(const DoubleRephasingParams&) const { return "double_rephasing"; }
    std::string operator()(const CdrParams&) const { return "cdr"; }
    std::string operator()(const AfcParams&) const { return "afc_train"; }
    std::string operator()(const DcStarkParams&) const { return "dc_stark_echo"; }
  };
  return std::visit(Namer{}, p);
}

double PulseSequence::max_pulse_duration() const {
  double d = 0;
  for (const auto& p : pulses) {
    d = std::max(d, p.duration);
  }
  return d;
}

void PulseSequence::validate() const {
  for (const auto& p : pulses) {
    require(std::isfinite(p.start) && std::isfinite(p.duration) && std::isfinite(p.area) &&
                std::isfinite(p.phase),
            "pulse " + p.label + ": non-finite field");
    require(p.duration > 0, "pulse " + p.label + ": duration must be positive");
    require(p.area > 0, "pulse " + p.label + ": area must be positive");
    require(p.start >= 0, "pulse " + p.label + ": start must be non-negative");
    require(p.end() <= horizon + 1e-9,
            "pulse " + p.label + ": ends at " + fmt(p.end()) + " after the horizon " + fmt(horizon));
  }
  for (std::size_t a = 0; a < pulses.size(); ++a) {
    for (std::size_t b = a + 1; b < pulses.size(); ++b) {
      const auto& x = pulses[a];
      const auto& y = pulses[b];
      if (x.transition != y.transition) {
        continue;
      }
      const bool overlap = x.start < y.end() - 1e-9 && y.start < x.end() - 1e-9;
      require(!overlap, "pulses " + x.label + " and " + y.label + " overlap on transition " +
                            to_string(x.transition));
    }
  }
  for (const auto& e : events) {
    if (const auto* f = std::get_if<DetuningSignFlip>(&e)) {
      require(medium == Medium::Doppler, "detuning sign flips require a doppler medium");
      require(f->time >= 0 && f->time <= horizon, "detuning sign flip outside [0, horizon]");
    } else {
      const auto& w = std::get<StarkWindow>(e);
      require(w.duration > 0, "stark window: duration must be positive");
      require(w.delta_omega >= 0, "stark window: delta_omega must be non-negative");
      require(w.polarity == 1 || w.polarity == -1, "stark window: polarity must be +1 or -1");
      require(w.start >= 0 && w.end() <= horizon + 1e-9, "stark window outside [0, horizon]");
    }
  }
  if (data_pulse) {
    require(*data_pulse < pulses.size(), "data pulse index out of range");
  }
}

PulseSequence two_pulse_echo(const TwoPulseParams& p) {
  require(p.duration > 0, "two_pulse_echo: duration must be positive");
  const double rephase_end = p.t_rephase + (p.split_rephase ? 2 * p.duration : p.duration);
  require(p.t_rephase >= p.t_data + p.duration,
          "two_pulse_echo: R at " + fmt(p.t_rephase) + " must follow the end of D at " +
              fmt(p.t_data + p.duration));
  PulseSequence seq;
  seq.protocol = p;
  const std::string k_r = p.backward_rephase ? "-k_D" : "+k_D";
  seq.pulses.push_back(make_pulse("D", Transition::Probe12, p.t_data, p.duration, p.area_data, "+k_D"));
  double echo = 2 * p.t_rephase - p.t_data;
  if (p.split_rephase) {
    seq.pulses.push_back(make_pulse("R", Transition::Probe12, p.t_rephase, p.duration, p.area_rephase, k_r));
    seq.pulses.push_back(make_pulse("R'", Transition::Probe12, p.t_rephase + p.duration, p.duration,
                                    p.area_rephase, k_r));
    // The second half acts as the read pulse of a stimulated echo.
    echo = p.t_rephase + p.duration + (p.t_rephase - p.t_data);
  } else {
    seq.pulses.push_back(make_pulse("R", Transition::Probe12, p.t_rephase, p.duration, p.area_rephase, k_r));
  }
  (void)rephase_end;
  seq.predicted.push_back({"e1", echo, EchoSign::Emissive, false, false});
  seq.data_pulse = 0;
  finish(seq);
  return seq;
}

PulseSequence crib(const CribParams& p) {
  require(p.duration > 0, "crib: duration must be positive");
  require(p.t_control1 >= p.t_data + p.duration, "crib: C1 must follow D");
  require(p.t_control2 >= p.t_control1 + p.duration, "crib: C2 must follow C1");
  PulseSequence seq;
  seq.protocol = p;
  seq.medium = Medium::Doppler;
  seq.pulses.push_back(make_pulse("D", Transition::Probe12, p.t_data, p.duration, p.area_data, "+k_D"));
  seq.pulses.push_back(make_pulse("C1", Transition::Control23, p.t_control1, p.duration, 1.0, "+k_C1"));
  seq.pulses.push_back(make_pulse("C2", Transition::Control23, p.t_control2, p.duration, 1.0, "-k_C1"));
  // The swapped detuning governs everything C2 hands back to the optical transition, so the
  // flip takes effect as C2 turns on.
  seq.events.push_back(DetuningSignFlip{p.t_control2});
  seq.predicted.push_back(
      {"e1", p.t_control2 + (p.t_control1 - p.t_data), EchoSign::Emissive, false, false});
  seq.data_pulse = 0;
  finish(seq);
  return seq;
}

PulseSequence raman_drive(const RamanParams& p) {
  require(p.duration > 0, "raman_drive: duration must be positive");
  require(p.area_total > 0, "raman_drive: area must be positive");
  require(p.ratio_data_to_control > 0, "raman_drive: ratio must be positive");
  PulseSequence seq;
  seq.protocol = p;
  const double r = p.ratio_data_to_control;
  // Split the total (generalized) Rabi area between the fields: Omega^2 = Omega_D^2 + Omega_C^2.
  double area_d = p.area_total;
  double area_c = 0;
  if (std::isfinite(r)) {
    area_d = p.area_total * r / std::sqrt(1 + r * r);
    area_c = p.area_total / std::sqrt(1 + r * r);
  }
  if (p.direct_reference_start) {
    require(*p.direct_reference_start + p.duration <= p.t_start,
            "raman_drive: the direct reference pulse must end before the Raman pulse");
    seq.pulses.push_back(make_pulse("Ddirect", Transition::Probe12, *p.direct_reference_start,
                                    p.duration, p.area_total, "+k_D"));
  }
  seq.pulses.push_back(make_pulse("D", Transition::Probe12, p.t_start, p.duration, area_d, "+k_D"));
  if (area_c > 0) {
    seq.pulses.push_back(make_pulse("C", Transition::Control23, p.t_start, p.duration, area_c, "+k_C1"));
  }
  seq.data_pulse = 0;
  finish(seq);
  return seq;
}

PulseSequence controlled_echo(const ControlledEchoParams& p) {
  require(p.duration > 0, "controlled_echo: duration must be positive");
  require(p.t_rephase >= p.t_data + p.duration, "controlled_echo: R must follow D");
  require(p.controls.size() == 1 || p.controls.size() == 2,
          "controlled_echo: expected one or two control pulses");
  const double natural = 2 * p.t_rephase - p.t_data;
  double total_area = 0;
  for (std::size_t i = 0; i < p.controls.size(); ++i) {
    const auto& c = p.controls[i];
    require(c.area > 0, "controlled_echo: control area must be positive");
    require(c.start >= p.t_rephase + p.duration, "controlled_echo: controls must follow R");
    if (i > 0) {
      require(c.start >= p.controls[i - 1].start + p.duration,
              "controlled_echo: C2 must follow the end of C1");
    }
    total_area += c.area;
  }
  require(p.controls.front().start < natural,
          "controlled_echo: C1 at " + fmt(p.controls.front().start) +
              " is after the natural echo time " + fmt(natural));
  require(near_integer(total_area / 2), "controlled_echo: total control area " + fmt(total_area) +
                                            "pi is not a multiple of 2pi");

  PulseSequence seq;
  seq.protocol = p;
  seq.pulses.push_back(make_pulse("D", Transition::Probe12, p.t_data, p.duration, p.area_data, "+k_D"));
  seq.pulses.push_back(make_pulse("R", Transition::Probe12, p.t_rephase, p.duration, p.area_rephase, "+k_D"));
  double echo = natural;
  if (p.controls.size() == 1) {
    seq.pulses.push_back(make_pulse("C", Transition::Control23, p.controls[0].start, p.duration,
                                    p.controls[0].area, "+k_C1"));
  } else {
    seq.pulses.push_back(make_pulse("C1", Transition::Control23, p.controls[0].start, p.duration,
                                    p.controls[0].area, "+k_C1"));
    seq.pulses.push_back(make_pulse("C2", Transition::Control23, p.controls[1].start, p.duration,
                                    p.controls[1].area, "-k_C1"));
    echo += p.controls[1].start - p.controls[0].start;
  }
  // Each 2pi of control Rabi flopping inverts the optical coherence.
  const long turns = std::lround(total_area / 2);
  const EchoSign sign = (turns % 2 == 0) ? EchoSign::Emissive : EchoSign::Absorptive;
  seq.predicted.push_back({"e1", echo, sign, false, false});
  seq.data_pulse = 0;
  finish(seq);
  return seq;
}

PulseSequence double_rephasing(const DoubleRephasingParams& p) {
  require(p.duration > 0, "double_rephasing: duration must be positive");
  require(p.t_rephase >= p.t_data + p.duration, "double_rephasing: R must follow D");
  const double e1 = 2 * p.t_rephase - p.t_data;
  require(p.t_rephase2 > e1, "double_rephasing: RR at " + fmt(p.t_rephase2) +
                                 " must arrive after e1 at " + fmt(e1));
  PulseSequence seq;
  seq.protocol = p;
  const std::string k_r = p.backward_rephase ? "-k_D" : "+k_D";
  seq.pulses.push_back(make_pulse("D", Transition::Probe12, p.t_data, p.duration, p.area_data, "+k_D"));
  seq.pulses.push_back(make_pulse("R", Transition::Probe12, p.t_rephase, p.duration, p.area_rephase, k_r));
  seq.pulses.push_back(make_pulse("RR", Transition::Probe12, p.t_rephase2, p.duration, p.area_rephase2, k_r));
  seq.predicted.push_back({"e1", e1, EchoSign::Emissive, true, false});
  seq.predicted.push_back({"e2", 2 * p.t_rephase2 - e1, EchoSign::Absorptive, false, false});
  seq.data_pulse = 0;
  finish(seq);
  return seq;
}

PulseSequence cdr(const CdrParams& p) {
  require(p.duration > 0, "cdr: duration must be positive");
  require(p.t_rephase >= p.t_data + p.duration, "cdr: R must follow D");
  const double e1 = 2 * p.t_rephase - p.t_data;
  require(p.t_rephase2 > e1, "cdr: RR must arrive after e1");
  const bool after_rr = p.t_control1 >= p.t_rephase2 + p.duration;
  const bool before_e1 = p.t_control1 >= p.t_rephase + p.duration && p.t_control1 + p.duration <= e1;
  require(after_rr || before_e1, "cdr: C1 must follow RR, or sit between R and e1");
  require(p.t_control2 >= p.t_control1 + p.duration, "cdr: C2 must follow C1");
  if (before_e1) {
    require(p.t_control2 + p.duration <= e1, "cdr: with C1 before e1, C2 must also precede e1");
  }
  const double e2 = 2 * p.t_rephase2 - e1 + (p.t_control2 - p.t_control1);
  require(p.t_control2 + p.duration <= e2, "cdr: C2 must precede the shifted e2");

  PulseSequence seq;
  seq.protocol = p;
  const std::string k_r = p.backward_rephase ? "-k_D" : "+k_D";
  seq.pulses.push_back(make_pulse("D", Transition::Probe12, p.t_data, p.duration, p.area_data, "+k_D"));
  seq.pulses.push_back(make_pulse("R", Transition::Probe12, p.t_rephase, p.duration, 1.0, k_r));
  seq.pulses.push_back(make_pulse("RR", Transition::Probe12, p.t_rephase2, p.duration, 1.0, k_r));
  seq.pulses.push_back(make_pulse("C1", Transition::Control23, p.t_control1, p.duration, 1.0, "+k_C1"));
  seq.pulses.push_back(make_pulse("C2", Transition::Control23, p.t_control2, p.duration, 1.0, "-k_C1"));
  seq.predicted.push_back({"e1", before_e1 ? e1 + (p.t_control2 - p.t_control1) : e1,
                           EchoSign::Emissive, true, false});
  seq.predicted.push_back({"e2", e2, EchoSign::Emissive, false, false});
  seq.data_pulse = 0;
  finish(seq);
  return seq;
}

PulseSequence afc_train(const AfcParams& p) {
  require(p.n_sets >= 1, "afc_train: need at least one pulse pair");
  require(p.duration > 0, "afc_train: duration must be positive");
  require(p.afc_tau >= p.duration && p.afc_tau < p.set_period,
          "afc_train: the pair delay must be at least one pulse long and shorter than the set period");
  require(p.afc_tau + p.duration <= p.set_period, "afc_train: overlapping pulse pairs");
  require(!p.readouts.empty(), "afc_train: need at least one readout");
  PulseSequence seq;
  seq.protocol = p;
  double last_end = 0;
  for (int s = 0; s < p.n_sets; ++s) {
    const double t0 = p.first_set + s * p.set_period;
    seq.pulses.push_back(make_pulse("P" + std::to_string(s + 1) + "a", Transition::Probe12, t0,
                                    p.duration, p.weak_area, "+k_D"));
    seq.pulses.push_back(make_pulse("P" + std::to_string(s + 1) + "b", Transition::Probe12,
                                    t0 + p.afc_tau, p.duration, p.weak_area, "+k_D"));
    last_end = t0 + p.afc_tau + p.duration;
  }
  double prev = last_end;
  for (std::size_t r = 0; r < p.readouts.size(); ++r) {
    const double t = p.readouts[r];
    require(t >= prev, "afc_train: readout " + std::to_string(r + 1) + " at " + fmt(t) +
                           " overlaps the pulse train or a previous readout");
    const std::string label = p.readouts.size() == 1 ? "R" : "R" + std::to_string(r + 1);
    seq.pulses.push_back(make_pulse(label, Transition::Probe12, t, p.duration, p.readout_area, "+k_D"));
    seq.predicted.push_back({p.readouts.size() == 1 ? "e1" : "e" + std::to_string(r + 1),
                             t + p.afc_tau, std::nullopt, false, false});
    prev = t + p.duration;
  }
  finish(seq);
  seq.data_pulse = index_of(seq, p.readouts.size() == 1 ? "R" : "R1");
  return seq;
}

PulseSequence dc_stark_echo(const DcStarkParams& p) {
  require(p.duration > 0, "dc_stark_echo: duration must be positive");
  require(p.t_rephase1 >= p.t_data + p.duration, "dc_stark_echo: R1 must follow D");
  const double e1 = 2 * p.t_rephase1 - p.t_data;
  require(p.t_rephase2 > e1, "dc_stark_echo: R2 must arrive after e1");
  const double e2 = 2 * p.t_rephase2 - e1;

  PulseSequence seq;
  seq.protocol = p;
  seq.pulses.push_back(make_pulse("D", Transition::Probe12, p.t_data, p.duration, p.area_data, "+k_D"));
  seq.pulses.push_back(make_pulse("R1", Transition::Probe12, p.t_rephase1, p.duration, 1.0, "+k_D"));
  seq.pulses.push_back(make_pulse("R2", Transition::Probe12, p.t_rephase2, p.duration, 1.0, "+k_D"));

  auto check_window = [&](const StarkWindow& w, const std::string& name) {
    for (const auto& pulse : seq.pulses) {
      const bool overlap = w.start < pulse.end() - 1e-9 && pulse.start < w.end() - 1e-9;
      require(!overlap, "dc_stark_echo: " + name + " overlaps pulse " + pulse.label);
    }
  };
  check_window(p.dc1, "DC1");
  check_window(p.dc2, "DC2");
  require(p.dc1.start >= p.t_data + p.duration && p.dc1.end() <= p.t_rephase1,
          "dc_stark_echo: DC1 must sit between D and R1");
  require(p.dc2.start >= p.t_rephase1 + p.duration && p.dc2.end() <= p.t_rephase2,
          "dc_stark_echo: DC2 must sit between R1 and R2");
  if (p.enforce_dc2_after_e1) {
    require(p.dc2.start >= e1, "dc_stark_echo: DC2 at " + fmt(p.dc2.start) +
                                   " cannot come before the first echo at " + fmt(e1));
  }
  seq.events.push_back(p.dc1);
  seq.events.push_back(p.dc2);

  // The branch interference factor for DC1 is cos(phase); silent at odd multiples of pi/2.
  const double turns = p.dc1.phase() / (kPi / 2);
  const bool silent = near_integer(turns, 1e-6) && (std::lround(turns) % 2 != 0);
  seq.predicted.push_back({"e1", e1, EchoSign::Emissive, false, silent});
  const EchoSign e2_sign = (p.dc1.polarity == p.dc2.polarity) ? EchoSign::Absorptive : EchoSign::Emissive;
  seq.predicted.push_back({"e2", e2, e2_sign, false, false});
  seq.data_pulse = 0;
  finish(seq);
  return seq;
}

PulseSequence build(const ProtocolParams& p) {
  struct Builder {
    PulseSequence operator()(std::monostate) const {
      throw ValidationError("no protocol builder for an explicit (custom) sequence");
    }
    PulseSequence operator()(const TwoPulseParams& q) const { return two_pulse_echo(q); }
    PulseSequence operator()(const CribParams& q) const { return crib(q); }
    PulseSequence operator()(const RamanParams& q) const { return raman_drive(q); }
    PulseSequence operator()(const ControlledEchoParams& q) const { return controlled_echo(q); }
    PulseSequence operator()(const DoubleRephasingParams& q) const { return double_rephasing(q); }
    PulseSequence operator()(const CdrParams& q) const { return cdr(q); }
    PulseSequence operator()(const AfcParams& q) const { return afc_train(q); }
    PulseSequence operator()(const DcStarkParams& q) const { return dc_stark_echo(q); }
  };
  return std::visit(Builder{}, p);
}

} // namespace echosim
