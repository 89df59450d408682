#include "echosim/oracles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace echosim {

namespace {

constexpr double kPi = std::numbers::pi;
const char* const kSymbolNames[KVector::kSymbols] = {"k_D", "k_R", "k_RR", "k_C1", "k_C2"};

double total_rabi(double rabi_data, double rabi_control) {
  const double omega = std::hypot(rabi_data, rabi_control);
  if (!(omega > 0)) {
    throw ValidationError("raman drive needs a non-zero Rabi frequency");
  }
  return omega;
}

// Which wave-vector symbol a pulse label stands for.
int symbol_for_label(const std::string& label) {
  if (label == "D") return KVector::D;
  if (label == "R" || label == "R'" || label == "R1") return KVector::R;
  if (label == "RR" || label == "R2") return KVector::RR;
  if (label == "C" || label == "C1") return KVector::C1;
  if (label == "C2") return KVector::C2;
  return -1;
}

} // namespace

StateAmplitudes two_level_state(double t, double rabi_data) {
  if (rabi_data < 0) {
    throw ValidationError("two_level_state: Rabi frequency must be non-negative");
  }
  const double half = 0.5 * rabi_data * t;
  return {std::cos(half), {0.0, std::sin(half)}, 0.0};
}

StateAmplitudes raman_state(double t, double rabi_data, double rabi_control) {
  const double omega = total_rabi(rabi_data, rabi_control);
  const double o2 = omega * omega;
  const double c = std::cos(0.5 * omega * t);
  const double s = std::sin(0.5 * omega * t);
  StateAmplitudes a;
  a.c1 = (rabi_control * rabi_control + rabi_data * rabi_data * c) / o2;
  a.c2 = {0.0, rabi_data / omega * s};
  a.c3 = rabi_data * rabi_control / o2 * (c - 1.0);
  return a;
}

Complex<double> raman_coherence(double t, double rabi_data, double rabi_control) {
  const double omega = total_rabi(rabi_data, rabi_control);
  const double c = std::cos(0.5 * omega * t);
  const double s = std::sin(0.5 * omega * t);
  const double num = rabi_data * (rabi_control * rabi_control + rabi_data * rabi_data * c) * s;
  return {0.0, -num / (omega * omega * omega)};
}

std::vector<PredictedTime> echo_times(const PulseSequence& seq) {
  struct Predictor {
    std::vector<PredictedTime> operator()(std::monostate) const {
      throw ValidationError("echo_times: sequence has no protocol tag");
    }
    std::vector<PredictedTime> operator()(const TwoPulseParams& p) const {
      if (p.split_rephase) {
        const double read = p.t_rephase + p.duration;
        return {{"e1", read + (p.t_rephase - p.t_data)}};
      }
      return {{"e1", 2 * p.t_rephase - p.t_data}};
    }
    std::vector<PredictedTime> operator()(const CribParams& p) const {
      return {{"e1", p.t_control2 + (p.t_control1 - p.t_data)}};
    }
    std::vector<PredictedTime> operator()(const RamanParams&) const { return {}; }
    std::vector<PredictedTime> operator()(const ControlledEchoParams& p) const {
      double t = 2 * p.t_rephase - p.t_data;
      if (p.controls.size() == 2) {
        t += p.controls[1].start - p.controls[0].start;
      }
      return {{"e1", t}};
    }
    std::vector<PredictedTime> operator()(const DoubleRephasingParams& p) const {
      const double e1 = 2 * p.t_rephase - p.t_data;
      return {{"e1", e1}, {"e2", 2 * p.t_rephase2 - e1}};
    }
    std::vector<PredictedTime> operator()(const CdrParams& p) const {
      const double e1 = 2 * p.t_rephase - p.t_data;
      const double storage = p.t_control2 - p.t_control1;
      // Controls parked before e1 delay e1 itself as well.
      const bool before_e1 = p.t_control1 + p.duration <= e1 && p.t_control1 < p.t_rephase2;
      return {{"e1", before_e1 ? e1 + storage : e1}, {"e2", 2 * p.t_rephase2 - e1 + storage}};
    }
    std::vector<PredictedTime> operator()(const AfcParams& p) const {
      std::vector<PredictedTime> out;
      for (std::size_t r = 0; r < p.readouts.size(); ++r) {
        out.push_back({p.readouts.size() == 1 ? "e1" : "e" + std::to_string(r + 1), p.readouts[r] + p.afc_tau});
      }
      return out;
    }
    std::vector<PredictedTime> operator()(const DcStarkParams& p) const {
      const double e1 = 2 * p.t_rephase1 - p.t_data;
      return {{"e1", e1}, {"e2", 2 * p.t_rephase2 - e1}};
    }
  };
  return std::visit(Predictor{}, seq.protocol);
}

double stark_amplitude_factor(double delta_omega, double tau) {
  if (tau < 0) {
    throw ValidationError("stark_amplitude_factor: tau must be non-negative");
  }
  return std::cos(delta_omega * tau);
}

bool stark_silent(double delta_omega, double tau, double tolerance) {
  return std::abs(stark_amplitude_factor(delta_omega, tau)) < tolerance;
}

KVector KVector::parse(const std::string& label) {
  std::string s = label;
  long sign = 1;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    sign = s[0] == '-' ? -1 : 1;
    s.erase(0, 1);
  }
  for (int i = 0; i < kSymbols; ++i) {
    if (s == kSymbolNames[i]) {
      KVector k;
      k.coeff_(i) = sign;
      return k;
    }
  }
  throw ValidationError("unknown wave-vector label '" + label + "'");
}

KVector KVector::substitute(const std::array<KVector, kSymbols>& images) const {
  KVector out;
  for (int i = 0; i < kSymbols; ++i) {
    out = out + coeff_(i) * images[static_cast<std::size_t>(i)];
  }
  return out;
}

std::string KVector::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < kSymbols; ++i) {
    const long c = coeff_(i);
    if (c == 0) {
      continue;
    }
    if (c < 0) {
      os << (first ? "-" : " - ");
    } else if (!first) {
      os << " + ";
    }
    if (std::abs(c) != 1) {
      os << std::abs(c);
    }
    os << kSymbolNames[i];
    first = false;
  }
  return first ? "0" : os.str();
}

std::array<KVector, KVector::kSymbols> beam_directions(const PulseSequence& seq) {
  std::array<KVector, KVector::kSymbols> images;
  for (int i = 0; i < KVector::kSymbols; ++i) {
    images[static_cast<std::size_t>(i)] = KVector::unit(static_cast<KVector::Symbol>(i));
  }
  for (const auto& p : seq.pulses) {
    const int sym = symbol_for_label(p.label);
    if (sym < 0 || p.k_label.empty()) {
      continue;
    }
    images[static_cast<std::size_t>(sym)] = KVector::parse(p.k_label);
  }
  return images;
}

std::vector<std::pair<std::string, KVector>> echo_wavevectors(const PulseSequence& seq) {
  using K = KVector;
  const K d = K::unit(K::D), r = K::unit(K::R), rr = K::unit(K::RR);
  const K c1 = K::unit(K::C1), c2 = K::unit(K::C2);
  const K e1 = 2 * r - d;
  struct Visitor {
    K d, r, rr, c1, c2, e1;
    std::vector<std::pair<std::string, K>> operator()(std::monostate) const {
      throw ValidationError("echo_wavevectors: sequence has no protocol tag");
    }
    std::vector<std::pair<std::string, K>> operator()(const TwoPulseParams&) const { return {{"e1", e1}}; }
    std::vector<std::pair<std::string, K>> operator()(const CribParams&) const {
      return {{"e1", d - c1 + c2}};
    }
    std::vector<std::pair<std::string, K>> operator()(const RamanParams&) const { return {}; }
    std::vector<std::pair<std::string, K>> operator()(const ControlledEchoParams& p) const {
      if (p.controls.size() == 2) {
        return {{"e1", e1 - c1 + c2}};
      }
      return {{"e1", e1}};
    }
    std::vector<std::pair<std::string, K>> operator()(const DoubleRephasingParams&) const {
      return {{"e1", e1}, {"e2", 2 * rr - e1}};
    }
    std::vector<std::pair<std::string, K>> operator()(const CdrParams&) const {
      return {{"e1", e1}, {"e2", -d + c1 + c2}};
    }
    std::vector<std::pair<std::string, K>> operator()(const AfcParams& p) const {
      std::vector<std::pair<std::string, K>> out;
      for (std::size_t i = 0; i < p.readouts.size(); ++i) {
        out.emplace_back(p.readouts.size() == 1 ? "e1" : "e" + std::to_string(i + 1), d);
      }
      return out;
    }
    std::vector<std::pair<std::string, K>> operator()(const DcStarkParams&) const {
      return {{"e1", e1}, {"e2", 2 * rr - e1}};
    }
  };
  return std::visit(Visitor{d, r, rr, c1, c2, e1}, seq.protocol);
}

KVector phase_match(const KVector& combination, const std::array<KVector, KVector::kSymbols>& beams) {
  return combination.substitute(beams);
}

double mismatch_phase(const PhaseMatchParams& p) {
  if (!(p.wavelength_nm > 0) || !(p.length_mm > 0) || !(p.index_fundamental > 0) || !(p.index_third > 0)) {
    throw ValidationError("phase-match parameters must all be positive");
  }
  const double wavelength_mm = p.wavelength_nm * 1e-6;
  return 2 * kPi / wavelength_mm * std::abs(p.index_third - p.index_fundamental) * p.length_mm;
}

bool mismatch_silent(const PhaseMatchParams& p) { return mismatch_phase(p) > kPi; }

} // namespace echosim
