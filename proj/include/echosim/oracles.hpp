#pragma once

#include "echosim/common.hpp"
#include "echosim/protocols.hpp"

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace echosim {

/// Pure-state amplitudes of |1>, |2>, |3>.
struct StateAmplitudes {
  Complex<double> c1{}, c2{}, c3{};

  double norm() const { return std::norm(c1) + std::norm(c2) + std::norm(c3); }
  Complex<double> rho12() const { return c1 * std::conj(c2); }
};

/// Resonant two-level Rabi flopping from |1>.
StateAmplitudes two_level_state(double t, double rabi_data);

/// Resonant Raman drive from |1> with both fields on; Omega = sqrt(Omega_D^2 + Omega_C^2).
StateAmplitudes raman_state(double t, double rabi_data, double rabi_control);

/// rho_12 of raman_state in closed form.
Complex<double> raman_coherence(double t, double rabi_data, double rabi_control);

struct PredictedTime {
  std::string label;
  double time = 0;
};

/// Echo times recomputed from the protocol parameters alone; custom sequences are rejected.
std::vector<PredictedTime> echo_times(const PulseSequence& seq);

/// Branch interference factor of a two-branch Stark splitting.
double stark_amplitude_factor(double delta_omega, double tau);
bool stark_silent(double delta_omega, double tau, double tolerance = 1e-6);

/// Integer wave-vector combination over {k_D, k_R, k_RR, k_C1, k_C2}.
class KVector {
public:
  enum Symbol { D = 0, R, RR, C1, C2 };
  static constexpr int kSymbols = 5;
  using Coefficients = Eigen::Matrix<long, kSymbols, 1>;

  KVector() : coeff_(Coefficients::Zero()) {}
  explicit KVector(const Coefficients& c) : coeff_(c) {}
  static KVector unit(Symbol s) {
    KVector k;
    k.coeff_(s) = 1;
    return k;
  }
  /// Parses "+k_D", "-k_C1", "k_RR".
  static KVector parse(const std::string& label);

  long operator[](Symbol s) const { return coeff_(s); }
  const Coefficients& coefficients() const { return coeff_; }

  KVector operator+(const KVector& o) const { return KVector(coeff_ + o.coeff_); }
  KVector operator-(const KVector& o) const { return KVector(coeff_ - o.coeff_); }
  KVector operator-() const { return KVector(-coeff_); }
  friend KVector operator*(long a, const KVector& k) { return KVector(a * k.coeff_); }
  bool operator==(const KVector& o) const { return coeff_ == o.coeff_; }

  /// Substitute each symbol by its expression (e.g. R -> -D), returning a combination of the
  /// images; symbols mapped to themselves stay put.
  KVector substitute(const std::array<KVector, kSymbols>& images) const;
  std::string to_string() const;

private:
  Coefficients coeff_;
};

/// Images of each symbol in terms of the physical beams carried by the sequence's pulses.
std::array<KVector, KVector::kSymbols> beam_directions(const PulseSequence& seq);

/// Symbolic echo wave vectors for the sequence's protocol (before substitution).
std::vector<std::pair<std::string, KVector>> echo_wavevectors(const PulseSequence& seq);

/// Apply beam_directions to a combination.
KVector phase_match(const KVector& combination, const std::array<KVector, KVector::kSymbols>& beams);

struct PhaseMatchParams {
  double wavelength_nm = 0;
  double length_mm = 0;
  double index_fundamental = 0; // n(omega)
  double index_third = 0;       // n(3 omega)
};

/// (2 pi / lambda) |n(3 omega) - n(omega)| L in radians.
double mismatch_phase(const PhaseMatchParams& p);
/// Silent once the mismatch phase exceeds pi.
bool mismatch_silent(const PhaseMatchParams& p);

} // namespace echosim
