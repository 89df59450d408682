#pragma once

#include "echosim/common.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace echosim {

/// State of one atom group in the Lambda system |1>, |3> (ground) and |2> (excited).
///
/// Only the upper triangle is stored: three real populations and the coherences
/// rho_12, rho_13, rho_23. Lower-triangle entries are conjugates by construction.
template <typename Scalar>
struct DensityMatrix3 {
  using Real = Scalar;
  using Cplx = Complex<Scalar>;
  using Populations = Eigen::Matrix<Scalar, 3, 1>;
  using Coherences = Eigen::Matrix<Cplx, 3, 1>;

  Populations pop = Populations::Zero();
  Coherences coh = Coherences::Zero();

  static DensityMatrix3 ground() {
    DensityMatrix3 s;
    s.pop(0) = Scalar(1);
    return s;
  }

  Scalar rho11() const { return pop(0); }
  Scalar rho22() const { return pop(1); }
  Scalar rho33() const { return pop(2); }
  Cplx rho12() const { return coh(0); }
  Cplx rho13() const { return coh(1); }
  Cplx rho23() const { return coh(2); }

  Scalar trace() const { return pop.sum(); }

  /// Element (i, j) with 1-based level indices.
  Cplx operator()(int i, int j) const {
    if (i == j) {
      return Cplx(pop(i - 1));
    }
    if (i > j) {
      return std::conj((*this)(j, i));
    }
    const int slot = (i == 1) ? (j - 2) : 2;
    return coh(slot);
  }

  Eigen::Matrix<Cplx, 3, 3> matrix() const {
    Eigen::Matrix<Cplx, 3, 3> m;
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) {
        m(i - 1, j - 1) = (*this)(i, j);
      }
    }
    return m;
  }

  bool all_finite() const {
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(pop(k)) || !std::isfinite(coh(k).real()) || !std::isfinite(coh(k).imag())) {
        return false;
      }
    }
    return true;
  }

  template <typename Other>
  DensityMatrix3<Other> cast() const {
    DensityMatrix3<Other> out;
    out.pop = pop.template cast<Other>();
    for (int k = 0; k < 3; ++k) {
      out.coh(k) = Complex<Other>(Other(coh(k).real()), Other(coh(k).imag()));
    }
    return out;
  }

  DensityMatrix3& operator+=(const DensityMatrix3& o) {
    pop += o.pop;
    coh += o.coh;
    return *this;
  }
  friend DensityMatrix3 operator+(DensityMatrix3 a, const DensityMatrix3& b) { return a += b; }
  friend DensityMatrix3 operator-(DensityMatrix3 a, const DensityMatrix3& b) {
    a.pop -= b.pop;
    a.coh -= b.coh;
    return a;
  }
  friend DensityMatrix3 operator*(Scalar s, DensityMatrix3 a) {
    a.pop *= s;
    a.coh *= s;
    return a;
  }
  friend DensityMatrix3 operator*(DensityMatrix3 a, Scalar s) { return s * a; }
};

/// Population decay i->j (Gamma) and total coherence dephasing (gamma), rad/us.
template <typename Scalar>
struct DecayRates {
  Scalar pop21 = 0;
  Scalar pop23 = 0;
  Scalar pop31 = 0;
  Scalar pop32 = 0;
  Scalar deph12 = 0;
  Scalar deph13 = 0;
  Scalar deph23 = 0;

  bool non_negative() const {
    return pop21 >= 0 && pop23 >= 0 && pop31 >= 0 && pop32 >= 0 && deph12 >= 0 && deph13 >= 0 &&
           deph23 >= 0;
  }
  bool operator==(const DecayRates&) const = default;
};

/// Complex Rabi frequencies and detunings of the two fields, rad/us.
template <typename Scalar>
struct DriveState {
  Complex<Scalar> rabi12{};
  Complex<Scalar> rabi23{};
  Scalar detuning12 = 0;
  Scalar detuning23 = 0;
};

/// Time derivative of the stored entries under the RWA Lambda Hamiltonian
/// H = -(1/2)(Omega_1 |1><2| + Omega_2 |3><2| + h.c.) - delta_1 |2><2| + (delta_2 - delta_1) |3><3|
/// plus population transfer and pure dephasing.
template <typename Scalar>
DensityMatrix3<Scalar> rhs(const DensityMatrix3<Scalar>& s, const DriveState<Scalar>& d,
                           const DecayRates<Scalar>& g) {
  using C = Complex<Scalar>;
  const C i(0, 1);
  const C half_i = i * Scalar(0.5);

  const C w1 = d.rabi12;
  const C w2 = d.rabi23;
  const C w1c = std::conj(w1);
  const C w2c = std::conj(w2);
  const C r12 = s.coh(0);
  const C r13 = s.coh(1);
  const C r23 = s.coh(2);
  const C r21 = std::conj(r12);
  const C r32 = std::conj(r23);
  const Scalar r11 = s.pop(0);
  const Scalar r22 = s.pop(1);
  const Scalar r33 = s.pop(2);

  // Drive-induced population flow; each term is real by construction.
  const Scalar flow12 = std::real(half_i * (w1 * r21 - w1c * r12)); // into |1> from |2>
  const Scalar flow32 = std::real(half_i * (w2 * r23 - w2c * r32)); // into |3> from |2>

  DensityMatrix3<Scalar> out;
  out.pop(0) = flow12 + g.pop21 * r22 + g.pop31 * r33;
  out.pop(1) = -flow12 - flow32 - (g.pop21 + g.pop23) * r22 + g.pop32 * r33;
  out.pop(2) = flow32 + g.pop23 * r22 - (g.pop31 + g.pop32) * r33;

  out.coh(0) = -half_i * w1 * C(r11 - r22) - half_i * w2 * r13 - i * d.detuning12 * r12 - g.deph12 * r12;
  out.coh(1) = -half_i * w2c * r12 + half_i * w1 * r23 - i * (d.detuning12 - d.detuning23) * r13 -
               g.deph13 * r13;
  out.coh(2) = -half_i * w2c * C(r22 - r33) + half_i * w1c * r13 + i * d.detuning23 * r23 -
               g.deph23 * r23;
  return out;
}

/// One classical fourth-order Runge-Kutta step with the drive held constant.
template <typename Scalar>
DensityMatrix3<Scalar> rk4_step(const DensityMatrix3<Scalar>& s, const DriveState<Scalar>& d,
                                const DecayRates<Scalar>& g, Scalar dt) {
  const Scalar half = dt / Scalar(2);
  const auto k1 = rhs(s, d, g);
  const auto k2 = rhs(s + half * k1, d, g);
  const auto k3 = rhs(s + half * k2, d, g);
  const auto k4 = rhs(s + dt * k3, d, g);
  return s + (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

/// A run of integration steps [begin, end) sharing one drive.
template <typename Scalar>
struct DriveSegment {
  Index begin = 0;
  Index end = 0;
  DriveState<Scalar> drive;
};

/// Piecewise-constant drive on a uniform step grid covering [0, steps).
template <typename Scalar>
struct DriveSchedule {
  Scalar dt = Scalar(0.01);
  Index steps = 0;
  std::vector<DriveSegment<Scalar>> segments; // sorted, non-overlapping
  DriveState<Scalar> idle{};                  // drive in gaps between segments

  Scalar horizon() const { return dt * Scalar(steps); }
};

/// A square pulse as seen by a single atom, before grid snapping.
struct SquarePulse {
  std::string label;
  double start = 0;
  double duration = 0;
  Complex<double> rabi12{};
  Complex<double> rabi23{};
};

/// Snap a time to the nearest grid index; a residual above `tolerance` is a ValidationError.
Index snap_to_grid(double t, double dt, double tolerance, const std::string& what);

/// Build a schedule for one atom with fixed detunings. Pulse edges are snapped to the grid;
/// a pulse that snaps to zero steps or ends after the horizon is rejected.
DriveSchedule<double> make_schedule(std::span<const SquarePulse> pulses, double detuning12,
                                    double detuning23, double dt, double horizon);

/// Called for every sample, including the initial state at index 0.
template <typename Scalar>
using SampleObserver = std::function<void(Index, const DensityMatrix3<Scalar>&)>;

/// Fixed-step RK4 over a schedule, streaming each sample to `observe`.
/// Throws NumericalError naming the step if the state becomes non-finite.
template <typename Scalar>
DensityMatrix3<Scalar> integrate(const DensityMatrix3<Scalar>& initial,
                                 const DriveSchedule<Scalar>& schedule,
                                 const DecayRates<Scalar>& decays,
                                 const SampleObserver<Scalar>& observe) {
  if (!(schedule.dt > 0)) {
    throw ValidationError("integrate: dt must be positive");
  }
  if (!initial.all_finite()) {
    throw NumericalError("integrate: non-finite initial state");
  }
  DensityMatrix3<Scalar> state = initial;
  if (observe) {
    observe(0, state);
  }
  Index step = 0;
  const auto& idle = schedule.idle;
  auto advance_to = [&](Index stop, const DriveState<Scalar>& drive) {
    for (; step < stop; ++step) {
      state = rk4_step(state, drive, decays, schedule.dt);
      if (!state.all_finite()) {
        throw NumericalError("integrate: non-finite state at step " + std::to_string(step + 1));
      }
      if (observe) {
        observe(step + 1, state);
      }
    }
  };
  for (const auto& seg : schedule.segments) {
    advance_to(seg.begin, idle);
    advance_to(seg.end, seg.drive);
  }
  advance_to(schedule.steps, idle);
  return state;
}

/// Full trajectory, one sample per step plus the initial state.
template <typename Scalar>
std::vector<DensityMatrix3<Scalar>> integrate(const DensityMatrix3<Scalar>& initial,
                                              const DriveSchedule<Scalar>& schedule,
                                              const DecayRates<Scalar>& decays) {
  std::vector<DensityMatrix3<Scalar>> out;
  out.reserve(static_cast<std::size_t>(schedule.steps + 1));
  integrate<Scalar>(initial, schedule, decays,
                    [&](Index, const DensityMatrix3<Scalar>& s) { out.push_back(s); });
  return out;
}

/// Convenience overload snapping square pulses onto the grid first.
std::vector<DensityMatrix3<double>> integrate(const DensityMatrix3<double>& initial,
                                              std::span<const SquarePulse> pulses,
                                              double detuning12, double detuning23,
                                              const DecayRates<double>& decays, double dt,
                                              double horizon);

using DensityMatrix3d = DensityMatrix3<double>;
using DecayRatesd = DecayRates<double>;
using DriveStated = DriveState<double>;

} // namespace echosim
