#include "echosim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace echosim {

Index snap_to_grid(double t, double dt, double tolerance, const std::string& what) {
  if (!std::isfinite(t)) {
    throw ValidationError(what + ": time is not finite");
  }
  const double steps = t / dt;
  const double snapped = std::round(steps);
  const double residual = std::abs(steps - snapped) * dt;
  if (residual > tolerance) {
    std::ostringstream msg;
    msg << what << ": time " << t << " us is " << residual << " us off the dt=" << dt
        << " grid (tolerance " << tolerance << ")";
    throw ValidationError(msg.str());
  }
  return static_cast<Index>(snapped);
}

DriveSchedule<double> make_schedule(std::span<const SquarePulse> pulses, double detuning12,
                                    double detuning23, double dt, double horizon) {
  if (!(dt > 0)) {
    throw ValidationError("schedule: dt must be positive");
  }
  DriveSchedule<double> schedule;
  schedule.dt = dt;
  schedule.steps = snap_to_grid(horizon, dt, 0.5 * dt, "horizon");
  schedule.idle.detuning12 = detuning12;
  schedule.idle.detuning23 = detuning23;

  struct Edge {
    Index begin;
    Index end;
    const SquarePulse* pulse;
  };
  std::vector<Edge> edges;
  std::vector<Index> cuts{0, schedule.steps};
  for (const auto& p : pulses) {
    const Index b = snap_to_grid(p.start, dt, 0.5 * dt, "pulse " + p.label + " start");
    const Index e = snap_to_grid(p.start + p.duration, dt, 0.5 * dt, "pulse " + p.label + " end");
    if (e <= b) {
      throw ValidationError("pulse " + p.label + " is shorter than one step");
    }
    if (b < 0 || e > schedule.steps) {
      throw ValidationError("pulse " + p.label + " lies outside [0, horizon]");
    }
    edges.push_back({b, e, &p});
    cuts.push_back(b);
    cuts.push_back(e);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    DriveSegment<double> seg;
    seg.begin = cuts[k];
    seg.end = cuts[k + 1];
    seg.drive.detuning12 = detuning12;
    seg.drive.detuning23 = detuning23;
    for (const auto& e : edges) {
      if (e.begin <= seg.begin && seg.end <= e.end) {
        seg.drive.rabi12 += e.pulse->rabi12;
        seg.drive.rabi23 += e.pulse->rabi23;
      }
    }
    schedule.segments.push_back(seg);
  }
  return schedule;
}

std::vector<DensityMatrix3<double>> integrate(const DensityMatrix3<double>& initial,
                                              std::span<const SquarePulse> pulses,
                                              double detuning12, double detuning23,
                                              const DecayRates<double>& decays, double dt,
                                              double horizon) {
  const auto schedule = make_schedule(pulses, detuning12, detuning23, dt, horizon);
  return integrate<double>(initial, schedule, decays);
}

} // namespace echosim
