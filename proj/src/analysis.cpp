#include "echosim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace echosim {

namespace {

Eigen::VectorXd abs_im12(const EnsembleTrace& trace) {
  return trace.collective_series(Observable::ImRho12).cwiseAbs();
}

// Vertex offset (in samples) of the parabola through three neighbouring samples.
double parabolic_offset(double left, double mid, double right) {
  const double curvature = left - 2 * mid + right;
  if (curvature >= 0) {
    return 0;
  }
  return std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5);
}

} // namespace

const DetectedEcho* EchoReport::find(const std::string& label) const {
  for (const auto& e : echoes) {
    if (e.label == label) {
      return &e;
    }
  }
  return nullptr;
}

EchoReport detect_echoes(const EnsembleTrace& trace, const PulseSequence& seq,
                         const DetectionOptions& options) {
  if (std::abs(trace.horizon() - seq.horizon) > trace.dt) {
    std::ostringstream msg;
    msg << "trace horizon " << trace.horizon() << " does not match sequence horizon " << seq.horizon;
    throw ValidationError(msg.str());
  }
  EchoReport report;
  const Eigen::VectorXd amp = abs_im12(trace);
  const Eigen::VectorXd im = trace.collective_series(Observable::ImRho12);
  const Index n = amp.size();
  if (n < 3) {
    return report;
  }

  // Reference: the data pulse's own coherence right after it ends.
  if (seq.data_pulse) {
    const auto& d = seq.pulses[*seq.data_pulse];
    const Index begin = trace.sample_near(d.start);
    const Index end = std::min(n - 1, trace.sample_near(d.end() + d.duration));
    Index best = begin;
    for (Index k = begin; k <= end; ++k) {
      if (amp(k) > amp(best)) {
        best = k;
      }
    }
    report.reference_peak = amp(best);
    const double at_end = im(trace.sample_near(d.end()));
    report.reference_sign = at_end > 0 ? 1 : (at_end < 0 ? -1 : 0);
  } else {
    report.reference_peak = amp.maxCoeff();
  }
  report.threshold = options.threshold_fraction * report.reference_peak;
  if (!(report.reference_peak > 1e-12)) {
    report.missing = seq.predicted;
    return report;
  }

  std::vector<bool> excluded(static_cast<std::size_t>(n), false);
  for (const auto& p : seq.pulses) {
    const Index b = std::max<Index>(0, static_cast<Index>(std::floor((p.start - p.duration) / trace.dt)));
    const Index e = std::min(n - 1, static_cast<Index>(std::ceil((p.end() + p.duration) / trace.dt)));
    for (Index k = b; k <= e; ++k) {
      excluded[static_cast<std::size_t>(k)] = true;
    }
  }

  const Index half = std::max<Index>(1, static_cast<Index>(std::llround(options.peak_window / trace.dt)));
  for (Index k = 1; k + 1 < n; ++k) {
    if (excluded[static_cast<std::size_t>(k)] || amp(k) <= report.threshold) {
      continue;
    }
    const Index lo = std::max<Index>(0, k - half);
    const Index hi = std::min(n - 1, k + half);
    bool is_peak = true;
    for (Index q = lo; q <= hi && is_peak; ++q) {
      // Ties go to the earliest sample so a flat top yields one peak.
      is_peak = q < k ? amp(q) < amp(k) : amp(q) <= amp(k);
    }
    if (!is_peak) {
      continue;
    }
    DetectedEcho e;
    e.time = trace.times(k) + trace.dt * parabolic_offset(amp(k - 1), amp(k), amp(k + 1));
    e.amplitude = amp(k);
    e.signed_value = im(k);
    const int s = im(k) > 0 ? 1 : -1;
    e.sign = (report.reference_sign != 0 && s == report.reference_sign) ? EchoSign::Absorptive
                                                                         : EchoSign::Emissive;
    e.rho22 = trace.collective_at(k, Observable::Rho22);
    e.inversion = e.rho22 - trace.collective_at(k, Observable::Rho11);
    report.echoes.push_back(e);
  }

  const double tolerance = 2 * seq.max_pulse_duration();
  for (const auto& pred : seq.predicted) {
    DetectedEcho* best = nullptr;
    for (auto& e : report.echoes) {
      if (e.matched || std::abs(e.time - pred.time) > tolerance) {
        continue;
      }
      if (!best || std::abs(e.time - pred.time) < std::abs(best->time - pred.time)) {
        best = &e;
      }
    }
    if (!best) {
      report.missing.push_back(pred);
      continue;
    }
    best->matched = true;
    best->label = pred.label;
    best->predicted_time = pred.time;
    best->assumed_silenced = pred.assumed_silenced;
    best->stark_silenced = pred.stark_silenced;
  }
  return report;
}

Extremum amplitude_near(const EnsembleTrace& trace, double t, double half_width) {
  const Index lo = trace.sample_near(std::max(0.0, t - half_width));
  const Index hi = trace.sample_near(std::min(trace.horizon(), t + half_width));
  Extremum best;
  for (Index k = lo; k <= hi; ++k) {
    const double v = trace.collective_at(k, Observable::ImRho12);
    if (std::abs(v) > best.amplitude || k == lo) {
      best = {trace.times(k), std::abs(v), v};
    }
  }
  return best;
}

std::vector<BlochPoint> bloch_trajectory(const EnsembleTrace& trace, const PulseSequence& seq,
                                         double delta_khz) {
  const std::size_t j = trace.group_at(delta_khz);
  std::vector<BlochPoint> out;
  out.reserve(trace.per_group[j].size());
  for (Index k = 0; k < trace.group_samples(); ++k) {
    const double t = trace.group_time(k);
    std::string segment = "pre";
    for (const auto& p : seq.pulses) {
      if (t >= p.end() - 1e-9) {
        segment = p.label + "+";
      } else if (t > p.start + 1e-9) {
        segment = p.label;
      }
    }
    const auto& s = trace.per_group[j][static_cast<std::size_t>(k)];
    out.push_back({t, s.coh(0).real(), s.coh(0).imag(), segment});
  }
  return out;
}

double inversion_check(const EnsembleTrace& trace, double t) {
  const Index k = trace.sample_near(t);
  return trace.collective_at(k, Observable::Rho22) - trace.collective_at(k, Observable::Rho11);
}

FidMetrics fid_metrics(const EnsembleTrace& trace, double t_pulse_end) {
  const Index start = trace.sample_near(t_pulse_end);
  const auto re = trace.collective_series(Observable::ReRho12);
  const auto im = trace.collective_series(Observable::ImRho12);
  auto magnitude = [&](Index k) { return std::hypot(re(k), im(k)); };
  FidMetrics m;
  Index peak = start;
  // The peak sits at the pulse edge for a short pulse; allow a few steps of rise.
  const Index search = std::min(trace.samples() - 1, start + 5);
  for (Index k = start; k <= search; ++k) {
    if (magnitude(k) > magnitude(peak)) {
      peak = k;
    }
  }
  m.peak = magnitude(peak);
  m.peak_time = trace.times(peak);
  if (!(m.peak > 1e-12)) {
    throw ValidationError("fid_metrics: no coherence excited at t = " + std::to_string(t_pulse_end));
  }
  for (Index k = peak; k < trace.samples(); ++k) {
    if (magnitude(k) < 0.1 * m.peak) {
      m.fall_time = trace.times(k) - t_pulse_end;
      break;
    }
  }
  return m;
}

} // namespace echosim
