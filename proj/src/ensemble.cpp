#include "echosim/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace echosim {

std::vector<AtomGroup> build_grid(const EnsembleSpec& spec) {
  if (spec.group_count < 1 || spec.group_count % 2 == 0) {
    throw ValidationError("ensemble.group_count must be an odd positive integer, got " +
                          std::to_string(spec.group_count));
  }
  if (!(spec.spacing_khz > 0) || !std::isfinite(spec.spacing_khz)) {
    throw ValidationError("ensemble.spacing_khz must be positive");
  }
  if (!(spec.fwhm_khz > 0) || !std::isfinite(spec.fwhm_khz)) {
    throw ValidationError("ensemble.fwhm_khz must be positive");
  }
  const double sigma = spec.fwhm_khz / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const int half = (spec.group_count - 1) / 2;
  std::vector<AtomGroup> grid(static_cast<std::size_t>(spec.group_count));
  double total = 0;
  for (int j = 0; j < spec.group_count; ++j) {
    const double khz = spec.spacing_khz * (j - half);
    auto& g = grid[static_cast<std::size_t>(j)];
    g.delta_base = khz_to_angular(khz);
    g.weight = std::exp(-0.5 * (khz / sigma) * (khz / sigma));
    g.stark_sign = (j % 2 == 0) ? +1 : -1;
    g.doppler_sign = +1;
    total += g.weight;
  }
  for (auto& g : grid) {
    g.weight /= total;
  }
  // Mirror weights so weight(d) == weight(-d) bit for bit.
  for (int j = 0; j < half; ++j) {
    grid[static_cast<std::size_t>(spec.group_count - 1 - j)].weight = grid[static_cast<std::size_t>(j)].weight;
  }
  return grid;
}

bool grid_covers_line(const EnsembleSpec& spec) {
  return spec.spacing_khz * (spec.group_count - 1) >= 2.0 * spec.fwhm_khz;
}

namespace {

struct ObservableName {
  Observable o;
  const char* name;
};

constexpr ObservableName kNames[] = {
    {Observable::ReRho12, "re_rho12"}, {Observable::ImRho12, "im_rho12"},
    {Observable::Rho11, "rho11"},      {Observable::Rho22, "rho22"},
    {Observable::Rho33, "rho33"},      {Observable::ReRho13, "re_rho13"},
    {Observable::ImRho13, "im_rho13"}, {Observable::ReRho23, "re_rho23"},
    {Observable::ImRho23, "im_rho23"}, {Observable::PopDiff, "rho11_minus_rho22"},
};

void observe_all(const DensityMatrix3d& s, double* out) {
  out[0] = s.coh(0).real();
  out[1] = s.coh(0).imag();
  out[2] = s.pop(0);
  out[3] = s.pop(1);
  out[4] = s.pop(2);
  out[5] = s.coh(1).real();
  out[6] = s.coh(1).imag();
  out[7] = s.coh(2).real();
  out[8] = s.coh(2).imag();
  out[9] = s.pop(0) - s.pop(1);
}

struct InvariantStats {
  double trace = 0;
  double population = 0;
  double positivity = 0;

  void update(const DensityMatrix3d& s, double initial_trace) {
    trace = std::max(trace, std::abs(s.trace() - initial_trace));
    for (int k = 0; k < 3; ++k) {
      population = std::max(population, std::max(-s.pop(k), s.pop(k) - 1.0));
    }
    positivity = std::max(positivity, std::norm(s.coh(0)) - s.pop(0) * s.pop(1));
    positivity = std::max(positivity, std::norm(s.coh(1)) - s.pop(0) * s.pop(2));
    positivity = std::max(positivity, std::norm(s.coh(2)) - s.pop(1) * s.pop(2));
  }
  void merge(const InvariantStats& o) {
    trace = std::max(trace, o.trace);
    population = std::max(population, o.population);
    positivity = std::max(positivity, o.positivity);
  }
};

// Output of one group's run, folded into the trace by the caller.
struct GroupRun {
  Eigen::MatrixXd values; // steps+1 x kObservableCount, unweighted
  std::vector<DensityMatrix3d> kept;
  InvariantStats stats;
};

} // namespace

std::string to_string(Observable o) {
  for (const auto& n : kNames) {
    if (n.o == o) {
      return n.name;
    }
  }
  return "?";
}

Observable observable_from_string(const std::string& s) {
  for (const auto& n : kNames) {
    if (s == n.name) {
      return n.o;
    }
  }
  std::string known;
  for (const auto& n : kNames) {
    known += known.empty() ? "" : ", ";
    known += n.name;
  }
  throw ValidationError("unknown observable '" + s + "' (known: " + known + ")");
}

double observe(const DensityMatrix3d& s, Observable o) {
  double v[kObservableCount];
  observe_all(s, v);
  return v[static_cast<int>(o)];
}

Index EnsembleTrace::sample_near(double t) const {
  if (!std::isfinite(t) || t < -0.5 * dt || t > horizon() + 0.5 * dt) {
    std::ostringstream msg;
    msg << "time " << t << " us is outside the trace [0, " << horizon() << "]";
    throw ValidationError(msg.str());
  }
  return std::clamp<Index>(static_cast<Index>(std::llround(t / dt)), 0, samples() - 1);
}

std::size_t EnsembleTrace::group_at(double delta_khz) const {
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (std::abs(groups[j].delta_khz() - delta_khz) < 1e-6) {
      return j;
    }
  }
  std::ostringstream msg;
  msg << "detuning " << delta_khz << " kHz is not on the group grid";
  throw ValidationError(msg.str());
}

DriveSchedule<double> group_schedule(const PulseSequence& seq, const AtomGroup& group, double dt) {
  if (!(dt > 0) || !std::isfinite(dt)) {
    throw ValidationError("dt must be positive");
  }
  const double tol = 0.5 * dt;
  DriveSchedule<double> schedule;
  schedule.dt = dt;
  schedule.steps = snap_to_grid(seq.horizon, dt, tol, "horizon");

  struct Span {
    Index begin, end;
  };
  std::vector<Index> cuts{0, schedule.steps};
  std::vector<Span> pulse_spans;
  for (const auto& p : seq.pulses) {
    const Index b = snap_to_grid(p.start, dt, tol, "pulse " + p.label + " start");
    const Index e = snap_to_grid(p.end(), dt, tol, "pulse " + p.label + " end");
    if (e <= b) {
      throw ValidationError("pulse " + p.label + " is shorter than one step");
    }
    if (e > schedule.steps) {
      throw ValidationError("pulse " + p.label + " ends after the horizon");
    }
    pulse_spans.push_back({b, e});
    cuts.push_back(b);
    cuts.push_back(e);
  }
  std::vector<Index> flips;
  std::vector<std::pair<Span, const StarkWindow*>> windows;
  for (const auto& ev : seq.events) {
    if (const auto* f = std::get_if<DetuningSignFlip>(&ev)) {
      flips.push_back(snap_to_grid(f->time, dt, tol, "detuning flip"));
      cuts.push_back(flips.back());
    } else {
      const auto& w = std::get<StarkWindow>(ev);
      const Span s{snap_to_grid(w.start, dt, tol, "stark window start"),
                   snap_to_grid(w.end(), dt, tol, "stark window end")};
      windows.emplace_back(s, &w);
      cuts.push_back(s.begin);
      cuts.push_back(s.end);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](Index c) { return c > schedule.steps; }),
             cuts.end());

  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    DriveSegment<double> seg;
    seg.begin = cuts[k];
    seg.end = cuts[k + 1];
    for (std::size_t i = 0; i < seq.pulses.size(); ++i) {
      if (pulse_spans[i].begin <= seg.begin && seg.end <= pulse_spans[i].end) {
        const auto field = seq.pulses[i].rabi_field();
        (seq.pulses[i].transition == Transition::Probe12 ? seg.drive.rabi12 : seg.drive.rabi23) += field;
      }
    }
    int sign = group.doppler_sign;
    for (Index f : flips) {
      if (f <= seg.begin) {
        sign = -sign;
      }
    }
    double detuning = sign * group.delta_base;
    for (const auto& [span, w] : windows) {
      if (span.begin <= seg.begin && seg.end <= span.end) {
        detuning += w->polarity * group.stark_sign * w->delta_omega;
      }
    }
    // Fields are two-photon resonant for every group: the optical detuning is shared by both
    // legs, so the spin coherence carries no inhomogeneous phase.
    seg.drive.detuning12 = detuning;
    seg.drive.detuning23 = detuning;
    schedule.segments.push_back(seg);
  }
  schedule.idle.detuning12 = group.doppler_sign * group.delta_base;
  schedule.idle.detuning23 = schedule.idle.detuning12;
  return schedule;
}

EnsembleTrace simulate_ensemble(const PulseSequence& seq, const std::vector<AtomGroup>& grid,
                                const DecayRatesd& decays, double dt,
                                const SimulationOptions& options, const DensityMatrix3d& initial) {
  seq.validate();
  if (grid.empty()) {
    throw ValidationError("simulate_ensemble: empty group grid");
  }
  if (!decays.non_negative()) {
    throw ValidationError("decay rates must be non-negative");
  }
  if (options.group_stride < 1) {
    throw ValidationError("group_stride must be at least 1");
  }
  // Validates every snap up front so worker threads only see numerical failures.
  std::vector<DriveSchedule<double>> schedules;
  schedules.reserve(grid.size());
  for (const auto& g : grid) {
    schedules.push_back(group_schedule(seq, g, dt));
  }

  const Index steps = schedules.front().steps;
  EnsembleTrace trace;
  trace.dt = dt;
  trace.groups = grid;
  trace.group_stride = options.group_stride;
  trace.times.resize(steps + 1);
  for (Index k = 0; k <= steps; ++k) {
    trace.times(k) = dt * double(k);
  }
  trace.collective = Eigen::MatrixXd::Zero(steps + 1, kObservableCount);
  if (options.keep_groups) {
    trace.per_group.resize(grid.size());
  }

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(grid.size()));
  const std::size_t block = std::max<std::size_t>(threads, 1) * 2;
  const double initial_trace = initial.trace();

  auto run_group = [&](std::size_t j, GroupRun& out) {
    out.values.resize(steps + 1, kObservableCount);
    out.kept.clear();
    if (options.keep_groups) {
      out.kept.reserve(static_cast<std::size_t>(steps / options.group_stride + 1));
    }
    out.stats = {};
    try {
      integrate<double>(initial, schedules[j], decays, [&](Index k, const DensityMatrix3d& s) {
        double v[kObservableCount];
        observe_all(s, v);
        for (int c = 0; c < kObservableCount; ++c) {
          out.values(k, c) = v[c];
        }
        out.stats.update(s, initial_trace);
        if (options.keep_groups && k % options.group_stride == 0) {
          out.kept.push_back(s);
        }
      });
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "group " << j << " (" << grid[j].delta_khz() << " kHz): " << e.what();
      throw NumericalError(msg.str());
    }
  };

  std::vector<GroupRun> runs(block);
  InvariantStats stats;
  for (std::size_t first = 0; first < grid.size(); first += block) {
    const std::size_t count = std::min(block, grid.size() - first);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          run_group(first + i, runs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
      t.join();
    }
    for (auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
    // Serial fold in ascending detuning keeps the sum independent of the thread count.
    for (std::size_t i = 0; i < count; ++i) {
      trace.collective += grid[first + i].weight * runs[i].values;
      stats.merge(runs[i].stats);
      if (options.keep_groups) {
        trace.per_group[first + i] = std::move(runs[i].kept);
      }
    }
  }
  trace.max_trace_error = stats.trace;
  trace.max_population_excursion = std::max(0.0, stats.population);
  trace.max_positivity_violation = std::max(0.0, stats.positivity);
  return trace;
}

std::vector<GratingPoint> grating_slice(const EnsembleTrace& trace, double t, Observable o) {
  if (trace.per_group.empty()) {
    throw ValidationError("grating_slice: trace was produced without per-group samples");
  }
  const Index step = trace.sample_near(t);
  const Index k = (step + trace.group_stride / 2) / trace.group_stride;
  if (k >= trace.group_samples()) {
    throw ValidationError("grating_slice: time outside the stored per-group samples");
  }
  std::vector<GratingPoint> out;
  out.reserve(trace.groups.size());
  for (std::size_t j = 0; j < trace.groups.size(); ++j) {
    out.push_back({trace.groups[j].delta_khz(), observe(trace.per_group[j][static_cast<std::size_t>(k)], o)});
  }
  return out;
}

Eigen::MatrixXd spectral_map(const EnsembleTrace& trace, Observable o) {
  const Index rows = trace.group_samples();
  Eigen::MatrixXd m(rows, static_cast<Index>(trace.groups.size()));
  for (std::size_t j = 0; j < trace.per_group.size(); ++j) {
    for (Index k = 0; k < rows; ++k) {
      m(k, static_cast<Index>(j)) = observe(trace.per_group[j][static_cast<std::size_t>(k)], o);
    }
  }
  return m;
}

} // namespace echosim
