#pragma once

#include "echosim/dynamics.hpp"
#include "echosim/protocols.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace echosim {

/// Inhomogeneous broadening sampled on a symmetric detuning grid. Frequencies in kHz.
struct EnsembleSpec {
  double fwhm_khz = 340;
  double spacing_khz = 10;
  int group_count = 137;
  DensityMatrix3d initial = DensityMatrix3d::ground();
};

/// One detuning class of atoms.
struct AtomGroup {
  double delta_base = 0; // rad/us
  double weight = 0;
  int stark_sign = +1;
  int doppler_sign = +1;

  double delta_khz() const { return angular_to_khz(delta_base); }
};

/// Groups in ascending detuning with normalized Gaussian weights.
std::vector<AtomGroup> build_grid(const EnsembleSpec& spec);

/// True when the grid spans at least +-2 FWHM; narrower grids truncate the line.
bool grid_covers_line(const EnsembleSpec& spec);

enum class Observable { ReRho12, ImRho12, Rho11, Rho22, Rho33, ReRho13, ImRho13, ReRho23, ImRho23, PopDiff };
inline constexpr int kObservableCount = 10;

std::string to_string(Observable o);
Observable observable_from_string(const std::string& s);
double observe(const DensityMatrix3d& s, Observable o);

struct SimulationOptions {
  unsigned threads = 0;   // 0 picks hardware concurrency
  Index group_stride = 1; // per-group samples are kept every `group_stride` steps
  bool keep_groups = true;
};

/// Collective observables on every step plus (optionally strided) per-group states.
struct EnsembleTrace {
  double dt = 0;
  Eigen::VectorXd times;      // every integration step, including t = 0
  Eigen::MatrixXd collective; // times.size() x kObservableCount
  std::vector<AtomGroup> groups;
  Index group_stride = 1;
  std::vector<std::vector<DensityMatrix3d>> per_group; // [group][sample]

  // Worst invariant violations seen over every group and step.
  double max_trace_error = 0;
  double max_population_excursion = 0; // distance outside [0, 1]
  double max_positivity_violation = 0; // max(|rho_ij|^2 - rho_ii rho_jj)

  Index samples() const { return times.size(); }
  double horizon() const { return times.size() ? times(times.size() - 1) : 0.0; }
  /// Step index nearest `t`; ValidationError outside [0, horizon].
  Index sample_near(double t) const;
  double collective_at(Index sample, Observable o) const {
    return collective(sample, static_cast<int>(o));
  }
  Eigen::VectorXd collective_series(Observable o) const {
    return collective.col(static_cast<int>(o));
  }
  Index group_samples() const { return per_group.empty() ? 0 : Index(per_group.front().size()); }
  double group_time(Index k) const { return times(k * group_stride); }
  /// Index of the group at `delta_khz`; ValidationError if it is not on the grid.
  std::size_t group_at(double delta_khz) const;
};

/// The piecewise-constant drive seen by one group, with every pulse edge, detuning flip and
/// Stark window edge snapped to the step grid.
DriveSchedule<double> group_schedule(const PulseSequence& seq, const AtomGroup& group, double dt);

EnsembleTrace simulate_ensemble(const PulseSequence& seq, const std::vector<AtomGroup>& grid,
                                const DecayRatesd& decays, double dt,
                                const SimulationOptions& options = {},
                                const DensityMatrix3d& initial = DensityMatrix3d::ground());

struct GratingPoint {
  double delta_khz = 0;
  double value = 0;
};

/// Observable against detuning at the stored sample nearest `t`.
std::vector<GratingPoint> grating_slice(const EnsembleTrace& trace, double t, Observable o);

/// Rows are stored samples in ascending time, columns groups in ascending detuning.
Eigen::MatrixXd spectral_map(const EnsembleTrace& trace, Observable o);

} // namespace echosim
