#include "echosim/ensemble.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace echosim;

namespace {

PulseSequence data_only(double area = 0.5, double horizon = 10) {
  PulseSequence seq;
  Pulse d;
  d.label = "D";
  d.start = 1.0;
  d.duration = 0.1;
  d.area = area;
  d.k_label = "+k_D";
  seq.pulses = {d};
  seq.horizon = horizon;
  seq.data_pulse = 0;
  return seq;
}

EnsembleSpec spec(double fwhm, int count) {
  EnsembleSpec s;
  s.fwhm_khz = fwhm;
  s.spacing_khz = 10;
  s.group_count = count;
  return s;
}

double magnitude12(const EnsembleTrace& tr, Index k) {
  return std::hypot(tr.collective_at(k, Observable::ReRho12), tr.collective_at(k, Observable::ImRho12));
}

} // namespace

TEST_CASE("grid spans symmetric detunings with Gaussian weights") {
  const auto g = build_grid(spec(510, 121));
  REQUIRE(g.size() == 121);
  CHECK(g.front().delta_khz() == doctest::Approx(-600));
  CHECK(g.back().delta_khz() == doctest::Approx(600));
  double sum = 0;
  for (const auto& a : g) sum += a.weight;
  CHECK(std::abs(sum - 1.0) < 1e-12);
  for (const auto& a : g) {
    CHECK(a.weight <= g[60].weight);
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(g[j].weight == g[g.size() - 1 - j].weight);
    CHECK(g[j].stark_sign == (j % 2 == 0 ? 1 : -1));
    CHECK(g[j].doppler_sign == 1);
  }
}

TEST_CASE("half maximum sits at half the FWHM") {
  const auto g = build_grid(spec(340, 121));
  CHECK(g[60 + 17].weight / g[60].weight == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("single-group grid and invalid specs") {
  const auto g = build_grid(spec(340, 1));
  REQUIRE(g.size() == 1);
  CHECK(g[0].delta_base == 0.0);
  CHECK(g[0].weight == 1.0);
  CHECK_THROWS_AS(build_grid(spec(340, 120)), ValidationError);
  CHECK_THROWS_AS(build_grid(spec(-1, 121)), ValidationError);
  auto s = spec(340, 121);
  s.spacing_khz = 0;
  CHECK_THROWS_AS(build_grid(s), ValidationError);
  CHECK(grid_covers_line(spec(340, 137)));
  CHECK_FALSE(grid_covers_line(spec(340, 61)));
}

TEST_CASE("an empty sequence leaves the ensemble in the ground state") {
  PulseSequence seq;
  seq.horizon = 5;
  const auto tr = simulate_ensemble(seq, build_grid(spec(340, 21)), DecayRatesd{}, 0.01);
  CHECK(tr.samples() == 501);
  CHECK((tr.collective.col(int(Observable::Rho11)).array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK(tr.collective.col(int(Observable::ReRho12)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(tr.collective.col(int(Observable::ImRho12)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("free induction decay follows the Gaussian line shape") {
  // For a weak pulse the collective coherence is the Fourier transform of the weights:
  // |rho12(t)| ~ exp(-(sigma t)^2 / 2) with t measured from the pulse centre.
  for (double fwhm : {510.0, 1020.0}) {
    const auto grid = build_grid(spec(fwhm, 2 * int(2 * fwhm / 10) + 1));
    const auto tr = simulate_ensemble(data_only(0.05), grid, DecayRatesd{}, 0.01);
    const double sigma = khz_to_angular(fwhm / (2 * std::sqrt(2 * std::log(2.0))));
    const Index end = tr.sample_near(1.1);
    for (double lag : {0.3, 0.6, 1.0}) {
      const double t0 = 0.05, t1 = 0.05 + lag;
      const double expected = std::exp(-0.5 * sigma * sigma * (t1 * t1 - t0 * t0));
      const double got = magnitude12(tr, tr.sample_near(1.1 + lag)) / magnitude12(tr, end);
      CHECK(got == doctest::Approx(expected).epsilon(0.03));
    }
  }
}

TEST_CASE("collective reduction is independent of the thread count") {
  const auto grid = build_grid(spec(340, 41));
  SimulationOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = simulate_ensemble(data_only(), grid, DecayRatesd{}, 0.01, one);
  const auto b = simulate_ensemble(data_only(), grid, DecayRatesd{}, 0.01, many);
  CHECK(a.collective == b.collective);
  CHECK(a.per_group.size() == b.per_group.size());
}

TEST_CASE("detuning mirror symmetry of the coherence") {
  // With real pulse fields, rho12(-delta) = -conj(rho12(delta)): Im is even, Re is odd.
  TwoPulseParams p;
  const auto seq = two_pulse_echo(p);
  const auto grid = build_grid(spec(340, 41));
  const auto tr = simulate_ensemble(seq, grid, DecayRatesd{}, 0.01);
  const std::size_t n = grid.size(), mid = n / 2;
  double worst = 0;
  for (Index k = 0; k < tr.group_samples(); k += 7) {
    double pair_sum = grid[mid].weight * tr.per_group[mid][k].rho12().imag();
    for (std::size_t j = 0; j < mid; ++j) {
      const auto a = tr.per_group[j][k].rho12();
      const auto b = tr.per_group[n - 1 - j][k].rho12();
      worst = std::max(worst, std::abs(a + std::conj(b)));
      pair_sum += 2 * grid[n - 1 - j].weight * b.imag();
    }
    CHECK(std::abs(tr.collective_at(k, Observable::ImRho12) - pair_sum) < 1e-9);
    CHECK(std::abs(tr.collective_at(k, Observable::ReRho12)) < 1e-9);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("a Stark window advances the phase by -s p delta_omega tau") {
  AtomGroup g;
  g.delta_base = khz_to_angular(30);
  g.weight = 1;
  for (int stark_sign : {1, -1}) {
    for (int polarity : {1, -1}) {
      g.stark_sign = stark_sign;
      auto plain = data_only(0.5, 8);
      auto shifted = plain;
      const double dw = 0.7, tau = 1.5;
      shifted.events.push_back(StarkWindow{3.0, tau, dw, polarity});
      const auto a = simulate_ensemble(plain, {g}, DecayRatesd{}, 0.01);
      const auto b = simulate_ensemble(shifted, {g}, DecayRatesd{}, 0.01);
      const auto ra = a.per_group[0].back().rho12();
      const auto rb = b.per_group[0].back().rho12();
      const auto expected = ra * std::polar(1.0, -stark_sign * polarity * dw * tau);
      CHECK(std::abs(rb - expected) < 1e-6);
    }
  }
}

TEST_CASE("a detuning flip reverses free precession") {
  PulseSequence seq = data_only(0.5, 5);
  seq.medium = Medium::Doppler;
  seq.events.push_back(DetuningSignFlip{2.1});
  AtomGroup g;
  g.delta_base = 1.0;
  g.weight = 1;
  const auto tr = simulate_ensemble(seq, {g}, DecayRatesd{}, 0.01);
  // One us forward, one us reversed: the phase returns to its value at the pulse end.
  const auto at_end = tr.per_group[0][tr.sample_near(1.1)].rho12();
  const auto back = tr.per_group[0][tr.sample_near(3.1)].rho12();
  CHECK(std::abs(at_end - back) < 1e-9);

  const auto sched = group_schedule(seq, g, 0.01);
  CHECK(sched.segments.back().drive.detuning12 == -1.0);
  CHECK(sched.segments.front().drive.detuning12 == 1.0);
}

TEST_CASE("gratings and maps") {
  const auto grid = build_grid(spec(340, 41));
  SimulationOptions opt;
  opt.group_stride = 5;
  const auto tr = simulate_ensemble(data_only(), grid, DecayRatesd{}, 0.01, opt);
  CHECK(tr.group_samples() == 1000 / 5 + 1);
  const auto m = spectral_map(tr, Observable::ImRho12);
  CHECK(m.rows() == tr.group_samples());
  CHECK(m.cols() == 41);
  const auto slice = grating_slice(tr, 4.0, Observable::ImRho12);
  REQUIRE(slice.size() == 41);
  CHECK(slice[3].delta_khz == doctest::Approx(-170));
  CHECK(slice[3].value == m(80, 3));
  CHECK_THROWS_AS(grating_slice(tr, 11.0, Observable::ImRho12), ValidationError);
  CHECK_THROWS_AS(grating_slice(tr, -1.0, Observable::ImRho12), ValidationError);
  CHECK(tr.group_at(-170) == 3);
  CHECK_THROWS_AS(tr.group_at(15), ValidationError);

  const auto single = simulate_ensemble(data_only(), build_grid(spec(340, 1)), DecayRatesd{}, 0.01);
  const auto sm = spectral_map(single, Observable::Rho22);
  for (Index k = 0; k < sm.rows(); k += 50) {
    CHECK(sm(k, 0) == single.per_group[0][k].rho22());
    CHECK(sm(k, 0) == single.collective_at(k, Observable::Rho22));
  }
}

TEST_CASE("observable names round-trip") {
  for (int i = 0; i < kObservableCount; ++i) {
    const auto o = static_cast<Observable>(i);
    CHECK(observable_from_string(to_string(o)) == o);
  }
  CHECK_THROWS_AS(observable_from_string("rho44"), ValidationError);
}

TEST_CASE("numerical failures name the group") {
  DecayRatesd g;
  g.deph12 = 1e4;
  try {
    simulate_ensemble(data_only(), build_grid(spec(340, 3)), g, 0.01);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("group") != std::string::npos);
  }
}

TEST_CASE("invariant statistics stay tiny") {
  DoubleRephasingParams p;
  const auto seq = double_rephasing(p);
  DecayRatesd g;
  g.pop21 = khz_to_angular(5);
  g.deph12 = khz_to_angular(5);
  const auto tr = simulate_ensemble(seq, build_grid(spec(340, 21)), g, 0.01);
  CHECK(tr.max_trace_error < 1e-9);
  CHECK(tr.max_population_excursion < 1e-9);
  CHECK(tr.max_positivity_violation < 1e-9);
}
