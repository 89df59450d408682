#include "echosim/presets.hpp"

#include <numbers>

namespace echosim {

namespace {

constexpr double kPi = std::numbers::pi;

// Unstated grids: 10 kHz spacing, wide enough for +-2 FWHM.
EnsembleSpec grid_for(double fwhm_khz, int count) {
  EnsembleSpec e;
  e.fwhm_khz = fwhm_khz;
  e.spacing_khz = 10;
  e.group_count = count;
  return e;
}

RunConfig base(const std::string& name, const EnsembleSpec& e, PulseSequence seq) {
  RunConfig c;
  c.preset = name;
  c.ensemble = e;
  c.sequence = std::move(seq);
  c.output_dir = "out/" + name;
  c.outputs.maps = {Observable::ImRho12};
  return c;
}

RunConfig fig1() {
  // Two-pulse echo, D at 5 and R at 10, 0.1 us pulses, FWHM 340 kHz, no decay.
  auto c = base("fig1", grid_for(340, 137), two_pulse_echo({}));
  c.outputs.grating_times = {5.1, 10.0, 10.1, 15.0};
  c.outputs.bloch_deltas_khz = {40, -40};
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count"};
  return c;
}

RunConfig fig2() {
  // CRIB in a Doppler vapour: D 3, C1 5, C2 7; 510 kHz with 10 kHz x 121 groups; no decay.
  EnsembleSpec e;
  e.fwhm_khz = 510;
  e.spacing_khz = 10;
  e.group_count = 121;
  auto c = base("fig2", e, crib({}));
  c.outputs.maps = {Observable::ReRho12, Observable::ImRho12};
  c.outputs.bloch_deltas_khz = {40, 50, -50};
  c.assumed = {"sequence.params.t_data", "sequence.params.t_control1", "sequence.params.area_data"};
  return c;
}

RunConfig fig3() {
  // Direct 8 pi D drive, then an 8 pi resonant Raman drive; FWHM 300 kHz; no decay.
  RamanParams p;
  p.t_start = 5;
  p.area_total = 8;
  p.ratio_data_to_control = 1;
  p.duration = 2;
  p.direct_reference_start = 1.0;
  auto c = base("fig3", grid_for(300, 121), raman_drive(p));
  c.outputs.maps = {Observable::ImRho12, Observable::PopDiff};
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count", "sequence.params.t_start",
               "sequence.params.duration", "sequence.params.ratio_data_to_control",
               "sequence.params.direct_reference_start"};
  return c;
}

RunConfig fig4e() {
  // Single 2 pi control inside the rephasing interval; FWHM 300 kHz; no decay.
  ControlledEchoParams p;
  p.controls = {{12.0, 2.0}};
  auto c = base("fig4e", grid_for(300, 121), controlled_echo(p));
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count", "sequence.params.t_data",
               "sequence.params.t_rephase", "sequence.params.controls"};
  return c;
}

RunConfig fig4f() {
  // Controlled echo with C1 (pi) and C2 (3 pi); FWHM 300 kHz; no decay.
  ControlledEchoParams p;
  p.controls = {{11.0, 1.0}, {21.0, 3.0}};
  auto c = base("fig4f", grid_for(300, 121), controlled_echo(p));
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count", "sequence.params.t_data",
               "sequence.params.t_rephase", "sequence.params.controls"};
  return c;
}

RunConfig fig5() {
  // Double rephasing: D 0.5 pi at 5, R pi at 10, RR pi at 32; 670 kHz; Gamma21 = gamma21 = 1 kHz.
  auto c = base("fig5", grid_for(670, 269), double_rephasing({}));
  c.decays.pop21 = 1;
  c.decays.deph12 = 1;
  c.outputs.bloch_deltas_khz = {20};
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count"};
  return c;
}

RunConfig fig6() {
  // CDR: D 0.2 pi at 5, R 10, RR 20, C1 20.1, C2 40, all pi; 670 kHz;
  // Gamma21 = Gamma23 = gamma21 = gamma23 = 1 kHz.
  auto c = base("fig6", grid_for(670, 269), cdr({}));
  c.decays.pop21 = 1;
  c.decays.pop23 = 1;
  c.decays.deph12 = 1;
  c.decays.deph23 = 1;
  c.outputs.bloch_deltas_khz = {20};
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count", "sequence.params.t_control1"};
  return c;
}

RunConfig supp2() {
  // AFC: ten pairs (tau 10 us) from t = 5 every 30 us, readout at 340; 670 kHz;
  // Gamma21 = Gamma23 = 10 kHz, gamma21 = gamma23 = 15 kHz.
  auto c = base("supp2", grid_for(670, 135), afc_train({}));
  c.decays.pop21 = 10;
  c.decays.pop23 = 10;
  c.decays.deph12 = 15;
  c.decays.deph23 = 15;
  c.group_stride = 10;
  c.outputs.maps = {Observable::ImRho12, Observable::Rho22};
  c.outputs.grating_times = {5.1, 15.0, 340.0};
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count", "sequence.params.weak_area",
               "sequence.params.readout_area"};
  return c;
}

DcStarkParams stark_backbone() {
  DcStarkParams p;
  p.dc1 = {5.5, 4.0, kPi / 8, +1};
  return p;
}

RunConfig supp3b() {
  // dc Stark echo with DC2 of the same polarity and equal phase area as DC1.
  auto p = stark_backbone();
  p.dc2 = {20.0, 8.0, kPi / 16, +1};
  auto c = base("supp3b", grid_for(670, 269), dc_stark_echo(p));
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count", "sequence.params.dc1", "sequence.params.dc2"};
  return c;
}

RunConfig supp3c() {
  // dc Stark echo with DC2 of reversed polarity.
  auto p = stark_backbone();
  p.dc2 = {20.0, 4.0, kPi / 8, -1};
  auto c = base("supp3c", grid_for(670, 269), dc_stark_echo(p));
  c.assumed = {"ensemble.spacing_khz", "ensemble.group_count", "sequence.params.dc1", "sequence.params.dc2"};
  return c;
}

struct Entry {
  PresetInfo info;
  RunConfig (*make)();
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"fig1", "two-pulse photon echo, 340 kHz, echo at 15 us"}, fig1},
      {{"fig2", "CRIB echo in a Doppler-broadened vapour, 510 kHz, 121 groups"}, fig2},
      {{"fig3", "direct vs resonant Raman excitation, 8 pi drives, 300 kHz"}, fig3},
      {{"fig4e", "photon echo inverted by a single 2 pi control pulse"}, fig4e},
      {{"fig4f", "controlled echo with pi and 3 pi control pulses"}, fig4f},
      {{"fig5", "double rephasing, absorptive e2 at 49 us, 670 kHz"}, fig5},
      {{"fig6", "controlled double rephasing, emissive e2 near 45 us"}, fig6},
      {{"supp2", "AFC echo after ten accumulated pulse pairs, readout at 340 us"}, supp2},
      {{"supp3b", "dc Stark echo, DC2 with the same polarity as DC1"}, supp3b},
      {{"supp3c", "dc Stark echo, DC2 with reversed polarity"}, supp3c},
  };
  return entries;
}

} // namespace

const std::vector<PresetInfo>& list_presets() {
  static const std::vector<PresetInfo> infos = [] {
    std::vector<PresetInfo> out;
    for (const auto& e : registry()) {
      out.push_back(e.info);
    }
    return out;
  }();
  return infos;
}

RunConfig preset(const std::string& name) {
  for (const auto& e : registry()) {
    if (e.info.name == name) {
      return e.make();
    }
  }
  std::string known;
  for (const auto& e : registry()) {
    known += (known.empty() ? "" : ", ") + e.info.name;
  }
  throw ValidationError("unknown preset '" + name + "' (known: " + known + ")");
}

} // namespace echosim
