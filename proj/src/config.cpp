#include "echosim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace echosim {

using nlohmann::json;

namespace {

std::string type_name(const json& j) { return j.type_name(); }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

void read_value(const json& j, const std::string& path, double& out) {
  if (!j.is_number()) {
    fail(path, std::string("expected a number, got ") + type_name(j));
  }
  out = j.get<double>();
}
void read_value(const json& j, const std::string& path, int& out) {
  if (!j.is_number_integer()) {
    fail(path, std::string("expected an integer, got ") + type_name(j));
  }
  out = j.get<int>();
}
void read_value(const json& j, const std::string& path, unsigned& out) {
  if (!j.is_number_unsigned()) {
    fail(path, std::string("expected a non-negative integer, got ") + type_name(j));
  }
  out = j.get<unsigned>();
}
void read_value(const json& j, const std::string& path, Index& out) {
  if (!j.is_number_integer()) {
    fail(path, std::string("expected an integer, got ") + type_name(j));
  }
  out = j.get<Index>();
}
void read_value(const json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) {
    fail(path, std::string("expected true or false, got ") + type_name(j));
  }
  out = j.get<bool>();
}
void read_value(const json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) {
    fail(path, std::string("expected a string, got ") + type_name(j));
  }
  out = j.get<std::string>();
}
void read_value(const json& j, const std::string& path, std::optional<double>& out) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  double v = 0;
  read_value(j, path, v);
  out = v;
}
void read_value(const json& j, const std::string& path, Observable& out) {
  std::string s;
  read_value(j, path, s);
  try {
    out = observable_from_string(s);
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

void read_value(const json& j, const std::string& path, ControlPulseSpec& out);
void read_value(const json& j, const std::string& path, StarkWindow& out);
template <typename T>
void read_value(const json& j, const std::string& path, std::vector<T>& out);

// Object reader that remembers which keys were consumed so leftovers can be reported.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      fail(path_, std::string("expected an object, got ") + type_name(j_));
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      read_value(*it, at(key), out);
    }
  }
  template <typename T>
  void require(const std::string& key, T& out) {
    if (!j_.contains(key)) {
      fail(at(key), "required field is missing");
    }
    get(key, out);
  }
  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const { return path_ + "." + key; }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        fail(at(it.key()), "unknown key");
      }
    }
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_value(const json& j, const std::string& path, ControlPulseSpec& out) {
  Section s(j, path);
  s.require("start", out.start);
  s.require("area", out.area);
  s.finish();
}
void read_value(const json& j, const std::string& path, StarkWindow& out) {
  Section s(j, path);
  s.require("start", out.start);
  s.require("duration", out.duration);
  s.require("delta_omega", out.delta_omega);
  s.get("polarity", out.polarity);
  s.finish();
}
template <typename T>
void read_value(const json& j, const std::string& path, std::vector<T>& out) {
  if (!j.is_array()) {
    fail(path, std::string("expected an array, got ") + type_name(j));
  }
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T v{};
    read_value(j[i], path + "[" + std::to_string(i) + "]", v);
    out.push_back(std::move(v));
  }
}

json write_value(double v) { return v; }
json write_value(int v) { return v; }
json write_value(bool v) { return v; }
json write_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json write_value(const ControlPulseSpec& c) { return {{"start", c.start}, {"area", c.area}}; }
json write_value(const StarkWindow& w) {
  return {{"start", w.start}, {"duration", w.duration}, {"delta_omega", w.delta_omega}, {"polarity", w.polarity}};
}
template <typename T>
json write_value(const std::vector<T>& v) {
  json a = json::array();
  for (const auto& x : v) {
    a.push_back(write_value(x));
  }
  return a;
}

// One field list per protocol drives both directions of serialization.
template <typename P, typename F>
void visit_fields(P& p, F&& f) {
  using T = std::remove_const_t<P>;
  if constexpr (std::is_same_v<T, TwoPulseParams>) {
    f("t_data", p.t_data), f("t_rephase", p.t_rephase), f("area_data", p.area_data);
    f("area_rephase", p.area_rephase), f("duration", p.duration);
    f("split_rephase", p.split_rephase), f("backward_rephase", p.backward_rephase);
  } else if constexpr (std::is_same_v<T, CribParams>) {
    f("t_data", p.t_data), f("t_control1", p.t_control1), f("t_control2", p.t_control2);
    f("area_data", p.area_data), f("duration", p.duration);
  } else if constexpr (std::is_same_v<T, RamanParams>) {
    f("t_start", p.t_start), f("area_total", p.area_total);
    f("ratio_data_to_control", p.ratio_data_to_control), f("duration", p.duration);
    f("direct_reference_start", p.direct_reference_start);
  } else if constexpr (std::is_same_v<T, ControlledEchoParams>) {
    f("t_data", p.t_data), f("t_rephase", p.t_rephase), f("area_data", p.area_data);
    f("area_rephase", p.area_rephase), f("controls", p.controls), f("duration", p.duration);
  } else if constexpr (std::is_same_v<T, DoubleRephasingParams>) {
    f("t_data", p.t_data), f("t_rephase", p.t_rephase), f("t_rephase2", p.t_rephase2);
    f("area_data", p.area_data), f("area_rephase", p.area_rephase);
    f("area_rephase2", p.area_rephase2), f("duration", p.duration);
    f("backward_rephase", p.backward_rephase);
  } else if constexpr (std::is_same_v<T, CdrParams>) {
    f("t_data", p.t_data), f("t_rephase", p.t_rephase), f("t_rephase2", p.t_rephase2);
    f("t_control1", p.t_control1), f("t_control2", p.t_control2);
    f("area_data", p.area_data), f("duration", p.duration), f("backward_rephase", p.backward_rephase);
  } else if constexpr (std::is_same_v<T, AfcParams>) {
    f("n_sets", p.n_sets), f("first_set", p.first_set), f("set_period", p.set_period);
    f("afc_tau", p.afc_tau), f("weak_area", p.weak_area), f("readout_area", p.readout_area);
    f("readouts", p.readouts), f("duration", p.duration);
  } else if constexpr (std::is_same_v<T, DcStarkParams>) {
    f("t_data", p.t_data), f("t_rephase1", p.t_rephase1), f("t_rephase2", p.t_rephase2);
    f("area_data", p.area_data), f("duration", p.duration);
    f("dc1", p.dc1), f("dc2", p.dc2), f("enforce_dc2_after_e1", p.enforce_dc2_after_e1);
  }
}

template <std::size_t I = 1>
ProtocolParams params_by_name(const std::string& name, const json* params, const std::string& path) {
  if constexpr (I < std::variant_size_v<ProtocolParams>) {
    using P = std::variant_alternative_t<I, ProtocolParams>;
    ProtocolParams candidate{std::in_place_index<I>};
    if (protocol_name(candidate) != name) {
      return params_by_name<I + 1>(name, params, path);
    }
    P p{};
    if (params) {
      Section s(*params, path);
      visit_fields(p, [&](const char* key, auto& field) { s.get(key, field); });
      s.finish();
    }
    return p;
  } else {
    fail(path, "unknown protocol '" + name + "'");
  }
}

json params_to_json(const ProtocolParams& params) {
  return std::visit(
      [](const auto& p) {
        json out = json::object();
        if constexpr (!std::is_same_v<std::decay_t<decltype(p)>, std::monostate>) {
          visit_fields(p, [&](const char* key, const auto& field) { out[key] = write_value(field); });
        }
        return out;
      },
      params);
}

Pulse read_pulse(const json& j, const std::string& path) {
  Section s(j, path);
  Pulse p;
  std::string transition = "1-2";
  s.require("label", p.label);
  s.get("transition", transition);
  s.require("start", p.start);
  s.require("duration", p.duration);
  s.require("area", p.area);
  s.get("phase", p.phase);
  s.get("k_label", p.k_label);
  s.finish();
  try {
    p.transition = transition_from_string(transition);
  } catch (const ValidationError& e) {
    fail(path + ".transition", e.what());
  }
  return p;
}

Event read_event(const json& j, const std::string& path) {
  Section s(j, path);
  std::string type;
  s.require("type", type);
  if (type == "detuning_flip") {
    DetuningSignFlip f;
    s.require("time", f.time);
    s.finish();
    return f;
  }
  if (type == "stark_window") {
    StarkWindow w;
    s.require("start", w.start);
    s.require("duration", w.duration);
    s.require("delta_omega", w.delta_omega);
    s.get("polarity", w.polarity);
    s.finish();
    return w;
  }
  fail(path + ".type", "unknown event type '" + type + "' (expected detuning_flip or stark_window)");
}

PulseSequence read_sequence(const json& j, const std::string& path) {
  Section s(j, path);
  std::string protocol;
  s.require("protocol", protocol);
  if (protocol != "custom") {
    const json* params = s.child("params");
    s.finish();
    const auto p = params_by_name(protocol, params, path + ".params");
    try {
      return build(p);
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }

  PulseSequence seq;
  std::string medium = "solid";
  s.get("medium", medium);
  s.require("horizon", seq.horizon);
  try {
    seq.medium = medium_from_string(medium);
  } catch (const ValidationError& e) {
    fail(s.at("medium"), e.what());
  }
  if (const json* pulses = s.child("pulses")) {
    if (!pulses->is_array()) {
      fail(s.at("pulses"), "expected an array");
    }
    for (std::size_t i = 0; i < pulses->size(); ++i) {
      seq.pulses.push_back(read_pulse((*pulses)[i], s.at("pulses") + "[" + std::to_string(i) + "]"));
    }
  }
  if (const json* events = s.child("events")) {
    if (!events->is_array()) {
      fail(s.at("events"), "expected an array");
    }
    for (std::size_t i = 0; i < events->size(); ++i) {
      seq.events.push_back(read_event((*events)[i], s.at("events") + "[" + std::to_string(i) + "]"));
    }
  }
  std::string data_label;
  s.get("data_pulse", data_label);
  s.finish();
  std::stable_sort(seq.pulses.begin(), seq.pulses.end(),
                   [](const Pulse& a, const Pulse& b) { return a.start < b.start; });
  if (!data_label.empty()) {
    for (std::size_t i = 0; i < seq.pulses.size(); ++i) {
      if (seq.pulses[i].label == data_label) {
        seq.data_pulse = i;
      }
    }
    if (!seq.data_pulse) {
      fail(s.at("data_pulse"), "no pulse labelled '" + data_label + "'");
    }
  }
  try {
    seq.validate();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return seq;
}

} // namespace

DecayRatesd DecaysKhz::angular() const {
  DecayRatesd d;
  d.pop21 = khz_to_angular(pop21);
  d.pop23 = khz_to_angular(pop23);
  d.pop31 = khz_to_angular(pop31);
  d.pop32 = khz_to_angular(pop32);
  d.deph12 = khz_to_angular(deph12);
  d.deph13 = khz_to_angular(deph13);
  d.deph23 = khz_to_angular(deph23);
  return d;
}

PulseSequence parse_sequence(const json& doc) { return read_sequence(doc, "sequence"); }

json sequence_to_json(const PulseSequence& seq) {
  if (!std::holds_alternative<std::monostate>(seq.protocol)) {
    return {{"protocol", protocol_name(seq.protocol)}, {"params", params_to_json(seq.protocol)}};
  }
  json pulses = json::array();
  for (const auto& p : seq.pulses) {
    pulses.push_back({{"label", p.label},
                      {"transition", to_string(p.transition)},
                      {"start", p.start},
                      {"duration", p.duration},
                      {"area", p.area},
                      {"phase", p.phase},
                      {"k_label", p.k_label}});
  }
  json events = json::array();
  for (const auto& e : seq.events) {
    if (const auto* f = std::get_if<DetuningSignFlip>(&e)) {
      events.push_back({{"type", "detuning_flip"}, {"time", f->time}});
    } else {
      const auto& w = std::get<StarkWindow>(e);
      events.push_back({{"type", "stark_window"},
                        {"start", w.start},
                        {"duration", w.duration},
                        {"delta_omega", w.delta_omega},
                        {"polarity", w.polarity}});
    }
  }
  json out = {{"protocol", "custom"},
              {"medium", to_string(seq.medium)},
              {"horizon", seq.horizon},
              {"pulses", pulses},
              {"events", events}};
  if (seq.data_pulse) {
    out["data_pulse"] = seq.pulses[*seq.data_pulse].label;
  }
  return out;
}

RunConfig parse_config(const json& input) {
  const json* doc = &input;
  if (input.is_object() && input.contains("manifest_version")) {
    if (!input.contains("config")) {
      fail("manifest", "has no config section");
    }
    doc = &input["config"];
  }
  RunConfig c;
  Section root(*doc, "config");
  root.get("preset", c.preset);
  if (const json* e = root.child("ensemble")) {
    Section s(*e, root.at("ensemble"));
    s.get("fwhm_khz", c.ensemble.fwhm_khz);
    s.get("spacing_khz", c.ensemble.spacing_khz);
    s.get("group_count", c.ensemble.group_count);
    std::vector<double> pops;
    s.get("initial_populations", pops);
    s.finish();
    if (!pops.empty()) {
      if (pops.size() != 3) {
        fail(s.at("initial_populations"), "expected three populations");
      }
      c.ensemble.initial = DensityMatrix3d{};
      c.ensemble.initial.pop << pops[0], pops[1], pops[2];
    }
    try {
      build_grid(c.ensemble);
    } catch (const ValidationError& err) {
      fail(root.at("ensemble"), err.what());
    }
  }
  if (const json* d = root.child("decays_khz")) {
    Section s(*d, root.at("decays_khz"));
    s.get("Gamma21", c.decays.pop21);
    s.get("Gamma23", c.decays.pop23);
    s.get("Gamma31", c.decays.pop31);
    s.get("Gamma32", c.decays.pop32);
    s.get("gamma12", c.decays.deph12);
    s.get("gamma13", c.decays.deph13);
    s.get("gamma23", c.decays.deph23);
    s.finish();
    if (!c.decays.angular().non_negative()) {
      fail(root.at("decays_khz"), "decay rates must be non-negative");
    }
  }
  const json* seq = root.child("sequence");
  if (!seq) {
    fail(root.at("sequence"), "required field is missing");
  }
  c.sequence = read_sequence(*seq, root.at("sequence"));
  root.get("dt", c.dt);
  if (!(c.dt > 0)) {
    fail(root.at("dt"), "must be positive");
  }
  root.get("threads", c.threads);
  root.get("group_stride", c.group_stride);
  if (c.group_stride < 1) {
    fail(root.at("group_stride"), "must be at least 1");
  }
  if (const json* o = root.child("outputs")) {
    Section s(*o, root.at("outputs"));
    s.get("trace", c.outputs.trace);
    s.get("observables", c.outputs.trace_observables);
    s.get("maps", c.outputs.maps);
    s.get("grating_times", c.outputs.grating_times);
    s.get("bloch_deltas_khz", c.outputs.bloch_deltas_khz);
    s.get("echoes", c.outputs.echoes);
    s.finish();
  }
  root.get("output_dir", c.output_dir);
  root.get("assumed", c.assumed);
  root.finish();

  // Everything that can be checked before compute is checked here.
  try {
    for (const auto& g : build_grid(c.ensemble)) {
      (void)group_schedule(c.sequence, g, c.dt);
      break;
    }
    const double span = c.ensemble.spacing_khz * (c.ensemble.group_count - 1) / 2;
    for (double t : c.outputs.grating_times) {
      if (t < 0 || t > c.sequence.horizon) {
        fail(root.at("outputs.grating_times"), "time " + std::to_string(t) + " outside [0, horizon]");
      }
    }
    for (double d : c.outputs.bloch_deltas_khz) {
      const double k = d / c.ensemble.spacing_khz;
      if (std::abs(d) > span + 1e-9 || std::abs(k - std::round(k)) > 1e-9) {
        fail(root.at("outputs.bloch_deltas_khz"), "detuning " + std::to_string(d) + " kHz is not on the grid");
      }
    }
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.rfind("config", 0) == 0) {
      throw;
    }
    fail("config", what);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json names = json::array();
  for (auto o : c.outputs.trace_observables) names.push_back(to_string(o));
  json maps = json::array();
  for (auto o : c.outputs.maps) maps.push_back(to_string(o));
  json out = {
      {"ensemble",
       {{"fwhm_khz", c.ensemble.fwhm_khz},
        {"spacing_khz", c.ensemble.spacing_khz},
        {"group_count", c.ensemble.group_count},
        {"initial_populations", {c.ensemble.initial.pop(0), c.ensemble.initial.pop(1), c.ensemble.initial.pop(2)}}}},
      {"decays_khz",
       {{"Gamma21", c.decays.pop21},
        {"Gamma23", c.decays.pop23},
        {"Gamma31", c.decays.pop31},
        {"Gamma32", c.decays.pop32},
        {"gamma12", c.decays.deph12},
        {"gamma13", c.decays.deph13},
        {"gamma23", c.decays.deph23}}},
      {"sequence", sequence_to_json(c.sequence)},
      {"dt", c.dt},
      {"threads", c.threads},
      {"group_stride", c.group_stride},
      {"outputs",
       {{"trace", c.outputs.trace},
        {"observables", names},
        {"maps", maps},
        {"grating_times", c.outputs.grating_times},
        {"bloch_deltas_khz", c.outputs.bloch_deltas_khz},
        {"echoes", c.outputs.echoes}}},
      {"output_dir", c.output_dir},
      {"assumed", c.assumed},
  };
  if (!c.preset.empty()) {
    out["preset"] = c.preset;
  }
  return out;
}

} // namespace echosim
