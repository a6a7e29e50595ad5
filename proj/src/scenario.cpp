#include "erlang_rain/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "json.hpp"

namespace erlang_rain {

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<void(Scenario&, const ConfigValue&, const std::string&)> read;
  std::function<ConfigValue(const Scenario&)> write;
};

// `get` is a generic lambda returning a reference to the member, usable on
// const and non-const scenarios alike.
template <class Get>
Field real(std::string sec, std::string key, Get get) {
  return {std::move(sec), std::move(key),
          [get](Scenario& s, const ConfigValue& v, const std::string& w) { get(s) = v.as_double(w); },
          [get](const Scenario& s) { return ConfigValue::number(get(s)); }};
}

template <class Get>
Field integer(std::string sec, std::string key, Get get) {
  return {std::move(sec), std::move(key),
          [get](Scenario& s, const ConfigValue& v, const std::string& w) { get(s) = v.as_int(w); },
          [get](const Scenario& s) { return ConfigValue::integer(get(s)); }};
}

template <class Get>
Field text(std::string sec, std::string key, Get get) {
  return {std::move(sec), std::move(key),
          [get](Scenario& s, const ConfigValue& v, const std::string& w) { get(s) = v.as_string(w); },
          [get](const Scenario& s) { return ConfigValue::string(get(s)); }};
}

ConfigValue number_array(const std::vector<double>& xs) {
  std::vector<ConfigValue> items;
  for (double x : xs) items.push_back(ConfigValue::number(x));
  return ConfigValue::array(std::move(items));
}

template <class Get>
Field reals(std::string sec, std::string key, Get get) {
  return {std::move(sec), std::move(key),
          [get](Scenario& s, const ConfigValue& v, const std::string& w) { get(s) = v.as_doubles(w); },
          [get](const Scenario& s) { return number_array(get(s)); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(text("", "profile", [](auto& s) -> auto& { return s.profile; }));
    f.push_back(text("", "output_dir", [](auto& s) -> auto& { return s.output_dir; }));
    f.push_back(real("", "r_min", [](auto& s) -> auto& { return s.r_min; }));
    f.push_back(real("", "r_max", [](auto& s) -> auto& { return s.r_max; }));
    f.push_back(integer("", "grid_points", [](auto& s) -> auto& { return s.grid_points; }));
    f.push_back(real("", "rel_tol", [](auto& s) -> auto& { return s.rel_tol; }));

    f.push_back(real("channel", "p_bar", [](auto& s) -> auto& { return s.channel.p_bar; }));
    f.push_back(real("channel", "noise_w", [](auto& s) -> auto& { return s.channel.noise_w; }));
    f.push_back(real("channel", "gamma", [](auto& s) -> auto& { return s.channel.gamma; }));
    f.push_back(real("channel", "b", [](auto& s) -> auto& { return s.channel.b; }));
    f.push_back(real("channel", "lambda_e", [](auto& s) -> auto& { return s.channel.lambda_e; }));

    f.push_back(real("pathloss", "kappa", [](auto& s) -> auto& { return s.kappa; }));
    f.push_back(real("pathloss", "eta", [](auto& s) -> auto& { return s.eta; }));

    f.push_back(text("density", "kind", [](auto& s) -> auto& { return s.density.kind; }));
    f.push_back(real("density", "lambda_s", [](auto& s) -> auto& { return s.density.lambda_s; }));
    f.push_back(real("density", "radius", [](auto& s) -> auto& { return s.density.radius; }));
    f.push_back(reals("density", "edges", [](auto& s) -> auto& { return s.density.edges; }));
    f.push_back(reals("density", "values", [](auto& s) -> auto& { return s.density.values; }));
    f.push_back({"density", "points",
                 [](Scenario& s, const ConfigValue& v, const std::string& w) {
                   s.density.points.clear();
                   for (const auto& row : v.as_rows(w, 3)) s.density.points.push_back({row[0], row[1], row[2]});
                 },
                 [](const Scenario& s) {
                   std::vector<ConfigValue> rows;
                   for (const AtomicPoint& p : s.density.points) rows.push_back(number_array({p.x, p.y, p.weight}));
                   return ConfigValue::array(std::move(rows));
                 }});

    f.push_back(text("weights", "kind", [](auto& s) -> auto& { return s.weights.kind; }));
    f.push_back(real("weights", "value", [](auto& s) -> auto& { return s.weights.value; }));
    f.push_back(reals("weights", "edges", [](auto& s) -> auto& { return s.weights.edges; }));
    f.push_back(reals("weights", "values", [](auto& s) -> auto& { return s.weights.values; }));

    f.push_back(text("policy", "kind", [](auto& s) -> auto& { return s.policy.kind; }));
    f.push_back(real("policy", "radius", [](auto& s) -> auto& { return s.policy.radius; }));
    f.push_back(real("policy", "value", [](auto& s) -> auto& { return s.policy.value; }));
    f.push_back({"policy", "intervals",
                 [](Scenario& s, const ConfigValue& v, const std::string& w) {
                   s.policy.intervals.clear();
                   for (const auto& row : v.as_rows(w, 2)) s.policy.intervals.emplace_back(row[0], row[1]);
                 },
                 [](const Scenario& s) {
                   std::vector<ConfigValue> rows;
                   for (const auto& [lo, hi] : s.policy.intervals) rows.push_back(number_array({lo, hi}));
                   return ConfigValue::array(std::move(rows));
                 }});
    f.push_back(reals("policy", "radii", [](auto& s) -> auto& { return s.policy.radii; }));
    f.push_back(reals("policy", "values", [](auto& s) -> auto& { return s.policy.values; }));
    f.push_back(text("policy", "bound", [](auto& s) -> auto& { return s.policy.bound; }));
    f.push_back(real("policy", "target", [](auto& s) -> auto& { return s.policy.target; }));

    f.push_back({"sim", "seed",
                 [](Scenario& s, const ConfigValue& v, const std::string& w) { s.sim.seed = v.as_uint(w); },
                 [](const Scenario& s) {
                   ConfigValue v;
                   v.text = std::to_string(s.sim.seed);
                   return v;
                 }});
    f.push_back(integer("sim", "packets", [](auto& s) -> auto& { return s.sim.packets; }));
    f.push_back(integer("sim", "replications", [](auto& s) -> auto& { return s.sim.replications; }));
    f.push_back(real("sim", "duration", [](auto& s) -> auto& { return s.sim.duration; }));
    f.push_back(real("sim", "warmup", [](auto& s) -> auto& { return s.sim.warmup; }));
    f.push_back(real("sim", "domain_radius", [](auto& s) -> auto& { return s.sim.domain_radius; }));
    f.push_back(real("sim", "rho_radius", [](auto& s) -> auto& { return s.sim.rho_radius; }));
    f.push_back(integer("sim", "annulus_bins", [](auto& s) -> auto& { return s.sim.annulus_bins; }));
    f.push_back(integer("sim", "batches", [](auto& s) -> auto& { return s.sim.batches; }));

    f.push_back(real("cost", "c_s", [](auto& s) -> auto& { return s.cost.c_s; }));
    f.push_back(real("cost", "c_c", [](auto& s) -> auto& { return s.cost.c_c; }));
    f.push_back(real("cost", "target_d", [](auto& s) -> auto& { return s.cost.target_d; }));
    f.push_back(reals("cost", "lambda_s_grid", [](auto& s) -> auto& { return s.cost.lambda_s_grid; }));
    f.push_back(reals("cost", "ratios", [](auto& s) -> auto& { return s.cost.ratios; }));
    return f;
  }();
  return all;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

std::string dotted(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

bool one_of(const std::string& s, std::initializer_list<const char*> names) {
  return std::any_of(names.begin(), names.end(), [&](const char* n) { return s == n; });
}

}  // namespace

SpatialDensity DensitySpec::build() const {
  if (kind == "uniform") return SpatialDensity::uniform(lambda_s, radius);
  if (kind == "piecewise") return SpatialDensity::radial(RadialProfile(edges, values));
  if (kind == "atomic") return SpatialDensity::atomic(points);
  throw ValidationError("density.kind must be uniform, piecewise or atomic");
}

WeightFunction WeightSpec::build() const {
  if (kind == "constant") return WeightFunction::constant(value);
  if (kind == "piecewise") return WeightFunction(RadialProfile(edges, values));
  throw ValidationError("weights.kind must be constant or piecewise");
}

bool PolicySpec::solved() const { return one_of(kind, {"naive", "maxmin", "waterfill", "cod"}); }

RainModel Scenario::model() const {
  RainModel m;
  m.pathloss = pathloss();
  m.density = density.build();
  m.channel = channel;
  m.quad.rel_tol = rel_tol;
  return m;
}

SolverOptions Scenario::solver() const { return {}; }

std::vector<double> Scenario::radius_grid() const {
  std::vector<double> g;
  for (std::int64_t i = 0; i < grid_points; ++i)
    g.push_back(r_min + (r_max - r_min) * static_cast<double>(i) / static_cast<double>(grid_points - 1));
  return g;
}

void Scenario::validate() const {
  require(r_min > 0.0 && std::isfinite(r_min), "r_min must be positive");
  require(r_max > r_min && std::isfinite(r_max), "r_max must exceed r_min");
  require(grid_points >= 2, "grid_points must be at least 2");
  require(rel_tol > 0.0 && rel_tol <= 1e-3, "rel_tol must lie in (0, 1e-3]");
  channel.validate();
  pathloss();
  const SpatialDensity dens = density.build();
  weights.build();

  const double domain = dens.support_radius();
  require(one_of(policy.kind, {"indicator", "constant", "annuli", "tabulated", "naive", "maxmin", "waterfill", "cod"}),
          "policy.kind must be indicator, constant, annuli, tabulated, naive, maxmin, waterfill or cod");
  require(one_of(policy.bound, {"lower", "upper"}), "policy.bound must be lower or upper");
  if (policy.kind == "indicator") {
    require(policy.radius > 0.0, "policy.radius must be positive");
    require(policy.radius <= domain, "policy.radius lies outside the sensor domain");
  } else if (policy.kind == "constant") {
    Policy::constant(policy.value);
  } else if (policy.kind == "annuli") {
    const Policy p = Policy::annuli(policy.intervals);
    require(p.reach() <= domain, "policy.intervals reach outside the sensor domain");
  } else if (policy.kind == "tabulated") {
    const Policy p = Policy::tabulated(policy.radii, policy.values);
    require(p.reach() <= domain, "policy.radii reach outside the sensor domain");
  }
  require(policy.target > 0.0 && std::isfinite(policy.target), "policy.target must be positive");

  require(sim.packets >= 1, "sim.packets must be at least 1");
  require(sim.replications >= 1, "sim.replications must be at least 1");
  require(sim.duration >= 0.0 && std::isfinite(sim.duration), "sim.duration must be >= 0");
  require(sim.warmup >= 0.0, "sim.warmup must be >= 0");
  require(sim.domain_radius >= 0.0, "sim.domain_radius must be >= 0");
  require(sim.domain_radius == 0.0 || sim.domain_radius >= domain, "sim.domain_radius must contain the sensor support");
  require(sim.rho_radius >= 0.0, "sim.rho_radius must be >= 0");
  require(sim.annulus_bins >= 1, "sim.annulus_bins must be at least 1");
  require(sim.batches >= 2, "sim.batches must be at least 2");

  cost.params().validate();
  require(!cost.lambda_s_grid.empty(), "cost.lambda_s_grid must not be empty");
  for (double x : cost.lambda_s_grid) require(x >= 0.0 && std::isfinite(x), "cost.lambda_s_grid entries must be >= 0");
  for (double q : cost.ratios) require(q >= 1.0 && std::isfinite(q), "cost.ratios entries must be >= 1");
}

std::vector<std::string> profile_names() { return {"canonical"}; }

ConfigDoc profile_doc(const std::string& name) {
  if (name != "canonical") throw ValidationError("unknown profile '" + name + "'");
  ConfigDoc d;
  auto num = [](double x) { return ConfigValue::number(x); };
  d[""] = {{"profile", ConfigValue::string("canonical")},
           {"r_min", num(0.1)},
           {"r_max", num(200.0)},
           {"grid_points", ConfigValue::integer(200)}};
  d["channel"] = {{"p_bar", num(1e-3)},
                  {"noise_w", num(1e-16)},
                  {"gamma", num(1.0)},
                  {"b", num(1e-3)},
                  {"lambda_e", num(0.125)}};
  d["pathloss"] = {{"kappa", num(std::pow(10.0, -5.5))}, {"eta", num(3.3)}};
  d["density"] = {{"kind", ConfigValue::string("uniform")}, {"lambda_s", num(10.0)}, {"radius", num(200.0)}};
  d["weights"] = {{"kind", ConfigValue::string("constant")}, {"value", num(0.75)}};
  d["policy"] = {{"kind", ConfigValue::string("indicator")},
                 {"radius", num(20.0)},
                 {"bound", ConfigValue::string("lower")},
                 {"target", num(0.75)}};
  d["sim"] = {{"packets", ConfigValue::integer(100000)},
              {"replications", ConfigValue::integer(8)},
              {"annulus_bins", ConfigValue::integer(10)}};
  d["cost"] = {{"c_s", num(1.0)}, {"c_c", num(10.0)}, {"target_d", num(0.75)}};
  return d;
}

Scenario scenario_from_doc(const ConfigDoc& doc) {
  Scenario s;
  for (const auto& [section, table] : doc) {
    for (const auto& [key, value] : table) {
      const Field* f = find_field(section, key);
      if (!f) {
        std::string where;
        if (value.line > 0) where = " (line " + std::to_string(value.line) + ", column " + std::to_string(value.column) + ")";
        throw ValidationError("unknown key '" + dotted(section, key) + "'" + where);
      }
      f->read(s, value, dotted(section, key));
    }
  }
  s.validate();
  return s;
}

Scenario resolve_scenario(const std::optional<std::string>& path, const ConfigDoc& overrides) {
  const ConfigDoc file = path ? parse_config_file(*path) : ConfigDoc{};
  std::optional<std::string> profile;
  for (const ConfigDoc* layer : {&file, &overrides}) {
    const auto top = layer->find("");
    if (top == layer->end()) continue;
    const auto p = top->second.find("profile");
    if (p != top->second.end()) profile = p->second.as_string("profile");
  }
  ConfigDoc merged;
  if (profile && !profile->empty()) merged = profile_doc(*profile);
  merge_into(merged, file);
  merge_into(merged, overrides);
  return scenario_from_doc(merged);
}

Scenario load_scenario(const std::string& path) { return resolve_scenario(path); }

ConfigDoc scenario_to_doc(const Scenario& s) {
  ConfigDoc d;
  for (const Field& f : fields()) d[f.section][f.key] = f.write(s);
  return d;
}

std::string serialize_scenario(const Scenario& s) { return format_config(scenario_to_doc(s)); }

namespace {

nlohmann::ordered_json to_json(const ConfigValue& v) {
  switch (v.kind) {
    case ConfigValue::Kind::boolean:
      return v.flag;
    case ConfigValue::Kind::string:
      return v.text;
    case ConfigValue::Kind::array: {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (const ConfigValue& item : v.items) a.push_back(to_json(item));
      return a;
    }
    case ConfigValue::Kind::number:
      break;
  }
  // Number literals are valid JSON except for infinities, kept as text.
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(v.text, nullptr, false);
  return j.is_discarded() ? nlohmann::ordered_json(v.text) : j;
}

}  // namespace

std::string scenario_manifest_json(const Scenario& s) {
  nlohmann::ordered_json j;
  for (const auto& [section, table] : scenario_to_doc(s)) {
    nlohmann::ordered_json& dst = section.empty() ? j : j[section];
    for (const auto& [key, value] : table) dst[key] = to_json(value);
  }
  return j.dump();
}

}  // namespace erlang_rain
