#include "aeromap/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "aeromap/error.hpp"

namespace aeromap {

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void expect_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, path + " must be an object");
}

void check_keys(const Json& j, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  expect_object(j, path);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw SchemaError(join(path, key), "unknown field " + join(path, key));
  }
}

template <typename T>
void read(const Json& j, std::string_view key, const std::string& path, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  const std::string name = join(path, key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw SchemaError(name, name + " must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) throw SchemaError(name, name + " must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) throw SchemaError(name, name + " must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (it->get<std::int64_t>() < 0) throw SchemaError(name, name + " must be non-negative");
    }
  } else {
    if (!it->is_number()) throw SchemaError(name, name + " must be a number");
  }
  out = it->get<T>();
}

Point point_from(const Json& j, const std::string& path) {
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  if (j.is_object()) {
    check_keys(j, path, {"x", "y"});
    Point p;
    if (!j.contains("x") || !j.contains("y")) throw SchemaError(path, path + " needs x and y");
    read(j, "x", path, p.x);
    read(j, "y", path, p.y);
    return p;
  }
  throw SchemaError(path, path + " must be [x, y] or {\"x\": .., \"y\": ..}");
}

Json point_to(Point p) { return Json::array({p.x, p.y}); }

MembershipFunction mf_from(const Json& j, const std::string& path) {
  check_keys(j, path, {"shape", "points"});
  if (!j.contains("shape") || !j["shape"].is_string()) throw SchemaError(join(path, "shape"));
  if (!j.contains("points") || !j["points"].is_array()) throw SchemaError(join(path, "points"));
  std::vector<double> pts;
  for (const auto& v : j["points"]) {
    if (!v.is_number()) throw SchemaError(join(path, "points"), "breakpoints must be numbers");
    pts.push_back(v.get<double>());
  }
  const std::string shape = j["shape"].get<std::string>();
  if (shape == "triangle") {
    if (pts.size() != 3) throw SchemaError(join(path, "points"), "a triangle has 3 breakpoints");
    return MembershipFunction::triangle(pts[0], pts[1], pts[2]);
  }
  if (shape == "trapezoid") {
    if (pts.size() != 4) throw SchemaError(join(path, "points"), "a trapezoid has 4 breakpoints");
    return MembershipFunction::trapezoid(pts[0], pts[1], pts[2], pts[3]);
  }
  throw SchemaError(join(path, "shape"), "shape must be triangle or trapezoid");
}

Json mf_to(const MembershipFunction& mf) {
  if (mf.shape == MembershipFunction::Shape::triangular) {
    return {{"points", {mf.left, mf.peak_lo, mf.right}}, {"shape", "triangle"}};
  }
  return {{"points", {mf.left, mf.peak_lo, mf.peak_hi, mf.right}}, {"shape", "trapezoid"}};
}

constexpr std::array<AirClass, 3> kClasses = {AirClass::good, AirClass::moderate, AirClass::poor};
constexpr std::array<Term, 3> kTerms = {Term::low, Term::medium, Term::high};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AppConfig default_config() {
  AppConfig cfg;
  cfg.world.room = RectilinearPolygon::rectangle(4000.0, 3000.0);
  cfg.world.gas_sources = {
      {{1000.0, 2000.0}, Species::co2, 600.0, 500.0, {0.0, 0.0}},
      {{3000.0, 1000.0}, Species::voc, 400.0, 400.0, {0.0, 0.0}},
  };
  return cfg;
}

FuzzyConfig fuzzy_config_from_json(const Json& j) {
  const std::string root = "fuzzy";
  check_keys(j, root, {"inputs", "output", "rules", "centroid_resolution"});
  FuzzyConfig cfg = FuzzyConfig::defaults();
  if (j.contains("inputs")) {
    const std::string ip = join(root, "inputs");
    check_keys(j["inputs"], ip, {"voc", "co2", "smoke", "temperature", "humidity"});
    for (const auto& [name, entry] : j["inputs"].items()) {
      const std::string vp = join(ip, name);
      check_keys(entry, vp, {"universe", "terms"});
      FuzzyVariable& var = cfg.input(channel_from_string(name));
      if (entry.contains("universe")) {
        const Json& u = entry["universe"];
        if (!u.is_array() || u.size() != 2 || !u[0].is_number() || !u[1].is_number()) {
          throw SchemaError(join(vp, "universe"), "universe must be [lo, hi]");
        }
        var.universe_lo = u[0].get<double>();
        var.universe_hi = u[1].get<double>();
      }
      if (entry.contains("terms")) {
        const std::string tp = join(vp, "terms");
        check_keys(entry["terms"], tp, {"low", "medium", "high"});
        for (const auto& [term, mf] : entry["terms"].items()) {
          var.terms[static_cast<std::size_t>(term_from_string(term))] = mf_from(mf, join(tp, term));
        }
      }
    }
  }
  if (j.contains("output")) {
    const std::string op = join(root, "output");
    check_keys(j["output"], op, {"good", "moderate", "poor"});
    for (const auto& [name, mf] : j["output"].items()) {
      cfg.output[static_cast<std::size_t>(air_class_from_string(name))] = mf_from(mf, join(op, name));
    }
  }
  if (j.contains("rules")) {
    const std::string rp = join(root, "rules");
    if (!j["rules"].is_array()) throw SchemaError(rp, "rules must be an array");
    cfg.rules.clear();
    for (std::size_t i = 0; i < j["rules"].size(); ++i) {
      const Json& r = j["rules"][i];
      const std::string path = rp + "[" + std::to_string(i) + "]";
      check_keys(r, path, {"if", "then", "weight"});
      Rule rule;
      if (!r.contains("if")) throw SchemaError(join(path, "if"));
      check_keys(r["if"], join(path, "if"), {"voc", "co2", "smoke", "temperature", "humidity"});
      for (const auto& [name, term] : r["if"].items()) {
        if (!term.is_string()) throw SchemaError(join(join(path, "if"), name), "term must be a string");
        rule.antecedent.emplace_back(channel_from_string(name),
                                     term_from_string(term.get<std::string>()));
      }
      if (!r.contains("then") || !r["then"].is_string()) throw SchemaError(join(path, "then"));
      rule.consequent = air_class_from_string(r["then"].get<std::string>());
      read(r, "weight", path, rule.weight);
      cfg.rules.push_back(std::move(rule));
    }
  }
  read(j, "centroid_resolution", root, cfg.centroid_resolution);
  cfg.validate();
  return cfg;
}

Json to_json(const FuzzyConfig& cfg) {
  Json inputs = Json::object();
  for (std::size_t i = 0; i < kFuzzyInputs.size(); ++i) {
    const FuzzyVariable& v = cfg.inputs[i];
    Json terms = Json::object();
    for (Term t : kTerms) terms[std::string(to_string(t))] = mf_to(v.term(t));
    inputs[std::string(to_string(kFuzzyInputs[i]))] = {
        {"terms", std::move(terms)}, {"universe", {v.universe_lo, v.universe_hi}}};
  }
  Json output = Json::object();
  for (std::size_t i = 0; i < kClasses.size(); ++i) {
    output[lower(to_string(kClasses[i]))] = mf_to(cfg.output[i]);
  }
  Json rules = Json::array();
  for (const auto& r : cfg.rules) {
    Json cond = Json::object();
    for (const auto& [c, t] : r.antecedent) cond[std::string(to_string(c))] = std::string(to_string(t));
    rules.push_back({{"if", std::move(cond)},
                     {"then", std::string(to_string(r.consequent))},
                     {"weight", r.weight}});
  }
  return {{"centroid_resolution", cfg.centroid_resolution},
          {"inputs", std::move(inputs)},
          {"output", std::move(output)},
          {"rules", std::move(rules)}};
}

FuzzyConfig load_fuzzy_config(const std::filesystem::path& path) {
  return fuzzy_config_from_json(parse_json(read_file(path)));
}

Json to_json(const WallParams& p) {
  return {{"band_min_fraction", p.group.band_min_fraction},
          {"gap_mm", p.group.gap_mm},
          {"k_neighbors", p.group.k_neighbors},
          {"min_cluster_size", p.group.min_cluster_size},
          {"outlier_filter", p.outlier_filter},
          {"outlier_sigma", p.outlier_sigma},
          {"refine_passes", p.refine_passes}};
}

WallParams wall_params_from_json(const Json& j) {
  const std::string path = "walls";
  check_keys(j, path,
             {"band_min_fraction", "gap_mm", "k_neighbors", "min_cluster_size", "outlier_filter",
              "outlier_sigma", "refine_passes"});
  WallParams p;
  read(j, "band_min_fraction", path, p.group.band_min_fraction);
  read(j, "gap_mm", path, p.group.gap_mm);
  read(j, "k_neighbors", path, p.group.k_neighbors);
  read(j, "min_cluster_size", path, p.group.min_cluster_size);
  read(j, "outlier_filter", path, p.outlier_filter);
  read(j, "outlier_sigma", path, p.outlier_sigma);
  read(j, "refine_passes", path, p.refine_passes);
  if (p.group.k_neighbors < 1) throw ConfigError("walls.k_neighbors must be >= 1");
  if (!(p.group.gap_mm > 0.0)) throw ConfigError("walls.gap_mm must be positive");
  if (p.group.min_cluster_size < 2) throw ConfigError("walls.min_cluster_size must be >= 2");
  if (!(p.group.band_min_fraction >= 0.0 && p.group.band_min_fraction < 1.0)) {
    throw ConfigError("walls.band_min_fraction must be in [0, 1)");
  }
  if (p.refine_passes < 0) throw ConfigError("walls.refine_passes must be >= 0");
  return p;
}

AppConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw SchemaError("", "configuration must be a JSON object");
  check_keys(j, "",
             {"world", "noise", "seed", "plan", "walls", "fuzzy", "telemetry"});
  AppConfig cfg = default_config();
  if (j.contains("world")) {
    const Json& w = j["world"];
    const std::string wp = "world";
    check_keys(w, wp, {"room", "gas_sources", "ambient", "battery"});
    if (w.contains("room")) {
      if (!w["room"].is_array()) throw SchemaError("world.room", "room must be a vertex list");
      std::vector<Point> vertices;
      for (std::size_t i = 0; i < w["room"].size(); ++i) {
        vertices.push_back(point_from(w["room"][i], "world.room[" + std::to_string(i) + "]"));
      }
      cfg.world.room = RectilinearPolygon(std::move(vertices));
    }
    if (w.contains("gas_sources")) {
      if (!w["gas_sources"].is_array()) throw SchemaError("world.gas_sources", "expected an array");
      cfg.world.gas_sources.clear();
      for (std::size_t i = 0; i < w["gas_sources"].size(); ++i) {
        const Json& s = w["gas_sources"][i];
        const std::string sp = "world.gas_sources[" + std::to_string(i) + "]";
        check_keys(s, sp, {"position", "species", "amplitude", "spread", "drift"});
        GasSource g;
        if (!s.contains("position")) throw SchemaError(join(sp, "position"));
        g.position = point_from(s["position"], join(sp, "position"));
        if (!s.contains("species") || !s["species"].is_string()) throw SchemaError(join(sp, "species"));
        g.species = species_from_string(s["species"].get<std::string>());
        if (!s.contains("amplitude")) throw SchemaError(join(sp, "amplitude"));
        read(s, "amplitude", sp, g.amplitude);
        if (!s.contains("spread")) throw SchemaError(join(sp, "spread"));
        read(s, "spread", sp, g.spread);
        if (s.contains("drift")) g.drift = point_from(s["drift"], join(sp, "drift"));
        cfg.world.gas_sources.push_back(g);
      }
    }
    if (w.contains("ambient")) {
      const Json& a = w["ambient"];
      const std::string ap = "world.ambient";
      check_keys(a, ap, {"voc", "co2", "smoke", "temperature", "humidity"});
      read(a, "voc", ap, cfg.world.ambient.voc);
      read(a, "co2", ap, cfg.world.ambient.co2);
      read(a, "smoke", ap, cfg.world.ambient.smoke);
      read(a, "temperature", ap, cfg.world.ambient.temperature);
      read(a, "humidity", ap, cfg.world.ambient.humidity);
    }
    if (w.contains("battery")) {
      const Json& b = w["battery"];
      const std::string bp = "world.battery";
      check_keys(b, bp, {"full_v", "empty_v", "duration_ms"});
      read(b, "full_v", bp, cfg.world.battery.full_v);
      read(b, "empty_v", bp, cfg.world.battery.empty_v);
      read(b, "duration_ms", bp, cfg.world.battery.duration_ms);
    }
  }
  if (j.contains("noise")) {
    const Json& n = j["noise"];
    const std::string np = "noise";
    check_keys(n, np,
               {"enabled", "voc", "co2", "smoke", "temperature", "humidity", "battery", "distance"});
    read(n, "enabled", np, cfg.world.noise.enabled);
    for (Channel c : kAllChannels) {
      double v = cfg.world.noise.target(c);
      read(n, to_string(c), np, v);
      cfg.world.noise.set_target(c, v);
    }
  }
  read(j, "seed", "", cfg.world.seed);
  if (j.contains("plan")) cfg.plan = sweep_plan_from_json(j["plan"], "plan");
  if (j.contains("walls")) cfg.walls = wall_params_from_json(j["walls"]);
  if (j.contains("fuzzy")) {
    const Json& f = j["fuzzy"];
    if (f.is_string()) {
      std::filesystem::path p = f.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      cfg.fuzzy = load_fuzzy_config(p);
    } else {
      cfg.fuzzy = fuzzy_config_from_json(f);
    }
  }
  if (j.contains("telemetry")) {
    const Json& t = j["telemetry"];
    const std::string tp = "telemetry";
    check_keys(t, tp,
               {"bind", "port", "watchdog_timeout_ms", "tick_ms", "action_period_ms",
                "static_dir"});
    read(t, "bind", tp, cfg.telemetry.bind);
    read(t, "port", tp, cfg.telemetry.port);
    read(t, "watchdog_timeout_ms", tp, cfg.telemetry.watchdog_timeout_ms);
    read(t, "tick_ms", tp, cfg.telemetry.tick_ms);
    read(t, "action_period_ms", tp, cfg.telemetry.action_period_ms);
    read(t, "static_dir", tp, cfg.telemetry.static_dir);
    if (cfg.telemetry.watchdog_timeout_ms <= 0) {
      throw ConfigError("telemetry.watchdog_timeout_ms must be positive");
    }
    // The watchdog must tick at 10 Hz or faster.
    if (cfg.telemetry.tick_ms <= 0 || cfg.telemetry.tick_ms > 100) {
      throw ConfigError("telemetry.tick_ms must be in (0, 100]");
    }
    if (cfg.telemetry.action_period_ms < 0) {
      throw ConfigError("telemetry.action_period_ms must be >= 0");
    }
  }
  cfg.world.validate();
  validate_plan(cfg.world.room, cfg.plan);
  return cfg;
}

Json to_json(const AppConfig& cfg) {
  Json room = Json::array();
  for (const Point& v : cfg.world.room.vertices()) room.push_back(point_to(v));
  Json sources = Json::array();
  for (const auto& g : cfg.world.gas_sources) {
    sources.push_back({{"amplitude", g.amplitude},
                       {"drift", point_to(g.drift)},
                       {"position", point_to(g.position)},
                       {"species", std::string(to_string(g.species))},
                       {"spread", g.spread}});
  }
  Json noise = {{"enabled", cfg.world.noise.enabled}};
  for (Channel c : kAllChannels) noise[std::string(to_string(c))] = cfg.world.noise.target(c);
  const Ambient& a = cfg.world.ambient;
  const BatteryModel& b = cfg.world.battery;
  const TelemetryConfig& t = cfg.telemetry;
  return {
      {"fuzzy", to_json(cfg.fuzzy)},
      {"noise", std::move(noise)},
      {"plan", to_json(cfg.plan)},
      {"seed", cfg.world.seed},
      {"telemetry",
       {{"action_period_ms", t.action_period_ms},
        {"bind", t.bind},
        {"port", t.port},
        {"static_dir", t.static_dir},
        {"tick_ms", t.tick_ms},
        {"watchdog_timeout_ms", t.watchdog_timeout_ms}}},
      {"walls", to_json(cfg.walls)},
      {"world",
       {{"ambient",
         {{"co2", a.co2},
          {"humidity", a.humidity},
          {"smoke", a.smoke},
          {"temperature", a.temperature},
          {"voc", a.voc}}},
        {"battery", {{"duration_ms", b.duration_ms}, {"empty_v", b.empty_v}, {"full_v", b.full_v}}},
        {"gas_sources", std::move(sources)},
        {"room", std::move(room)}}},
  };
}

AppConfig load_config(const std::filesystem::path& path) {
  return config_from_json(parse_json(read_file(path)), path.parent_path());
}

}  // namespace aeromap
