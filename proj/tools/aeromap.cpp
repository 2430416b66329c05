// aeromap: simulate, map, classify and serve from the command line.
//
// Exit codes: 0 ok, 1 runtime failure (e.g. bind), 2 config or parse error,
// 3 insufficient data, 4 self-check failed.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aeromap/config.hpp"
#include "aeromap/error.hpp"
#include "aeromap/experiment.hpp"
#include "aeromap/kernels.hpp"
#include "aeromap/server.hpp"
#include "aeromap/session.hpp"
#include "aeromap/wall_mapper.hpp"
#include "aeromap/wire.hpp"

using namespace aeromap;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInsufficient = 3;
constexpr int kExitSelfCheck = 4;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string noise = "on";
};

AppConfig load(const Common& c) {
  std::string path = c.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("AEROMAP_CONFIG")) path = env;
  }
  AppConfig cfg = path.empty() ? default_config() : load_config(path);
  if (c.seed) cfg.world.seed = *c.seed;
  if (c.noise == "off") cfg.world.noise.enabled = false;
  return cfg;
}

void add_common(CLI::App* sub, Common& c, bool with_noise = true) {
  sub->add_option("-c,--config", c.config_path, "Config file (default: $AEROMAP_CONFIG, else built-in)");
  sub->add_option("-s,--seed", c.seed, "RNG seed (default 42, or the config's)");
  if (with_noise) {
    sub->add_option("--noise", c.noise, "Sensor noise")->check(CLI::IsMember({"on", "off"}));
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string dump(const Json& j) { return j.dump(2); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- simulate -------------------------------------------------------------

struct MissionSummary {
  MissionLog log;
  std::optional<HomingResult> homing;
};

MissionSummary run_mission(const AppConfig& cfg, std::uint64_t seed) {
  MissionRunner runner(cfg.world, cfg.plan, Rng(seed));
  runner.start();
  runner.run();
  return {runner.log(), runner.last_homing()};
}

int cmd_simulate(const Common& c, const std::string& out, int missions) {
  const AppConfig cfg = load(c);
  if (missions <= 1) {
    const MissionSummary m = run_mission(cfg, cfg.world.seed);
    if (!out.empty()) write_output(out, encode_mission_log(m.log));
    std::ostream& s = out.empty() || out == "-" ? std::cerr : std::cout;
    s << "frames " << m.log.frames.size() << "\n"
      << "scan poses " << m.log.scan_poses.size() << "\n"
      << "points " << m.log.points.size() << "\n";
    if (m.homing) {
      s << "homing error " << fmt("%.3f", m.homing->displacement_error_mm) << " mm"
        << (m.homing->aborted ? " (aborted)" : "") << "\n";
    }
    return 0;
  }
  std::cout << "seed      wall_mape_%  homing_mm\n";
  double sum = 0.0;
  int failed = 0;
  for (int i = 0; i < missions; ++i) {
    const std::uint64_t seed = cfg.world.seed + static_cast<std::uint64_t>(i);
    const MissionSummary m = run_mission(cfg, seed);
    std::string mape = "failed";
    try {
      const ErrorReport r = evaluate_map(extract_walls(m.log.points, cfg.walls), cfg.world.room);
      sum += r.mean_wall_mape;
      mape = fmt("%.3f", r.mean_wall_mape);
    } catch (const Error&) {
      ++failed;
    }
    const double h = m.homing ? m.homing->displacement_error_mm : -1.0;
    std::printf("%-9llu %11s  %9.3f\n", static_cast<unsigned long long>(seed), mape.c_str(), h);
  }
  const int ok = missions - failed;
  if (ok > 0) std::printf("mean wall MAPE %.3f%% over %d missions (reference 5.39%%)\n", sum / ok, ok);
  if (failed > 0) std::printf("%d missions gave no closed wall ring\n", failed);
  return ok > 0 ? 0 : kExitInsufficient;
}

// ---- extract-walls --------------------------------------------------------

struct Input {
  PointCloud points;
  std::optional<MissionLog> log;
};

Input read_points(const std::string& path, const std::string& format) {
  const std::string text = read_file(path);
  std::string f = format;
  if (f == "auto") {
    const auto first = text.find_first_not_of(" \t\r\n");
    f = first != std::string::npos && text[first] == '{' ? "log" : "xy";
  }
  if (f == "xy") {
    std::istringstream in(text);
    return {read_xy(in), std::nullopt};
  }
  MissionLog log = decode_mission_log(text);
  PointCloud pts = log.points;
  return {std::move(pts), std::move(log)};
}

std::optional<std::vector<Point>> gas_estimates(const MissionLog& log, const World& truth) {
  if (truth.gas_sources.empty()) return std::nullopt;
  std::vector<Point> est;
  std::map<Species, std::size_t> used;
  for (const GasSource& g : truth.gas_sources) {
    const auto peaks = locate_gas_peaks(log, g.species);
    const std::size_t k = used[g.species]++;
    if (k >= peaks.size()) return std::nullopt;
    est.push_back(peaks[k]);
  }
  return est;
}

int cmd_extract(const Common& c, const std::string& input, const std::string& format,
                const std::string& truth_path, const std::string& out, const std::string& report_out) {
  const AppConfig cfg = load(c);
  const Input in = read_points(input, format);
  const WallModel model = extract_walls(in.points, cfg.walls);
  write_output(out, dump(to_json(wire_quantized(model))));
  if (truth_path.empty()) return 0;
  const AppConfig truth = load_config(truth_path);
  std::optional<std::vector<Point>> gas_truth, gas_est;
  if (in.log) {
    gas_est = gas_estimates(*in.log, truth.world);
    if (gas_est) {
      gas_truth.emplace();
      for (const GasSource& g : truth.world.gas_sources) gas_truth->push_back(g.position);
    }
  }
  const ErrorReport r = evaluate_map(model, truth.world.room, gas_truth, gas_est);
  if (!report_out.empty()) {
    write_output(report_out, dump(to_json(r)));
  } else {
    std::cerr << "mean wall MAPE " << fmt("%.3f", r.mean_wall_mape) << "%\n";
  }
  return 0;
}

// ---- classify -------------------------------------------------------------

std::vector<SensorFrame> read_frames(const std::string& path) {
  const Json j = parse_json(read_file(path));
  std::vector<SensorFrame> frames;
  if (j.is_object() && j.contains("frames")) {
    for (const TaggedFrame& tf : mission_log_from_json(j).frames) frames.push_back(tf.frame);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      frames.push_back(sensor_frame_from_json(j[i], "[" + std::to_string(i) + "]"));
    }
  } else {
    frames.push_back(sensor_frame_from_json(j));
  }
  return frames;
}

int cmd_classify(const Common& c, const std::string& input, const std::string& fuzzy_path,
                 const std::map<Channel, double>& values, const std::string& out) {
  AppConfig cfg = load(c);
  if (!fuzzy_path.empty()) cfg.fuzzy = load_fuzzy_config(fuzzy_path);
  std::vector<SensorFrame> frames;
  if (!input.empty()) frames = read_frames(input);
  if (!values.empty() || frames.empty()) {
    SensorFrame f;
    f.voc = cfg.world.ambient.voc;
    f.co2 = cfg.world.ambient.co2;
    f.smoke = cfg.world.ambient.smoke;
    f.temperature = cfg.world.ambient.temperature;
    f.humidity = cfg.world.ambient.humidity;
    f.battery = cfg.world.battery.full_v;
    for (const auto& [ch, v] : values) f.set_value(ch, v);
    frames.push_back(f);
  }
  const FuzzyEngine engine(cfg.fuzzy);
  const CrispThresholds th = crossover_thresholds(cfg.fuzzy);
  std::string text;
  for (const SensorFrame& f : frames) {
    const Json row = {{"crisp_class", std::string(to_string(crisp_classify(f, th)))},
                      {"fuzzy", to_json(engine.classify_or_fallback(f, th))},
                      {"timestamp_ms", f.timestamp_ms}};
    text += row.dump() + "\n";
  }
  write_output(out, text);
  return 0;
}

// ---- experiment -----------------------------------------------------------

int cmd_experiment(const Common& c, std::size_t n, const std::string& only,
                   const std::string& source, bool json) {
  const AppConfig cfg = load(c);
  if (n < 100) throw ConfigError("-n must be at least 100");
  TrialOptions opts;
  opts.source = trial_source_from_string(source);
  const CrispThresholds th = crossover_thresholds(cfg.fuzzy);
  NoiseConfig noise = cfg.world.noise;
  if (!noise.enabled) noise = NoiseConfig::silent();

  Rng rng(cfg.world.seed);
  const ErrorRates total = robustness_experiment(cfg.world, cfg.fuzzy, th, noise, n, rng, opts);
  std::vector<AblationRow> rows = channel_ablation(cfg.world, cfg.fuzzy, th, noise, n,
                                                   cfg.world.seed, opts);
  if (!only.empty()) {
    const Channel keep = channel_from_string(only);
    std::erase_if(rows, [&](const AblationRow& r) { return r.channel != keep; });
    if (rows.empty()) throw ConfigError(only + " is not a classifier input");
  }

  const bool noisy = total.crisp_errors + total.fuzzy_errors > 0;
  const bool ok = !noisy || total.fuzzy_rate() < total.crisp_rate();
  if (json) {
    Json ablation = Json::array();
    for (const AblationRow& r : rows) {
      ablation.push_back({{"channel", std::string(to_string(r.channel))},
                          {"crisp_rate", r.rates.crisp_rate()},
                          {"fuzzy_rate", r.rates.fuzzy_rate()}});
    }
    std::cout << dump({{"ablation", ablation},
                       {"crisp_rate", total.crisp_rate()},
                       {"fuzzy_fallbacks", total.fuzzy_fallbacks},
                       {"fuzzy_rate", total.fuzzy_rate()},
                       {"seed", cfg.world.seed},
                       {"source", std::string(to_string(opts.source))},
                       {"trials", total.trials}})
              << "\n";
  } else {
    std::printf("trials %zu  source %s  seed %llu\n", total.trials,
                std::string(to_string(opts.source)).c_str(),
                static_cast<unsigned long long>(cfg.world.seed));
    std::printf("crisp error rate  %6.2f%%\n", 100.0 * total.crisp_rate());
    std::printf("fuzzy error rate  %6.2f%%  (%zu fallbacks)\n", 100.0 * total.fuzzy_rate(),
                total.fuzzy_fallbacks);
    std::printf("\nnoise on one channel only\n%-12s %8s %8s\n", "channel", "crisp%", "fuzzy%");
    for (const AblationRow& r : rows) {
      std::printf("%-12s %8.2f %8.2f\n", std::string(to_string(r.channel)).c_str(),
                  100.0 * r.rates.crisp_rate(), 100.0 * r.rates.fuzzy_rate());
    }
    if (!ok) std::printf("\nself-check failed: fuzzy error rate is not below crisp\n");
  }
  return ok ? 0 : kExitSelfCheck;
}

// ---- report ---------------------------------------------------------------

int cmd_report(const Common& c, const std::string& input, const std::string& truth_path) {
  const AppConfig cfg = load(c);
  const MissionLog log = decode_mission_log(read_file(input));
  const FuzzyEngine engine(cfg.fuzzy);
  const CrispThresholds th = crossover_thresholds(cfg.fuzzy);
  std::map<std::string, int> fuzzy_hist, crisp_hist;
  std::size_t fallbacks = 0;
  for (const TaggedFrame& tf : log.frames) {
    const Classification k = engine.classify_or_fallback(tf.frame, th);
    ++fuzzy_hist[std::string(to_string(k.air_class))];
    ++crisp_hist[std::string(to_string(crisp_classify(tf.frame, th)))];
    fallbacks += k.fallback;
  }
  std::printf("frames %zu  scan poses %zu  points %zu  events %zu\n", log.frames.size(),
              log.scan_poses.size(), log.points.size(), log.events.size());
  for (const MissionEvent& e : log.events) {
    std::printf("  %8lld ms  %-10s %s\n", static_cast<long long>(e.t_ms),
                std::string(to_string(e.kind)).c_str(), e.detail.c_str());
  }
  std::printf("\n%-10s %6s %6s\n", "class", "fuzzy", "crisp");
  for (const char* name : {"Good", "Moderate", "Poor"}) {
    std::printf("%-10s %6d %6d\n", name, fuzzy_hist[name], crisp_hist[name]);
  }
  if (fallbacks) std::printf("fuzzy fallbacks %zu\n", fallbacks);

  WallModel model;
  try {
    model = extract_walls(log.points, cfg.walls);
  } catch (const InsufficientDataError& e) {
    std::printf("\nwalls: %s\n", e.what());
    return kExitInsufficient;
  }
  std::printf("\nwalls %zu\n", model.lines.size());
  for (std::size_t i = 0; i < model.corners.size(); ++i) {
    std::printf("  corner (%.1f, %.1f)  wall %.1f mm\n", model.corners[i].x, model.corners[i].y,
                model.wall_lengths[i]);
  }
  std::vector<Species> species;
  for (const GasSource& g : cfg.world.gas_sources) {
    if (std::find(species.begin(), species.end(), g.species) == species.end()) species.push_back(g.species);
  }
  for (Species s : species) {
    const auto peaks = locate_gas_peaks(log, s, {.neighbor_radius_mm = 0.0, .min_rise = 1.0});
    if (!peaks.empty()) {
      std::printf("%s peak near (%.0f, %.0f)\n", std::string(to_string(s)).c_str(), peaks[0].x,
                  peaks[0].y);
    }
  }
  if (!truth_path.empty()) {
    const AppConfig truth = load_config(truth_path);
    const ErrorReport r = evaluate_map(model, truth.world.room);
    std::printf("\nmean wall MAPE %.3f%%\n", r.mean_wall_mape);
    for (std::size_t i = 0; i < r.wall_length_mape.size(); ++i) {
      std::printf("  wall %zu  est %.1f  true %.1f  %.3f%%  corner off %.1f mm\n", i,
                  r.estimated_lengths[i], r.true_lengths[i], r.wall_length_mape[i],
                  r.corner_displacement_mm[i]);
    }
  }
  return 0;
}

// ---- serve / replay -------------------------------------------------------

int cmd_serve(const Common& c, const std::string& bind, int port, const std::string& static_dir,
              const std::string& replay, std::int64_t watchdog_ms) {
  AppConfig cfg = load(c);
  if (!bind.empty()) cfg.telemetry.bind = bind;
  if (port >= 0) cfg.telemetry.port = static_cast<std::uint16_t>(port);
  if (!static_dir.empty()) cfg.telemetry.static_dir = static_dir;
  if (watchdog_ms > 0) cfg.telemetry.watchdog_timeout_ms = watchdog_ms;

  std::optional<Session> session;
  if (replay.empty()) {
    session.emplace(cfg);
  } else {
    session.emplace(cfg, decode_mission_log(read_file(replay)));
  }

  // Block the signals before any thread starts so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  TelemetryServer server(*session, cfg.telemetry);
  server.start();
  std::cerr << "listening on http://" << cfg.telemetry.bind << ":" << server.port()
            << (replay.empty() ? "" : " (replay)") << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return 0;
}

// Drives a replay session to the end and writes every frame as one JSON line.
// Each frame is decoded again and compared, so a clean exit means the log is
// fully representable on the wire.
int cmd_replay(const Common& c, const std::string& input, const std::string& out) {
  const AppConfig cfg = load(c);
  Session session(cfg, decode_mission_log(read_file(input)));
  std::string text;
  std::size_t mismatches = 0;
  session.subscribe([&](const Frame& f, const std::string& encoded) {
    (void)f;
    if (encode_frame(decode_frame(encoded)) != encoded) ++mismatches;
    text += encoded;
    text += '\n';
  });
  session.handle_command(R"({"kind":"start","v":1})", 0);
  std::int64_t t = 0;
  while (session.step(++t)) {
  }
  write_output(out, text);
  if (mismatches) {
    std::cerr << mismatches << " frames did not survive a decode/encode round trip\n";
    return kExitSelfCheck;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room mapping and indoor air quality from a simulated sweeping robot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "aeromap 1.0 (" + std::string(kernels::isa_name(kernels::active().isa)) + " kernels)");

  Common common;
  std::string out, input, format = "auto", truth, report_out, fuzzy_path, only, source = "single_channel_band";
  int missions = 1;
  std::size_t trials = 1000;
  bool json = false;
  std::map<Channel, double> values;
  std::string bind;
  int port = -1;
  std::string static_dir, replay;
  std::int64_t watchdog_ms = 0;

  auto* sim = app.add_subcommand("simulate", "Run a sweep mission and write its MissionLog");
  add_common(sim, common);
  sim->add_option("-o,--out", out, "MissionLog output file ('-' for stdout)");
  sim->add_option("--missions", missions, "Run this many missions with consecutive seeds and tabulate wall MAPE")
      ->check(CLI::Range(1, 100000));

  auto* ext = app.add_subcommand("extract-walls", "Fit walls to a MissionLog or an x y point file");
  add_common(ext, common, false);
  ext->add_option("input", input, "MissionLog JSON or whitespace-separated x y lines")->required();
  ext->add_option("--format", format, "Input format")->check(CLI::IsMember({"auto", "log", "xy"}));
  ext->add_option("--truth", truth, "Config file whose room (and gas sources) is the ground truth");
  ext->add_option("-o,--out", out, "WallModel output file (default stdout)");
  ext->add_option("--report", report_out, "ErrorReport output file (with --truth)");

  auto* cls = app.add_subcommand("classify", "Classify sensor frames with the fuzzy and crisp classifiers");
  add_common(cls, common, false);
  cls->add_option("input", input, "MissionLog, sensor frame or array of frames");
  cls->add_option("--fuzzy", fuzzy_path, "Fuzzy rule base file");
  for (Channel ch : kFuzzyInputs) {
    const std::string name(to_string(ch));
    cls->add_option_function<double>("--" + name, [&values, ch](double v) { values[ch] = v; },
                                     "Classify one frame with this " + name + " reading");
  }
  cls->add_option("-o,--out", out, "Output file, one JSON line per frame (default stdout)");

  auto* exp = app.add_subcommand("experiment", "Crisp versus fuzzy classification under sensor noise");
  add_common(exp, common);
  exp->add_option("-n,--trials", trials, "Number of trials (at least 100)");
  exp->add_option("--only-channel", only, "Show the ablation row for this channel only");
  exp->add_option("--source", source, "How clean frames are drawn")
      ->check(CLI::IsMember({"single_channel_band", "transition_band", "world_field"}));
  exp->add_flag("--json", json, "Machine-readable output");

  auto* rep = app.add_subcommand("report", "Summarize a MissionLog");
  add_common(rep, common, false);
  rep->add_option("input", input, "MissionLog JSON")->required();
  rep->add_option("--truth", truth, "Config file whose room is the ground truth");

  auto* srv = app.add_subcommand("serve", "Run the telemetry service");
  add_common(srv, common);
  srv->add_option("--bind", bind, "Bind address");
  srv->add_option("-p,--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  srv->add_option("--static-dir", static_dir, "Directory served under /");
  srv->add_option("--replay", replay, "Serve a recorded MissionLog instead of a live simulation");
  srv->add_option("--watchdog-ms", watchdog_ms, "Watchdog timeout")->check(CLI::PositiveNumber);

  auto* rpl = app.add_subcommand("replay", "Re-emit a MissionLog as the frame stream of a session");
  add_common(rpl, common, false);
  rpl->add_option("input", input, "MissionLog JSON")->required();
  rpl->add_option("-o,--out", out, "Output file, one frame per line (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(common, out, missions);
    if (*ext) return cmd_extract(common, input, format, truth, out, report_out);
    if (*cls) return cmd_classify(common, input, fuzzy_path, values, out);
    if (*exp) return cmd_experiment(common, trials, only, source, json);
    if (*rep) return cmd_report(common, input, truth);
    if (*srv) return cmd_serve(common, bind, port, static_dir, replay, watchdog_ms);
    if (*rpl) return cmd_replay(common, input, out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const DegenerateError& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const TopologyMismatchError& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
