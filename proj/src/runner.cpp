#include "spinecho/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spinecho/analysis.hpp"
#include "spinecho/coin_game.hpp"
#include "spinecho/csv.hpp"
#include "spinecho/fitting.hpp"
#include "spinecho/level_stats.hpp"
#include "spinecho/mcd.hpp"
#include "spinecho/operators.hpp"
#include "spinecho/otoc.hpp"
#include "spinecho/parallel.hpp"
#include "spinecho/version.hpp"

namespace spinecho {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

std::vector<double> GridSpec::materialize() const {
  std::vector<double> out;
  if (!values.empty()) {
    out = values;
  } else {
    if (count < 1) throw ConfigError("grid: count must be >= 1");
    if (count == 1) {
      out.push_back(start);
    } else if (log_spaced) {
      if (!(start > 0.0) || !(stop > start)) {
        throw ConfigError("grid: log spacing needs 0 < start < stop");
      }
      const double ratio = std::pow(stop / start, 1.0 / (count - 1));
      double v = start;
      for (int i = 0; i < count; ++i) {
        out.push_back(v);
        v *= ratio;
      }
    } else {
      if (!(stop > start)) throw ConfigError("grid: stop must exceed start");
      for (int i = 0; i < count; ++i) {
        out.push_back(start + (stop - start) * static_cast<double>(i) / (count - 1));
      }
    }
  }
  for (size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) throw ConfigError("grid: values must be strictly increasing");
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw ConfigError("grid: non-finite value");
  }
  return out;
}

TogglingParams AlphaSpec::toggling() const {
  switch (mode) {
    case ToggleMode::ideal:
      return TogglingParams::ideal();
    case ToggleMode::scaled:
      return from_mrev8 ? TogglingParams::mrev8(t_p, tau_c) : TogglingParams::scaled(alpha);
    case ToggleMode::full_toggling:
      return TogglingParams::full_toggling();
  }
  throw ConfigError("alpha: unknown mode");
}

double AlphaSpec::effective_alpha() const {
  const TogglingParams tog = toggling();
  return tog.mode() == ToggleMode::scaled ? tog.alpha() : 1.0;
}

namespace {

Experiment parse_experiment(const std::string& name) {
  if (name == "couplings") return Experiment::couplings;
  if (name == "mcd") return Experiment::mcd;
  if (name == "otoc") return Experiment::otoc;
  if (name == "coingame") return Experiment::coingame;
  if (name == "chaos") return Experiment::chaos;
  throw ConfigError("unknown experiment: " + name);
}

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::couplings: return "couplings";
    case Experiment::mcd: return "mcd";
    case Experiment::otoc: return "otoc";
    case Experiment::coingame: return "coingame";
    case Experiment::chaos: return "chaos";
  }
  return "?";
}

GridSpec parse_grid(const json& j, const char* name) {
  GridSpec g;
  if (j.is_array()) {
    g.values = j.get<std::vector<double>>();
    return g;
  }
  if (!j.is_object()) throw ConfigError(std::string(name) + ": expected array or object");
  if (j.contains("values")) {
    g.values = j.at("values").get<std::vector<double>>();
    return g;
  }
  g.start = j.value("start", 0.0);
  g.stop = j.value("stop", 0.0);
  g.count = j.value("count", 0);
  g.log_spaced = j.value("log", false);
  return g;
}

json grid_to_json(const GridSpec& g) {
  if (!g.values.empty()) return json{{"values", g.values}};
  return json{{"start", g.start}, {"stop", g.stop}, {"count", g.count}, {"log", g.log_spaced}};
}

class StageClock {
 public:
  explicit StageClock(RunManifest& manifest) : manifest_(manifest) {}

  template <typename Fn>
  auto stage(const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(name, t0);
    } else {
      auto result = fn();
      record(name, t0);
      return result;
    }
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    manifest_.timings.push_back(
        {name, std::chrono::duration<double, std::milli>(dt).count()});
  }

  RunManifest& manifest_;
};

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    c.geometry = j.value("geometry", c.geometry);
    c.central_index = j.value("central_index", c.central_index);
    if (j.contains("units")) {
      const std::string u = j.at("units").get<std::string>();
      if (u == "physical") c.units = GeometryUnits::physical;
      else if (u == "dimensionless") c.units = GeometryUnits::dimensionless;
      else throw ConfigError("units: expected dimensionless|physical");
    }
    if (j.contains("n_env")) c.n_env = j.at("n_env").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.n_orientations = j.value("n_orientations", c.n_orientations);
    if (j.contains("orientation")) {
      const auto v = j.at("orientation").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("orientation: expected [x, y, z]");
      c.fixed_orientation = Vec3(v[0], v[1], v[2]);
    }
    if (j.contains("t_grid")) c.t_grid = parse_grid(j.at("t_grid"), "t_grid");
    if (j.contains("tau_grid")) c.tau_grid = parse_grid(j.at("tau_grid"), "tau_grid");
    c.phase_grid_m = j.value("phase_grid_m", c.phase_grid_m);
    if (j.contains("alpha")) {
      const json& a = j.at("alpha");
      const std::string mode = a.value("mode", "ideal");
      if (mode == "ideal") {
        c.alpha.mode = ToggleMode::ideal;
      } else if (mode == "scaled") {
        c.alpha.mode = ToggleMode::scaled;
        if (a.contains("t_p") || a.contains("tau_c")) {
          c.alpha.from_mrev8 = true;
          c.alpha.t_p = a.at("t_p").get<double>();
          c.alpha.tau_c = a.at("tau_c").get<double>();
        } else {
          c.alpha.alpha = a.at("value").get<double>();
        }
      } else if (mode == "full_toggling") {
        c.alpha.mode = ToggleMode::full_toggling;
      } else {
        throw ConfigError("alpha.mode: expected ideal|scaled|full_toggling");
      }
    }
    c.normalization = j.value("normalization", c.normalization);
    c.window_fraction = j.value("window_fraction", c.window_fraction);
    if (j.contains("coin")) {
      const json& k = j.at("coin");
      c.coin.n_coins = k.value("n", c.coin.n_coins);
      if (k.contains("k_values")) c.coin.k_values = k.at("k_values").get<std::vector<int>>();
      if (k.contains("m_values")) c.coin.m_values = k.at("m_values").get<std::vector<int>>();
      c.coin.trials = k.value("trials", c.coin.trials);
    }
    if (j.contains("chaos")) {
      const json& k = j.at("chaos");
      if (k.contains("magnetization")) c.chaos.magnetization = k.at("magnetization").get<int>();
      c.chaos.n_pool = k.value("n_pool", c.chaos.n_pool);
      c.chaos.unfold_degree = k.value("unfold_degree", c.chaos.unfold_degree);
      c.chaos.trim = k.value("trim", c.chaos.trim);
      c.chaos.histogram_bins = k.value("histogram_bins", c.chaos.histogram_bins);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.threads = j.value("threads", c.threads);
    c.memory_budget_gb = j.value("memory_budget_gb", c.memory_budget_gb);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["experiment"] = experiment_name(experiment);
  j["geometry"] = geometry;
  j["central_index"] = central_index;
  j["units"] = units == GeometryUnits::physical ? "physical" : "dimensionless";
  if (n_env) j["n_env"] = *n_env;
  if (seed) j["seed"] = *seed;
  j["n_orientations"] = n_orientations;
  if (fixed_orientation) {
    j["orientation"] = {fixed_orientation->x(), fixed_orientation->y(), fixed_orientation->z()};
  }
  if (!t_grid.empty()) j["t_grid"] = grid_to_json(t_grid);
  if (!tau_grid.empty()) j["tau_grid"] = grid_to_json(tau_grid);
  j["phase_grid_m"] = phase_grid_m;
  {
    json a;
    switch (alpha.mode) {
      case ToggleMode::ideal: a["mode"] = "ideal"; break;
      case ToggleMode::scaled:
        a["mode"] = "scaled";
        if (alpha.from_mrev8) {
          a["t_p"] = alpha.t_p;
          a["tau_c"] = alpha.tau_c;
        } else {
          a["value"] = alpha.alpha;
        }
        break;
      case ToggleMode::full_toggling: a["mode"] = "full_toggling"; break;
    }
    j["alpha"] = a;
  }
  j["normalization"] = normalization;
  j["window_fraction"] = window_fraction;
  if (experiment == Experiment::coingame) {
    j["coin"] = {{"n", coin.n_coins},
                 {"k_values", coin.k_values},
                 {"m_values", coin.m_values},
                 {"trials", coin.trials}};
  }
  if (experiment == Experiment::chaos) {
    json k{{"n_pool", chaos.n_pool},
           {"unfold_degree", chaos.unfold_degree},
           {"trim", chaos.trim},
           {"histogram_bins", chaos.histogram_bins}};
    if (chaos.magnetization) k["magnetization"] = *chaos.magnetization;
    j["chaos"] = k;
  }
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  j["memory_budget_gb"] = memory_budget_gb;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace {

Geometry load_geometry(const RunConfig& c) {
  Geometry geom = c.geometry == "model"
                      ? Geometry::model(c.units)
                      : Geometry::load(c.geometry, c.central_index, c.units);
  if (c.n_env) geom = geom.truncated(*c.n_env);
  return geom;
}

int effective_n_env(const RunConfig& c) {
  if (c.n_env) return *c.n_env;
  if (c.geometry == "model") return 15;
  return -1;  // unknown until the file is read
}

}  // namespace

ValidationReport validate(const RunConfig& config) {
  ValidationReport report;
  auto problem = [&](const std::string& msg) {
    report.ok = false;
    report.problems.push_back(msg);
  };

  if (!config.seed) problem("seed is required (runs must be reproducible)");
  if (config.n_orientations < 1) problem("n_orientations must be >= 1");
  if (!(config.window_fraction > 0.0) || !(config.window_fraction < 1.0)) {
    problem("window_fraction must lie in (0, 1)");
  }
  if (config.normalization != "pointwise" && config.normalization != "scalar") {
    problem("normalization must be pointwise or scalar");
  }

  try {
    config.alpha.toggling();
  } catch (const std::exception& e) {
    problem(std::string("alpha: ") + e.what());
  }

  auto check_grid = [&](const GridSpec& g, const char* name, bool required) {
    if (g.empty()) {
      if (required) problem(std::string(name) + " is required for this experiment");
      return;
    }
    try {
      (void)g.materialize();
    } catch (const std::exception& e) {
      problem(e.what());
    }
  };

  int n_env = effective_n_env(config);
  if (config.geometry != "model") {
    try {
      n_env = load_geometry(config).n_env();
    } catch (const std::exception& e) {
      problem(std::string("geometry: ") + e.what());
    }
  }

  switch (config.experiment) {
    case Experiment::couplings:
      check_grid(config.t_grid, "t_grid", false);
      break;
    case Experiment::mcd:
      check_grid(config.t_grid, "t_grid", true);
      if (n_env > 0 && config.phase_grid_m < 2 * n_env + 2) {
        problem("phase_grid_m must be at least 2N+2 = " + std::to_string(2 * n_env + 2));
      }
      if (config.alpha.mode == ToggleMode::full_toggling && n_env > SpinSystem::kBruteForceCap) {
        problem("full_toggling runs on the dense oracle: n_env must be <= " +
                std::to_string(SpinSystem::kBruteForceCap));
      }
      break;
    case Experiment::otoc:
      check_grid(config.t_grid, "t_grid", true);
      check_grid(config.tau_grid, "tau_grid", true);
      if (n_env > SpinSystem::kBruteForceCap) {
        problem("otoc: n_env = " + std::to_string(n_env) + " exceeds the dense cap " +
                std::to_string(SpinSystem::kBruteForceCap));
      }
      break;
    case Experiment::coingame:
      if (config.coin.n_coins < 2) problem("coin.n must be >= 2");
      if (config.coin.k_values.empty()) problem("coin.k_values must not be empty");
      if (config.coin.m_values.empty()) problem("coin.m_values must not be empty");
      if (config.coin.trials < 1) problem("coin.trials must be >= 1");
      for (int k : config.coin.k_values) {
        if (k < 0 || k > config.coin.n_coins) problem("coin.k out of [0, N]");
      }
      for (int m : config.coin.m_values) {
        if (m < 0) problem("coin.m must be >= 0");
      }
      break;
    case Experiment::chaos:
      if (n_env > SpinSystem::kBruteForceCap) {
        problem("chaos: n_env = " + std::to_string(n_env) + " exceeds the dense cap " +
                std::to_string(SpinSystem::kBruteForceCap));
      }
      if (config.chaos.n_pool < 1) problem("chaos.n_pool must be >= 1");
      if (n_env > 0) {
        const int mag = config.chaos.magnetization.value_or(n_env % 2 == 0 ? 2 : 1);
        if ((n_env + mag) % 2 != 0 || std::abs(mag) > n_env) {
          problem("chaos.magnetization incompatible with N = " + std::to_string(n_env));
        } else if (sector_indices(n_env, mag).size() < 50) {
          problem("chaos: sector holds fewer than 50 levels");
        }
      }
      break;
  }

  // memory estimate: 16 bytes per complex entry, dense dim^2 matrices,
  // ~6 live matrices per worker
  if (n_env > 0 &&
      (config.experiment == Experiment::otoc || config.experiment == Experiment::chaos ||
       (config.experiment == Experiment::mcd && config.alpha.mode == ToggleMode::full_toggling))) {
    const double dim = std::pow(2.0, n_env + 1);
    const double workers = static_cast<double>(resolve_thread_count(config.threads));
    report.estimated_memory_gb = workers * 6.0 * 16.0 * dim * dim / 1e9;
    if (report.estimated_memory_gb > config.memory_budget_gb) {
      problem("estimated memory " + std::to_string(report.estimated_memory_gb) +
              " GB exceeds budget " + std::to_string(config.memory_budget_gb) + " GB");
    }
  }
  return report;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  if (ok) {
    out << "OK";
    if (estimated_memory_gb > 0.0) out << " (estimated memory " << estimated_memory_gb << " GB)";
  } else {
    out << problems.size() << " problem(s):";
    for (const auto& p : problems) out << "\n  - " << p;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// pipelines
// ---------------------------------------------------------------------------

namespace {

struct OrientationStream {
  std::vector<Orientation> orientations;

  static OrientationStream make(const RunConfig& c, const Geometry& geom) {
    OrientationStream s;
    if (c.fixed_orientation) {
      s.orientations.push_back(Orientation::fixed(*c.fixed_orientation));
    } else {
      s.orientations = sample_orientations(EnsembleSpec(geom, c.n_orientations, *c.seed));
    }
    return s;
  }
};

json meta_common(const RunConfig& c, const Geometry& geom) {
  json meta;
  meta["experiment"] = experiment_name(c.experiment);
  meta["version"] = kVersion;
  if (c.seed) meta["seed"] = *c.seed;
  meta["geometry_hash"] = hex64(geom.content_hash());
  meta["n_env"] = geom.n_env();
  meta["units"] = geom.units() == GeometryUnits::physical ? "physical" : "dimensionless";
  meta["alpha_mode"] = c.alpha.mode == ToggleMode::ideal
                           ? "ideal"
                           : (c.alpha.mode == ToggleMode::scaled ? "scaled" : "full_toggling");
  meta["alpha"] = c.alpha.effective_alpha();
  meta["n_orientations"] = c.fixed_orientation ? 1 : c.n_orientations;
  if (c.fixed_orientation) {
    meta["orientation"] = {c.fixed_orientation->x(), c.fixed_orientation->y(),
                           c.fixed_orientation->z()};
  }
  return meta;
}

void write_json(const fs::path& path, const json& j, RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  out << j.dump(2) << "\n";
  manifest.outputs.push_back(path.filename().string());
}

void run_couplings(const RunConfig& c, const Geometry& geom, const fs::path& dir,
                   RunManifest& manifest, StageClock& clock) {
  const OrientationStream stream = OrientationStream::make(c, geom);
  clock.stage("couplings", [&] {
    CsvWriter hetero(dir / "hetero.csv", {"orientation", "site", "label", "omega"});
    CsvWriter homo(dir / "homo.csv", {"orientation", "site_j", "site_k", "omega"});
    const auto env = geom.env_sites();
    for (size_t o = 0; o < stream.orientations.size(); ++o) {
      const CouplingSet cs = couplings_for(stream.orientations[o], geom);
      for (int j = 0; j < cs.n(); ++j) {
        hetero.row(o, j, env[static_cast<size_t>(j)]->label, cs.hetero()(j));
      }
      for (int j = 0; j < cs.n(); ++j) {
        for (int k = j + 1; k < cs.n(); ++k) {
          homo.row(o, j, k, cs.homo()(j, k));
        }
      }
    }
    manifest.outputs.push_back("hetero.csv");
    manifest.outputs.push_back("homo.csv");
  });

  if (!c.t_grid.empty()) {
    clock.stage("group_size", [&] {
      const std::vector<double> t_grid = c.t_grid.materialize();
      const double alpha = c.alpha.effective_alpha();
      CsvWriter csv(dir / "group_size.csv", {"T", "mean_size", "stderr"});
      for (double t : t_grid) {
        double sum = 0.0, sum2 = 0.0;
        for (const auto& orientation : stream.orientations) {
          const CouplingSet cs = couplings_for(orientation, geom);
          const double g = connected_group_size(cs, t, alpha);
          sum += g;
          sum2 += g * g;
        }
        const double n = static_cast<double>(stream.orientations.size());
        const double mean = sum / n;
        const double se =
            n > 1 ? std::sqrt(std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0)) / n) : 0.0;
        csv.row(t, mean, se);
      }
      manifest.outputs.push_back("group_size.csv");
    });
  }
  write_json(dir / "meta.json", meta_common(c, geom), manifest);
}

// spread curve on a T grid: single fixed orientation or powder ensemble
struct SpreadCurve {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

SpreadCurve spread_curve_for(const RunConfig& c, const Geometry& geom,
                             const std::vector<double>& t_grid, const PhaseGrid& grid) {
  SpreadCurve out;
  const double alpha = c.alpha.effective_alpha();
  if (c.fixed_orientation) {
    const CouplingSet cs = couplings_for(Orientation::fixed(*c.fixed_orientation), geom);
    for (double t : t_grid) {
      out.mean.push_back(hamming_weight_spread(extract_spectrum(cs, t, grid, alpha)));
      out.stderr_.push_back(0.0);
    }
    return out;
  }
  const EnsembleSpec spec(geom, c.n_orientations, *c.seed);
  const EnsembleMcdResult r = ensemble_mcd(spec, t_grid, grid, alpha, c.threads);
  out.mean = r.spread_mean;
  out.stderr_ = r.spread_stderr;
  return out;
}

void run_mcd(const RunConfig& c, const Geometry& geom, const fs::path& dir,
             RunManifest& manifest, StageClock& clock) {
  const std::vector<double> t_grid = c.t_grid.materialize();
  const PhaseGrid grid(c.phase_grid_m);
  const double alpha = c.alpha.effective_alpha();
  const bool oracle = c.alpha.mode == ToggleMode::full_toggling;

  std::vector<OrderSpectrum> spectra;
  std::vector<double> spread_mean, spread_se;
  std::vector<int> largest;

  clock.stage("mcd", [&] {
    if (c.fixed_orientation || oracle) {
      // fixed orientation, or the dense-oracle path (which also covers a
      // seeded single orientation when n_orientations == 1)
      std::vector<Orientation> orientations;
      if (c.fixed_orientation) {
        orientations.push_back(Orientation::fixed(*c.fixed_orientation));
      } else {
        orientations = sample_orientations(EnsembleSpec(geom, c.n_orientations, *c.seed));
      }
      const TogglingParams tog = c.alpha.toggling();
      for (size_t it = 0; it < t_grid.size(); ++it) {
        RVector acc;
        std::vector<double> spreads;
        for (const auto& orientation : orientations) {
          const CouplingSet cs = couplings_for(orientation, geom);
          const OrderSpectrum s = oracle ? extract_spectrum_oracle(cs, t_grid[it], grid, tog)
                                         : extract_spectrum(cs, t_grid[it], grid, alpha);
          if (acc.size() == 0) acc = RVector::Zero(s.amplitudes().size());
          acc += s.amplitudes();
          spreads.push_back(hamming_weight_spread(s));
        }
        acc /= static_cast<double>(orientations.size());
        OrderSpectrum avg(geom.n_env(), t_grid[it], std::move(acc));
        spread_mean.push_back(hamming_weight_spread(avg));
        largest.push_back(largest_order(avg));
        spectra.push_back(std::move(avg));
        double se = 0.0;
        if (spreads.size() > 1) {
          double m = 0.0;
          for (double v : spreads) m += v;
          m /= static_cast<double>(spreads.size());
          double var = 0.0;
          for (double v : spreads) var += (v - m) * (v - m);
          var /= static_cast<double>(spreads.size() - 1);
          se = std::sqrt(var / static_cast<double>(spreads.size()));
        }
        spread_se.push_back(se);
      }
    } else {
      const EnsembleSpec spec(geom, c.n_orientations, *c.seed);
      EnsembleMcdResult r = ensemble_mcd(spec, t_grid, grid, alpha, c.threads);
      spectra = std::move(r.spectra);
      spread_mean = std::move(r.spread_mean);
      spread_se = std::move(r.spread_stderr);
      largest = std::move(r.largest_orders);
    }
  });

  clock.stage("write", [&] {
    CsvWriter spec_csv(dir / "spectra.csv", {"T", "n", "amplitude"});
    for (const auto& s : spectra) {
      for (int n = -s.n_env(); n <= s.n_env(); ++n) spec_csv.row(s.t(), n, s.amp(n));
    }
    manifest.outputs.push_back("spectra.csv");
    CsvWriter metrics(dir / "metrics.csv", {"T", "spread", "spread_stderr", "largest_order"});
    for (size_t i = 0; i < t_grid.size(); ++i) {
      metrics.row(t_grid[i], spread_mean[i], spread_se[i], largest[i]);
    }
    manifest.outputs.push_back("metrics.csv");
  });

  json meta = meta_common(c, geom);
  meta["phase_grid_m"] = c.phase_grid_m;
  meta["t_grid"] = t_grid;
  write_json(dir / "meta.json", meta, manifest);
}

void run_otoc(const RunConfig& c, const Geometry& geom, const fs::path& dir,
              RunManifest& manifest, StageClock& clock) {
  const std::vector<double> t_grid = c.t_grid.materialize();
  const std::vector<double> tau_grid = c.tau_grid.materialize();
  const TogglingParams tog = c.alpha.toggling();
  const OtocNormalization mode = c.normalization == "scalar" ? OtocNormalization::scalar
                                                             : OtocNormalization::pointwise;
  const SpinSystem sys(geom.n_env());

  OtocSurface surface = clock.stage("otoc", [&] {
    if (c.fixed_orientation) {
      const CouplingSet cs = couplings_for(Orientation::fixed(*c.fixed_orientation), geom);
      std::vector<double> tau_ext = tau_grid;
      tau_ext.push_back(0.0);
      const RMatrix grid_values = otoc_grid(cs, t_grid, tau_ext, sys, tog);
      const RVector reference = grid_values.row(grid_values.rows() - 1).transpose();
      return OtocSurface(t_grid, tau_grid, grid_values.topRows(grid_values.rows() - 1),
                         reference, mode);
    }
    const EnsembleSpec spec(geom, c.n_orientations, *c.seed);
    return ensemble_otoc(spec, t_grid, tau_grid, tog, mode, EnvTerms::full, c.threads);
  });

  const PhaseGrid grid(c.phase_grid_m);
  const SpreadCurve spread = clock.stage("spread", [&] {
    return spread_curve_for(c, geom, t_grid, grid);
  });

  clock.stage("write", [&] {
    CsvWriter csv(dir / "otoc.csv", {"tau", "T", "F_raw", "F_normalized"});
    for (size_t r = 0; r < tau_grid.size(); ++r) {
      for (size_t i = 0; i < t_grid.size(); ++i) {
        csv.row(tau_grid[r], t_grid[i],
                surface.raw()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)),
                surface.normalized()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)));
      }
    }
    manifest.outputs.push_back("otoc.csv");
    CsvWriter spread_csv(dir / "spread.csv", {"T", "spread", "spread_stderr"});
    for (size_t i = 0; i < t_grid.size(); ++i) {
      spread_csv.row(t_grid[i], spread.mean[i], spread.stderr_[i]);
    }
    manifest.outputs.push_back("spread.csv");
  });

  clock.stage("immunity", [&] {
    CsvWriter csv(dir / "immunity.csv", {"tau", "kappa", "r_squared", "unscrambled"});
    try {
      const auto curves = reparameterize_otoc(surface, spread.mean);
      ImmunityOptions opts;
      opts.window_fraction = c.window_fraction;
      opts.system_size = static_cast<double>(geom.n_env());
      for (const auto& f : scrambling_immunity_factor(curves, opts)) {
        csv.row(f.tau, f.kappa, f.r_squared, f.unscrambled ? 1 : 0);
      }
    } catch (const std::invalid_argument&) {
      // non-injective spread (e.g. a single T point): skip the fits,
      // leaving the header-only file as the record
    }
    manifest.outputs.push_back("immunity.csv");
  });

  json meta = meta_common(c, geom);
  meta["t_grid"] = t_grid;
  meta["tau_grid"] = tau_grid;
  meta["normalization"] = c.normalization;
  write_json(dir / "meta.json", meta, manifest);
}

void run_coingame(const RunConfig& c, const fs::path& dir, RunManifest& manifest,
                  StageClock& clock) {
  clock.stage("coingame", [&] {
    CsvWriter csv(dir / "coin.csv", {"N", "k", "m", "A_analytic", "A_mc", "stderr"});
    for (int m : c.coin.m_values) {
      for (int k : c.coin.k_values) {
        CoinParams p;
        p.n_coins = c.coin.n_coins;
        p.k_flipped = k;
        p.m_swaps = m;
        p.trials = c.coin.trials;
        // decouple substreams of different (k, m) cells
        p.seed = *c.seed + 1000003ULL * static_cast<std::uint64_t>(k) +
                 1000033ULL * static_cast<std::uint64_t>(m);
        const CoinResult r = coin_monte_carlo(p, c.threads);
        csv.row(p.n_coins, k, m, r.analytic, r.mc, r.mc_stderr);
      }
    }
    manifest.outputs.push_back("coin.csv");
  });

  clock.stage("immunity", [&] {
    CsvWriter csv(dir / "coin_immunity.csv", {"m", "kappa", "r_squared"});
    for (int m : c.coin.m_values) {
      std::vector<double> x, y;
      for (int k : c.coin.k_values) {
        const double a = overlap_amplitude(c.coin.n_coins, k, m);
        if (a > 0.0) {
          x.push_back(k);
          y.push_back(a);
        }
      }
      if (x.size() >= 4) {
        const FitResult fit = fit_exponential(x, y);
        csv.row(m, fit.scale, fit.r_squared);
      }
    }
    manifest.outputs.push_back("coin_immunity.csv");
  });

  json meta;
  meta["experiment"] = "coingame";
  meta["version"] = kVersion;
  meta["seed"] = *c.seed;
  meta["n"] = c.coin.n_coins;
  meta["trials"] = c.coin.trials;
  write_json(dir / "meta.json", meta, manifest);
}

void run_chaos(const RunConfig& c, const Geometry& geom, const fs::path& dir,
               RunManifest& manifest, StageClock& clock) {
  const int n_env = geom.n_env();
  const SpinSystem sys(n_env);
  sys.require_brute_force();
  const int mag = c.chaos.magnetization.value_or(n_env % 2 == 0 ? 2 : 1);
  UnfoldOptions opts;
  opts.degree = c.chaos.unfold_degree;
  opts.trim = c.chaos.trim;

  std::vector<double> pooled_full, pooled_zz;
  std::vector<int> used, skipped;
  clock.stage("spectra", [&] {
    std::uint64_t index = 0;
    while (static_cast<int>(used.size()) < c.chaos.n_pool && index < 8ULL * c.chaos.n_pool + 64) {
      const Orientation orientation =
          c.fixed_orientation ? Orientation::fixed(*c.fixed_orientation)
                              : Orientation::sampled(*c.seed, index);
      const CouplingSet cs = couplings_for(orientation, geom);
      try {
        const auto h_full =
            OperatorMatrix::hermitian(build_h_env_block(cs, sys, EnvTerms::full).cast<Complex>());
        const auto h_zz =
            OperatorMatrix::hermitian(build_h_env_block(cs, sys, EnvTerms::zz_only).cast<Complex>());
        const SpacingHistogram full = level_spacings(h_full, mag, opts);
        const SpacingHistogram zz = level_spacings(h_zz, mag, opts);
        pooled_full.insert(pooled_full.end(), full.spacings().begin(), full.spacings().end());
        pooled_zz.insert(pooled_zz.end(), zz.spacings().begin(), zz.spacings().end());
        used.push_back(static_cast<int>(index));
      } catch (const NumericError&) {
        // non-monotone staircase fit for this orientation: resample
        skipped.push_back(static_cast<int>(index));
      }
      ++index;
      if (c.fixed_orientation) break;
    }
    if (pooled_full.empty()) throw NumericError("chaos: no orientation produced valid spacings");
  });

  json meta = meta_common(c, geom);
  clock.stage("statistics", [&] {
    CsvWriter csv(dir / "spacings.csv", {"kind", "s"});
    for (double s : pooled_full) csv.row("full", s);
    for (double s : pooled_zz) csv.row("zz_only", s);
    manifest.outputs.push_back("spacings.csv");

    const SpacingHistogram full_hist(pooled_full);
    const SpacingHistogram zz_hist(pooled_zz);
    CsvWriter hist(dir / "histogram.csv", {"kind", "bin_lo", "bin_hi", "density", "wigner", "poisson"});
    const auto [fe, fd] = full_hist.density(c.chaos.histogram_bins);
    for (size_t b = 0; b + 1 < fe.size(); ++b) {
      const double mid = 0.5 * (fe[b] + fe[b + 1]);
      hist.row("full", fe[b], fe[b + 1], fd[b], wigner_surmise(mid), std::exp(-mid));
    }
    const auto [ze, zd] = zz_hist.density(c.chaos.histogram_bins);
    for (size_t b = 0; b + 1 < ze.size(); ++b) {
      const double mid = 0.5 * (ze[b] + ze[b + 1]);
      hist.row("zz_only", ze[b], ze[b + 1], zd[b], wigner_surmise(mid), std::exp(-mid));
    }
    manifest.outputs.push_back("histogram.csv");

    meta["magnetization"] = mag;
    meta["sector_levels"] = sector_indices(n_env, mag).size();
    meta["orientations_used"] = used;
    meta["orientations_skipped"] = skipped;
    meta["samples"] = pooled_full.size();
    meta["ks_full_wigner"] = ks_distance(pooled_full, wigner_cdf);
    meta["ks_full_poisson"] = ks_distance(pooled_full, poisson_cdf);
    meta["ks_zz_wigner"] = ks_distance(pooled_zz, wigner_cdf);
    meta["ks_zz_poisson"] = ks_distance(pooled_zz, poisson_cdf);
    meta["mean_spacing_full"] = full_hist.mean();
    meta["mean_spacing_zz"] = zz_hist.mean();
  });
  write_json(dir / "chaos.json", meta, manifest);
}

}  // namespace

RunManifest run(const RunConfig& config) {
  {
    const ValidationReport report = validate(config);
    if (!report.ok) throw ConfigError("invalid configuration: " + report.summary());
  }

  RunManifest manifest;
  manifest.version = kVersion;
  manifest.config_json = config.to_json();
  StageClock clock(manifest);

  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir.string());

  if (config.experiment == Experiment::coingame) {
    manifest.geometry_hash = "-";
    run_coingame(config, dir, manifest, clock);
  } else {
    const Geometry geom = clock.stage("geometry", [&] { return load_geometry(config); });
    manifest.geometry_hash = hex64(geom.content_hash());
    switch (config.experiment) {
      case Experiment::couplings: run_couplings(config, geom, dir, manifest, clock); break;
      case Experiment::mcd: run_mcd(config, geom, dir, manifest, clock); break;
      case Experiment::otoc: run_otoc(config, geom, dir, manifest, clock); break;
      case Experiment::chaos: run_chaos(config, geom, dir, manifest, clock); break;
      case Experiment::coingame: break;
    }
  }

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest");
  out << manifest.to_json() << "\n";
  return manifest;
}

std::string RunManifest::to_json() const {
  json j;
  j["version"] = version;
  j["config"] = json::parse(config_json);
  j["geometry_hash"] = geometry_hash;
  json t = json::array();
  for (const auto& s : timings) t.push_back({{"stage", s.stage}, {"ms", s.milliseconds}});
  j["timings"] = t;
  j["outputs"] = outputs;
  j["reduction_tolerance"] = tol::reduction;
  return j.dump(2);
}

}  // namespace spinecho
