// spinecho: central-spin echo simulator CLI.
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinecho/runner.hpp"
#include "spinecho/version.hpp"

namespace {

using spinecho::RunConfig;

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (!cell.empty()) out.push_back(std::stod(cell));
  }
  return out;
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  std::istringstream in(csv);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (!cell.empty()) out.push_back(std::stoi(cell));
  }
  return out;
}

struct CliOptions {
  std::string config_path;
  std::string geometry;
  int central = -1;
  std::string units;
  int n_env = -1;
  long long seed = -1;
  int n_orientations = -1;
  std::string orientation;
  std::string t_values, tau_values;
  double t_start = 0, t_stop = 0, tau_start = 0, tau_stop = 0;
  int t_count = 0, tau_count = 0;
  bool t_log = false, tau_log = false;
  int phase_grid = -1;
  std::string mode;
  double alpha = -1, t_p = -1, tau_c = -1;
  std::string normalization;
  double window_fraction = -1;
  long long trials = -1;
  std::string k_values, m_values;
  int sector = -1000;
  int n_pool = -1;
  int unfold_degree = -1;
  double trim = -1;
  int bins = -1;
  std::string out_dir;
  int threads = -1;
  double mem_budget = -1;

  void apply(RunConfig& c, spinecho::Experiment experiment) const {
    c.experiment = experiment;
    if (!geometry.empty()) c.geometry = geometry;
    if (central >= 0) c.central_index = central;
    if (units == "physical") c.units = spinecho::GeometryUnits::physical;
    else if (units == "dimensionless") c.units = spinecho::GeometryUnits::dimensionless;
    else if (!units.empty()) throw spinecho::ConfigError("--units: dimensionless|physical");
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    if (n_orientations > 0) c.n_orientations = n_orientations;
    if (!orientation.empty()) {
      const auto v = parse_doubles(orientation);
      if (v.size() != 3) throw spinecho::ConfigError("--orientation: expected x,y,z");
      c.fixed_orientation = spinecho::Vec3(v[0], v[1], v[2]);
    }
    if (!t_values.empty()) {
      c.t_grid = {};
      c.t_grid.values = parse_doubles(t_values);
    } else if (t_count > 0) {
      c.t_grid = {};
      c.t_grid.start = t_start;
      c.t_grid.stop = t_stop;
      c.t_grid.count = t_count;
      c.t_grid.log_spaced = t_log;
    }
    if (!tau_values.empty()) {
      c.tau_grid = {};
      c.tau_grid.values = parse_doubles(tau_values);
    } else if (tau_count > 0) {
      c.tau_grid = {};
      c.tau_grid.start = tau_start;
      c.tau_grid.stop = tau_stop;
      c.tau_grid.count = tau_count;
      c.tau_grid.log_spaced = tau_log;
    }
    if (phase_grid > 0) c.phase_grid_m = phase_grid;
    if (!mode.empty()) {
      if (mode == "ideal") c.alpha.mode = spinecho::ToggleMode::ideal;
      else if (mode == "scaled") c.alpha.mode = spinecho::ToggleMode::scaled;
      else if (mode == "full_toggling") c.alpha.mode = spinecho::ToggleMode::full_toggling;
      else throw spinecho::ConfigError("--mode: ideal|scaled|full_toggling");
    }
    if (alpha > 0) {
      c.alpha.mode = spinecho::ToggleMode::scaled;
      c.alpha.alpha = alpha;
      c.alpha.from_mrev8 = false;
    }
    if (t_p >= 0 && tau_c > 0) {
      c.alpha.mode = spinecho::ToggleMode::scaled;
      c.alpha.from_mrev8 = true;
      c.alpha.t_p = t_p;
      c.alpha.tau_c = tau_c;
    }
    if (!normalization.empty()) c.normalization = normalization;
    if (window_fraction > 0) c.window_fraction = window_fraction;
    if (experiment == spinecho::Experiment::coingame) {
      if (n_env > 0) c.coin.n_coins = n_env;  // --N means coins here
      if (trials > 0) c.coin.trials = trials;
      if (!k_values.empty()) c.coin.k_values = parse_ints(k_values);
      if (!m_values.empty()) c.coin.m_values = parse_ints(m_values);
      if (c.coin.k_values.empty()) {
        for (int k = 1; k <= std::min(8, c.coin.n_coins - 1); ++k) c.coin.k_values.push_back(k);
      }
      if (c.coin.m_values.empty()) {
        for (int m = 0; m <= 10; ++m) c.coin.m_values.push_back(m);
      }
    } else if (n_env > 0) {
      c.n_env = n_env;
    }
    if (sector != -1000) c.chaos.magnetization = sector;
    if (n_pool > 0) c.chaos.n_pool = n_pool;
    if (unfold_degree > 0) c.chaos.unfold_degree = unfold_degree;
    if (trim >= 0) c.chaos.trim = trim;
    if (bins > 0) c.chaos.histogram_bins = bins;
    if (!out_dir.empty()) {
      c.output_dir = out_dir;
    } else if (const char* env = std::getenv("SPINECHO_OUTDIR"); env && *env && c.output_dir == ".") {
      c.output_dir = env;
    }
    if (threads >= 0) c.threads = static_cast<unsigned>(threads);
    if (mem_budget > 0) c.memory_budget_gb = mem_budget;
  }
};

void add_options(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file (flags override)");
  cmd->add_option("--geometry", opt.geometry, "`model` or a geometry file path");
  cmd->add_option("--central", opt.central, "central site index in the geometry file");
  cmd->add_option("--units", opt.units, "dimensionless|physical");
  cmd->add_option("--N", opt.n_env, "environment size (closest sites kept); coins for coingame");
  cmd->add_option("--seed", opt.seed, "RNG seed (required)");
  cmd->add_option("--n-orientations", opt.n_orientations, "powder ensemble size");
  cmd->add_option("--orientation", opt.orientation, "fixed field direction x,y,z (single crystal)");
  cmd->add_option("--t-values", opt.t_values, "comma-separated T grid");
  cmd->add_option("--t-start", opt.t_start, "T grid start");
  cmd->add_option("--t-stop", opt.t_stop, "T grid stop");
  cmd->add_option("--t-count", opt.t_count, "T grid point count");
  cmd->add_flag("--t-log", opt.t_log, "log-spaced T grid");
  cmd->add_option("--tau-values", opt.tau_values, "comma-separated tau grid");
  cmd->add_option("--tau-start", opt.tau_start, "tau grid start");
  cmd->add_option("--tau-stop", opt.tau_stop, "tau grid stop");
  cmd->add_option("--tau-count", opt.tau_count, "tau grid point count");
  cmd->add_flag("--tau-log", opt.tau_log, "log-spaced tau grid");
  cmd->add_option("--phase-grid", opt.phase_grid, "number of encoding angles M");
  cmd->add_option("--mode", opt.mode, "coupling mode: ideal|scaled|full_toggling");
  cmd->add_option("--alpha", opt.alpha, "scale factor for scaled mode");
  cmd->add_option("--tp", opt.t_p, "pulse length (derives alpha with --tauc)");
  cmd->add_option("--tauc", opt.tau_c, "cycle length (derives alpha with --tp)");
  cmd->add_option("--normalization", opt.normalization, "otoc normalization: pointwise|scalar");
  cmd->add_option("--window-fraction", opt.window_fraction, "early-decay window fraction");
  cmd->add_option("--trials", opt.trials, "coin game Monte Carlo trials");
  cmd->add_option("--k-values", opt.k_values, "coin game k list, comma-separated");
  cmd->add_option("--m-values", opt.m_values, "coin game m list, comma-separated");
  cmd->add_option("--sector", opt.sector, "total-Z magnetization sector for chaos");
  cmd->add_option("--n-pool", opt.n_pool, "orientations pooled into the spacing histogram");
  cmd->add_option("--unfold-degree", opt.unfold_degree, "staircase polynomial degree");
  cmd->add_option("--trim", opt.trim, "spectral edge trim fraction");
  cmd->add_option("--bins", opt.bins, "histogram bins");
  cmd->add_option("--out", opt.out_dir, "output directory (default $SPINECHO_OUTDIR or .)");
  cmd->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
  cmd->add_option("--mem-budget-gb", opt.mem_budget, "memory budget for validation");
}

RunConfig build_config(const CliOptions& opt, spinecho::Experiment experiment) {
  RunConfig config = opt.config_path.empty() ? RunConfig{}
                                             : RunConfig::from_json_file(opt.config_path);
  opt.apply(config, experiment);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinecho: exact central-spin echo simulator"};
  app.set_version_flag("--version", spinecho::kVersion);
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
    spinecho::Experiment experiment;
  };
  const Sub subs[] = {
      {"couplings", "dipolar couplings and connected-group sizes over the ensemble",
       spinecho::Experiment::couplings},
      {"mcd", "correlation-order spectra and Hamming weight spread", spinecho::Experiment::mcd},
      {"otoc", "scrambling echo surface and immunity factors", spinecho::Experiment::otoc},
      {"coingame", "classical coin game overlap and swap immunity", spinecho::Experiment::coingame},
      {"chaos", "environment level-spacing statistics", spinecho::Experiment::chaos},
  };

  std::vector<CliOptions> options(6);
  std::vector<CLI::App*> cmds;
  for (size_t i = 0; i < 5; ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].desc);
    add_options(cmd, options[i]);
    cmds.push_back(cmd);
  }
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "dry-run schema and resource check");
  std::string validate_experiment;
  add_options(validate_cmd, options[5]);
  CLI::Option* for_option =
      validate_cmd->add_option("--for", validate_experiment, "experiment to validate");

  CLI11_PARSE(app, argc, argv);

  try {
    for (size_t i = 0; i < 5; ++i) {
      if (cmds[i]->parsed()) {
        const RunConfig config = build_config(options[i], subs[i].experiment);
        const spinecho::RunManifest manifest = spinecho::run(config);
        std::cout << "wrote " << manifest.outputs.size() << " file(s) to " << config.output_dir
                  << "\n";
        return 0;
      }
    }
    if (validate_cmd->parsed()) {
      RunConfig base = options[5].config_path.empty()
                           ? RunConfig{}
                           : RunConfig::from_json_file(options[5].config_path);
      spinecho::Experiment experiment = base.experiment;
      if (for_option->count() > 0) {
        if (validate_experiment == "couplings") experiment = spinecho::Experiment::couplings;
        else if (validate_experiment == "mcd") experiment = spinecho::Experiment::mcd;
        else if (validate_experiment == "otoc") experiment = spinecho::Experiment::otoc;
        else if (validate_experiment == "coingame") experiment = spinecho::Experiment::coingame;
        else if (validate_experiment == "chaos") experiment = spinecho::Experiment::chaos;
        else throw spinecho::ConfigError("--for: unknown experiment " + validate_experiment);
      }
      options[5].apply(base, experiment);
      const spinecho::ValidationReport report = spinecho::validate(base);
      std::cout << report.summary() << "\n";
      return 0;
    }
  } catch (const spinecho::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const spinecho::CapError& e) {
    std::cerr << "cap violation: " << e.what() << "\n";
    return 3;
  } catch (const spinecho::NumericError& e) {
    std::cerr << "numeric invariant failed: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
