// Experiment orchestration: configuration, validation, deterministic
// execution and persistence.
#ifndef SPINECHO_RUNNER_HPP
#define SPINECHO_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinecho/geometry.hpp"
#include "spinecho/spin_system.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

enum class Experiment { couplings, mcd, otoc, coingame, chaos };

struct GridSpec {
  // either explicit values, or start/stop/count (optionally log-spaced)
  std::vector<double> values;
  double start = 0.0;
  double stop = 0.0;
  int count = 0;
  bool log_spaced = false;

  bool empty() const { return values.empty() && count == 0; }
  std::vector<double> materialize() const;
};

struct AlphaSpec {
  ToggleMode mode = ToggleMode::ideal;
  double alpha = 1.0;   // for scaled mode
  double t_p = 0.0;     // for mrev8-derived scaled mode
  double tau_c = 0.0;
  bool from_mrev8 = false;

  TogglingParams toggling() const;
  double effective_alpha() const;
};

struct CoinSpec {
  int n_coins = 15;
  std::vector<int> k_values;
  std::vector<int> m_values;
  long trials = 100000;
};

struct ChaosSpec {
  std::optional<int> magnetization;  // default: 2 for even N, 1 for odd
  int n_pool = 8;                    // orientations pooled into the histogram
  int unfold_degree = 7;
  double trim = 0.05;
  int histogram_bins = 24;
};

struct RunConfig {
  Experiment experiment = Experiment::mcd;
  std::string geometry = "model";  // "model" or a file path
  int central_index = 0;
  GeometryUnits units = GeometryUnits::dimensionless;
  std::optional<int> n_env;  // truncate the geometry to the closest sites
  std::optional<std::uint64_t> seed;
  int n_orientations = 1;
  std::optional<Vec3> fixed_orientation;  // single-crystal mode
  GridSpec t_grid;
  GridSpec tau_grid;
  int phase_grid_m = 64;
  AlphaSpec alpha;
  std::string normalization = "pointwise";  // or "scalar"
  double window_fraction = 0.2;
  CoinSpec coin;
  ChaosSpec chaos;
  std::string output_dir = ".";
  unsigned threads = 0;
  double memory_budget_gb = 8.0;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json() const;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> problems;
  double estimated_memory_gb = 0.0;
  std::string summary() const;
};

struct StageTiming {
  std::string stage;
  double milliseconds;
};

struct RunManifest {
  std::string config_json;
  std::string geometry_hash;
  std::string version;
  std::vector<StageTiming> timings;
  std::vector<std::string> outputs;
  std::string to_json() const;
};

// Dry-run schema and resource check; never throws on content problems.
ValidationReport validate(const RunConfig& config);

// Executes the configured pipeline, writes CSV + JSON + manifest into
// config.output_dir, and returns the manifest. Throws ConfigError /
// CapError / NumericError on the corresponding failures.
RunManifest run(const RunConfig& config);

}  // namespace spinecho

#endif  // SPINECHO_RUNNER_HPP
