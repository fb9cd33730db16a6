#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spatsurv/epidemic.hpp"
#include "spatsurv/estimation.hpp"
#include "spatsurv/grid.hpp"
#include "spatsurv/harness.hpp"

namespace spatsurv {

inline constexpr const char* kVersion = "0.1.0";

// Table-6 screening comparison: which frame to screen and which designs to
// rerun on it.
struct ScreeningConfig {
  bool enabled = true;
  int day = 29;
  double rho = 0.3;
  std::vector<DesignKind> designs{DesignKind::lcbv, DesignKind::lcbg,
                                  DesignKind::lcbvg};
};

// Synthetic instance for the variance calculator: clusters are the cells of
// a small grid, each holding `cluster_size` persons on a regular sublattice,
// with a constant working-model mean beta0.
struct VarianceConfig {
  GridSpec grid{2, 3, 1.0};
  int cluster_size = 6;
  int m = 3;
  int n_bar = 2;
  DesignKind design = DesignKind::fpps;
  double beta0 = 1.0;
  CovarianceModel covariance;
  int joint_draws = 20000;  // Monte Carlo joint-inclusion estimate
  bool exact_small_factors = true;
};

// One experiment of record: everything the pipeline needs, loadable from a
// single JSON file. Unknown keys are rejected with the offending key path.
struct AppConfig {
  GridSpec grid;
  std::int64_t population_total = 20000;
  std::vector<double> rho_levels{0.3, 0.5, 0.7};

  int seed_cases = 10;
  DiseaseParams disease;
  std::vector<PhaseParams> phases = default_phase_schedule();
  RunOptions run_options;

  std::vector<int> survey_days{15, 29, 43};
  std::vector<DesignKind> designs{DesignKind::fpps, DesignKind::cbv,
                                  DesignKind::lp,   DesignKind::lcbv,
                                  DesignKind::lcbg, DesignKind::lcbvg};
  std::vector<int> m_levels{20, 40, 80, 160};
  std::vector<int> n_bar_levels{1, 3, 5, 7};
  int replicates = 10000;
  bool want_joint = false;

  ScreeningConfig screening;
  VarianceConfig variance;

  std::uint64_t master_seed = 1;
  int threads = 1;

  ExperimentConfig experiment() const;
  void validate() const;
};

// Parses a config file. A run manifest (which embeds the resolved config it
// was produced from) is accepted as well, so outputs can be reproduced
// straight from a manifest.
AppConfig load_config(const std::string& path);
AppConfig parse_config(const std::string& text, const std::string& origin);

// Canonical JSON rendering (sorted keys) of the resolved config; the
// manifest embeds it and the config hash is computed over it.
std::string config_to_json(const AppConfig& config);
std::string config_hash(const AppConfig& config);

// Writes the run manifest: config hash, resolved config, per-stage seeds,
// tool version, and a wall-clock timestamp (the timestamp is informational
// and not covered by any reproducibility claim).
void write_manifest(const AppConfig& config, const std::string& path);

}  // namespace spatsurv
