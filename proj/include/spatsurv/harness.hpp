#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spatsurv/epidemic.hpp"
#include "spatsurv/sampling.hpp"

namespace spatsurv {

// One Monte Carlo experiment grid: every (design, day, rho, m, n_bar)
// combination is evaluated with `replicates` independent two-stage draws.
// The level defaults are the full study grid; production configs usually
// narrow m/n_bar to the headline combination (80 cells, 3 people).
struct ExperimentConfig {
  std::vector<double> rho_levels{0.3, 0.5, 0.7};
  std::vector<int> survey_days{15, 29, 43};
  std::vector<DesignKind> designs{DesignKind::fpps, DesignKind::cbv,
                                  DesignKind::lp,   DesignKind::lcbv,
                                  DesignKind::lcbg, DesignKind::lcbvg};
  std::vector<int> m_levels{20, 40, 80, 160};
  std::vector<int> n_bar_levels{1, 3, 5, 7};
  int replicates = 10000;  // 50,000 for a full-scale run
  std::uint64_t master_seed = 1;
  int threads = 1;
  bool want_joint = false;  // also accumulate the empirical joint-inclusion matrix

  void validate() const;
};

// Result of one grid cell. rel_se is the root-mean-square error relative to
// the true total; entropy is the plug-in entropy of the empirical first-stage
// sample distribution. Figures are meaningful from roughly 10^3 replicates.
struct MCCell {
  DesignKind design = DesignKind::fpps;
  int day = 0;
  double rho = 0.0;
  int m = 0;
  int n_bar = 0;
  int replicates = 0;
  double true_value = 0.0;
  double mean_estimate = 0.0;
  double rab = 0.0;
  double rel_se = 0.0;
  double entropy = 0.0;
  int distinct_sets = 0;
  std::vector<double> incl_first;  // empirical first-order inclusion frequencies
  std::vector<double> incl_joint;  // clusters x clusters, filled when requested
};

struct MCReport {
  std::vector<MCCell> cells;
};

// Frames for one synthetic map, tagged with its autocorrelation level.
struct RhoFrames {
  double rho = 0.0;
  std::vector<FrameSnapshot> frames;
};

struct CellRequest {
  DesignKind design = DesignKind::fpps;
  double rho = 0.0;  // reporting + seed derivation; the frame does not know it
  int m = 0;
  int n_bar = 0;
  int replicates = 0;
  std::uint64_t master_seed = 1;
  int threads = 1;
  bool want_joint = false;
  std::string stage = "mc";  // seed-derivation label; screened reruns use their own
  DesignOptions options;
};

// Runs one cell: replicate r is seeded from (master_seed, stage, design,
// day, rho, m, n_bar, r), so results are independent of thread count and of
// which other cells run.
MCCell run_cell(const FrameSnapshot& frame, const CellRequest& req);

MCReport run_experiment(const ExperimentConfig& config,
                        const std::vector<RhoFrames>& snapshots);

// Plug-in entropy -sum p log p of the empirical distribution over distinct
// first-stage sets (natural log, 0 log 0 := 0). Sets are canonicalized by
// sorting before comparison.
double empirical_entropy(const std::vector<std::vector<int>>& draws);

// One row of the relative-entropy table: I(FPPS)/I(method) per method, in
// canonical design order. Zero method entropy yields +infinity.
struct EntropyRatioRow {
  int day = 0;
  double rho = 0.0;
  int m = 0;
  int n_bar = 0;
  std::vector<DesignKind> methods;
  std::vector<double> ratios;
};

std::vector<EntropyRatioRow> relative_entropy_table(const MCReport& report);

// Heterogeneous screening: per map quadrant, a fraction of verified persons
// can be hidden (v: 1 -> 0) or a fraction of unverified infected revealed
// (v: 0 -> 1 for y = 1). The infected total Y is invariant by construction.
struct QuadrantRule {
  double hide_verified = 0.0;
  double reveal_unverified = 0.0;
};

struct ScreeningScenario {
  QuadrantRule top_left, top_right, bottom_left, bottom_right;
};

// The study scenario: hide 80% of verified in the top-right and bottom-left
// quadrants, reveal 80% / 50% of unverified infected in the top-left /
// bottom-right ones.
ScreeningScenario default_screening();

// Applies the scenario to a copy of the frame. Quadrants are processed in
// fixed order (top-left, top-right, bottom-left, bottom-right); inside a
// quadrant both rules act on the labels as they were on entry. Row 0 is the
// top of the map. The affected count is round(fraction * candidates),
// chosen uniformly at random.
FrameSnapshot apply_screening(const FrameSnapshot& frame,
                              const ScreeningScenario& scenario, Rng& rng);

// Homogeneous (frame as simulated) vs heterogeneous (screened frame) cells
// for the same designs; the heterogeneous side redesigns on the screened
// verified counts while the true total stays that of the original frame.
struct ScreeningStudy {
  std::vector<MCCell> homogeneous;
  std::vector<MCCell> heterogeneous;
};

ScreeningStudy run_screening_study(const FrameSnapshot& frame, double rho,
                                   const ScreeningScenario& scenario,
                                   const std::vector<DesignKind>& designs,
                                   int m, int n_bar, int replicates,
                                   std::uint64_t master_seed, int threads = 1);

// CSV rows `day,rho,design,m,n_bar,true,estimate,rab,se`, header first,
// sorted by (day, rho, design, m, n_bar).
std::vector<std::string> summarize_tables(const MCReport& report);

// The headline (m, n_bar) combination reported in tables 3, 5 and 6:
// (80, 3) when the config ran it, otherwise the first configured pair.
std::pair<int, int> headline_pair(const ExperimentConfig& config);

// Writes tables/table3..6.csv under `dir` (created if missing). Table 3 is
// the entropy-ratio table; table 4 the day `survey_days.front()` summary;
// table 5 the rel_SE matrix across days and rho levels; table 6 the
// screening comparison (skipped when `screening` is null).
void write_tables(const MCReport& report, const ScreeningStudy* screening,
                  const ExperimentConfig& config, const std::string& dir);

}  // namespace spatsurv
