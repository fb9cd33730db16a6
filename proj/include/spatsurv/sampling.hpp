#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spatsurv/epidemic.hpp"
#include "spatsurv/rng.hpp"

namespace spatsurv {

// First-stage designs. All share the same PPS inclusion probabilities and
// differ in how they spread and/or balance the selected clusters:
//   fpps   fixed-size pps (cube method on the size constraint alone)
//   cbv    cube balanced on the verified-infected totals
//   lp     local pivotal (spatial spreading, no balancing)
//   lcbv   local cube balanced on verified infected
//   lcbg   local cube balanced on the centroid coordinates
//   lcbvg  local cube balanced on verified infected and coordinates
enum class DesignKind { fpps, cbv, lp, lcbv, lcbg, lcbvg };

const char* design_name(DesignKind kind);
DesignKind design_from_name(const std::string& name);  // throws on unknown name

// First-stage inclusion probabilities proportional to cluster counts,
// sum m. Probabilities above 1 are truncated and the excess redistributed
// proportionally over the rest until all lie in [0, 1].
std::vector<double> pps_probabilities(std::span<const std::int64_t> counts, int m);

struct InclusionPlan {
  std::vector<double> pi;       // per-cluster inclusion probabilities
  double expected_size = 0.0;   // sum of pi
  int balance_cols = 0;         // H
  std::vector<double> balance;  // clusters x H, row-major; column 0 is pi
  std::vector<double> cx, cy;   // cluster centroids (locality + geographic balance)

  int clusters() const { return static_cast<int>(pi.size()); }
  double balance_at(int cluster, int col) const { return balance[cluster * balance_cols + col]; }
};

struct DesignOptions {
  bool geo_quadratic = false;       // add cx^2, cy^2, cx*cy balance columns
  bool mutual_nearest = false;      // local pivotal: require mutual nearest neighbors
};

InclusionPlan make_design(DesignKind kind, const FrameSnapshot& frame, int m,
                          int n_bar, const DesignOptions& options = {});

// Cube method flight phase: a martingale walk along null-space directions of
// the balancing system that drives all but at most H probabilities to {0,1}
// while keeping every balance equation exactly satisfied.
std::vector<double> cube_flight(const InclusionPlan& plan, Rng& rng);

// Landing phase: resolves leftover fractional entries by suppressing
// balancing variables one at a time (last column first, the fixed-size
// column last) and re-running the flight on the residual subproblem.
std::vector<int> cube_landing(std::span<const double> flight_pi,
                              const InclusionPlan& plan, Rng& rng);

// Local pivotal method: repeatedly pits a random undecided unit against its
// nearest undecided neighbor; each duel moves their joint probability mass
// until one of them is decided. Preserves the marginal probabilities.
std::vector<int> local_pivotal(const InclusionPlan& plan, Rng& rng,
                               bool mutual_nearest = false);

// Local cube: flight steps on a random undecided unit and its H nearest
// undecided neighbors (spreading + balancing), then a cube landing on the
// residual.
std::vector<int> local_cube(const InclusionPlan& plan, Rng& rng);

std::vector<int> draw_first_stage(const InclusionPlan& plan, DesignKind kind,
                                  Rng& rng, const DesignOptions& options = {});

// Second stage: simple random sampling without replacement of
// min(n_bar, N_i) residents of the cluster; returns indices into the
// cluster's person arrays, sorted.
std::vector<int> second_stage_srswor(const FrameSnapshot& frame, int cluster,
                                     int n_bar, Rng& rng);

struct SampleDraw {
  std::vector<int> clusters;               // selected first-stage clusters, sorted
  std::vector<double> w_first;             // 1 / pi_i
  std::vector<std::vector<int>> persons;   // per cluster, indices into the cell frame
  std::vector<double> w_second;            // N_i / n_i
};

SampleDraw draw_two_stage(const InclusionPlan& plan, DesignKind kind,
                          const FrameSnapshot& frame, int n_bar, Rng& rng,
                          const DesignOptions& options = {});

struct InclusionEstimate {
  int draws = 0;
  std::vector<double> first;  // empirical first-order inclusion frequencies
  std::vector<double> joint;  // clusters x clusters, filled when requested
};

// Monte Carlo estimate of first- and second-order inclusion probabilities
// of a first-stage design (the local designs have no closed-form joints).
InclusionEstimate estimate_inclusion(const InclusionPlan& plan, DesignKind kind,
                                     int draws, std::uint64_t seed,
                                     bool want_joint = false,
                                     const DesignOptions& options = {});

}  // namespace spatsurv
