#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spatsurv/grid.hpp"
#include "spatsurv/rng.hpp"

namespace spatsurv {

// S -> E -> {I | A} -> {R | D}. I is symptomatic-and-verified (quarantined
// at home), A is infectious but undetected.
enum class HealthState : std::uint8_t {
  susceptible,
  exposed,
  infected,      // symptomatic, verified
  asymptomatic,  // infectious, unverified
  recovered,
  dead,
};

struct DiseaseParams {
  int exposed_duration = 5;     // days spent in E
  int infectious_duration = 14; // days spent in I or A
  double p_exposed_to_infected = 0.25;
  double p_exposed_to_asymptomatic = 0.75;
  double p_infected_to_recovered = 0.85;
  double p_infected_to_dead = 0.15;

  void validate() const;  // rows of the transition matrix must sum to 1
};

// One containment phase of the mobility/contact schedule.
struct PhaseParams {
  int duration_days = 0;
  double center_frac = 0.0;    // share of mobile persons drawn to the central cells
  double neighbor_frac = 0.0;  // share moving to a queen-adjacent cell
  double mean_meetings = 0.0;  // Poisson mean of meetings per cell per day
  double mean_meeting_size = 0.0;  // Poisson mean of participants per meeting
  int infections_per_meeting = 0;  // cap on new exposures per contagious meeting

  void validate() const;
};

std::vector<PhaseParams> default_phase_schedule();  // 28-day open + 42-day lockdown

struct Person {
  int home_cell;
  HealthState state;
  int days_in_state;
};

struct EpidemicState {
  GridSpec grid;
  int day = 0;  // days simulated so far
  std::vector<Person> persons;
  std::vector<int> location;  // cell occupied today; -1 once dead
};

struct DailyCounts {
  int day;
  std::int64_t s, e, i, a, r, d;
};

// Per-cell sampling frame for one day. Index j within a cell enumerates the
// living residents of that cell in person-id order.
struct CellFrame {
  std::vector<int> person;     // global person ids
  std::vector<std::uint8_t> y; // 1 = infected (study variable)
  std::vector<std::uint8_t> v; // 1 = verified infected (balancing variable)
};

struct FrameSnapshot {
  GridSpec grid;
  int day = 0;
  std::vector<CellFrame> cells;
  std::vector<int> n_i;  // living residents per cell
  std::vector<int> v_i;  // verified infected per cell
  std::vector<int> y_i;  // infected per cell
  std::int64_t total_n = 0, total_v = 0, total_y = 0;

  void recount();  // recompute the aggregates from the per-person flags
};

struct RunOptions {
  // y counts I and A; flipping this also counts E as infected.
  bool include_exposed_in_y = false;
};

struct EpidemicRun {
  std::vector<FrameSnapshot> frames;       // one per day, 1-based day numbers
  std::vector<DailyCounts> counts;
  std::vector<double> moran_verified;      // Moran's I of per-cell I counts (NaN when constant)
  std::vector<double> moran_infected;      // Moran's I of per-cell I+A counts
};

EpidemicState init_epidemic(const PopulationGrid& grid, int seed_cases, Rng& rng);

// Advance one day: mobility, meetings, return home, clocks and transitions.
EpidemicState step_day(EpidemicState state, const PhaseParams& phase,
                       const DiseaseParams& disease, Rng& rng);

FrameSnapshot snapshot_frame(const EpidemicState& state, const RunOptions& options = {});

EpidemicRun run_epidemic(const PopulationGrid& grid,
                         const std::vector<PhaseParams>& phases,
                         const DiseaseParams& disease, int seed_cases,
                         std::uint64_t rng_seed, const RunOptions& options = {});

// The up-to-four cells nearest the grid center (the "center of attraction").
std::vector<int> central_cells(const GridSpec& spec);

void write_daily_csv(const EpidemicRun& run, const std::string& path);
void write_frame_csv(const FrameSnapshot& frame, const std::string& path);

// Rebuilds a frame written by write_frame_csv. Per-person labels are
// reconstructed in canonical order (verified, then unverified infected,
// then the rest); identities within a cell are exchangeable as far as
// second-stage sampling is concerned.
FrameSnapshot read_frame_csv(const std::string& path, const GridSpec& grid);

}  // namespace spatsurv
