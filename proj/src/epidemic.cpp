#include "spatsurv/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "spatsurv/csv.hpp"

namespace spatsurv {

namespace {
constexpr double kProbEps = 1e-12;

bool is_mobile(HealthState s) {
  return s == HealthState::susceptible || s == HealthState::exposed ||
         s == HealthState::asymptomatic || s == HealthState::recovered;
}

bool is_contagious(HealthState s) {
  return s == HealthState::exposed || s == HealthState::asymptomatic;
}

}  // namespace

void DiseaseParams::validate() const {
  if (exposed_duration < 1)
    throw std::invalid_argument("disease: exposed_duration must be at least 1");
  if (infectious_duration < 1)
    throw std::invalid_argument("disease: infectious_duration must be at least 1");
  for (double p : {p_exposed_to_infected, p_exposed_to_asymptomatic,
                   p_infected_to_recovered, p_infected_to_dead}) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("disease: transition probabilities must lie in [0, 1]");
  }
  if (std::abs(p_exposed_to_infected + p_exposed_to_asymptomatic - 1.0) > kProbEps)
    throw std::invalid_argument("disease: E-row of the transition matrix must sum to 1");
  if (std::abs(p_infected_to_recovered + p_infected_to_dead - 1.0) > kProbEps)
    throw std::invalid_argument("disease: I-row of the transition matrix must sum to 1");
}

void PhaseParams::validate() const {
  if (duration_days < 1)
    throw std::invalid_argument("phase: duration_days must be at least 1");
  if (!(center_frac >= 0.0 && neighbor_frac >= 0.0 &&
        center_frac + neighbor_frac <= 1.0))
    throw std::invalid_argument("phase: mobility fractions must be non-negative and sum to at most 1");
  if (!(mean_meetings >= 0.0) || !(mean_meeting_size >= 0.0))
    throw std::invalid_argument("phase: meeting means must be non-negative");
  if (infections_per_meeting < 0)
    throw std::invalid_argument("phase: infections_per_meeting must be non-negative");
}

std::vector<PhaseParams> default_phase_schedule() {
  PhaseParams open;
  open.duration_days = 28;
  open.center_frac = 0.10;
  open.neighbor_frac = 0.05;
  open.mean_meetings = 5.0;
  open.mean_meeting_size = 5.0;
  open.infections_per_meeting = 2;

  PhaseParams lockdown;
  lockdown.duration_days = 42;
  lockdown.center_frac = 0.01;
  lockdown.neighbor_frac = 0.0;
  lockdown.mean_meetings = 2.0;
  lockdown.mean_meeting_size = 3.0;
  lockdown.infections_per_meeting = 1;

  return {open, lockdown};
}

std::vector<int> central_cells(const GridSpec& spec) {
  const int r0 = (spec.rows - 1) / 2, r1 = spec.rows / 2;
  const int c0 = (spec.cols - 1) / 2, c1 = spec.cols / 2;
  std::vector<int> cells;
  for (int r : {r0, r1}) {
    for (int c : {c0, c1}) {
      const int cell = spec.index_of(r, c);
      if (std::find(cells.begin(), cells.end(), cell) == cells.end())
        cells.push_back(cell);
    }
  }
  return cells;
}

EpidemicState init_epidemic(const PopulationGrid& grid, int seed_cases, Rng& rng) {
  grid.spec.validate();
  if (seed_cases < 1 || seed_cases > grid.total)
    throw std::invalid_argument("init_epidemic: seed_cases must lie in [1, population]");

  EpidemicState st;
  st.grid = grid.spec;
  st.day = 0;
  st.persons.reserve(grid.total);
  for (int cell = 0; cell < grid.spec.cell_count(); ++cell) {
    for (std::int64_t k = 0; k < grid.counts[cell]; ++k) {
      st.persons.push_back({cell, HealthState::susceptible, 0});
    }
  }
  for (int idx : sample_without_replacement(static_cast<int>(st.persons.size()),
                                            seed_cases, rng)) {
    st.persons[idx].state = HealthState::exposed;
    st.persons[idx].days_in_state = 0;
  }
  st.location.resize(st.persons.size());
  for (std::size_t p = 0; p < st.persons.size(); ++p)
    st.location[p] = st.persons[p].home_cell;
  return st;
}

EpidemicState step_day(EpidemicState state, const PhaseParams& phase,
                       const DiseaseParams& disease, Rng& rng) {
  phase.validate();
  disease.validate();

  const GridSpec& spec = state.grid;
  const std::vector<int> centers = central_cells(spec);

  // Queen-adjacent destinations per cell, built once per step (cheap).
  std::vector<std::vector<int>> queen(spec.cell_count());
  {
    const SpatialWeights w = build_weight_matrix(spec, Contiguity::queen, false);
    for (int cell = 0; cell < spec.cell_count(); ++cell) {
      queen[cell].assign(w.neighbor.begin() + w.row_offset[cell],
                         w.neighbor.begin() + w.row_offset[cell + 1]);
    }
  }

  // (1) Mobility. The symptomatic are quarantined at home; the dead are
  // nowhere. Everyone else either gravitates to the center, steps to a
  // queen-adjacent cell, or stays home for the day.
  for (std::size_t p = 0; p < state.persons.size(); ++p) {
    const Person& person = state.persons[p];
    if (person.state == HealthState::dead) {
      state.location[p] = -1;
      continue;
    }
    if (person.state == HealthState::infected) {
      state.location[p] = person.home_cell;
      continue;
    }
    int loc = person.home_cell;
    if (is_mobile(person.state)) {
      const double u = rng.uniform();
      if (u < phase.center_frac) {
        loc = centers[rng.uniform_int(0, static_cast<std::int64_t>(centers.size()) - 1)];
      } else if (u < phase.center_frac + phase.neighbor_frac) {
        const auto& nb = queen[person.home_cell];
        loc = nb[rng.uniform_int(0, static_cast<std::int64_t>(nb.size()) - 1)];
      }
    }
    state.location[p] = loc;
  }

  // (2) Meetings. The meeting pool per cell is everyone present except the
  // quarantined symptomatic; new exposures take effect immediately, so a
  // person exposed in one meeting is already contagious in later ones.
  std::vector<std::vector<int>> pool(spec.cell_count());
  for (std::size_t p = 0; p < state.persons.size(); ++p) {
    const HealthState s = state.persons[p].state;
    if (state.location[p] >= 0 && s != HealthState::infected &&
        s != HealthState::dead) {
      pool[state.location[p]].push_back(static_cast<int>(p));
    }
  }
  for (int cell = 0; cell < spec.cell_count(); ++cell) {
    const auto& present = pool[cell];
    const int meetings = rng.poisson(phase.mean_meetings);
    for (int meeting = 0; meeting < meetings; ++meeting) {
      int size = rng.poisson(phase.mean_meeting_size);
      size = std::min<int>(size, static_cast<int>(present.size()));
      if (size < 2) continue;  // nobody to meet
      const std::vector<int> chosen =
          sample_without_replacement(static_cast<int>(present.size()), size, rng);
      bool contagious = false;
      std::vector<int> susceptible;
      for (int k : chosen) {
        const int pid = present[k];
        if (is_contagious(state.persons[pid].state)) contagious = true;
        if (state.persons[pid].state == HealthState::susceptible)
          susceptible.push_back(pid);
      }
      if (!contagious || susceptible.empty()) continue;
      const int infections =
          std::min<int>(phase.infections_per_meeting, static_cast<int>(susceptible.size()));
      if (infections <= 0) continue;
      for (int k : sample_without_replacement(static_cast<int>(susceptible.size()),
                                              infections, rng)) {
        state.persons[susceptible[k]].state = HealthState::exposed;
        state.persons[susceptible[k]].days_in_state = 0;
      }
    }
  }

  // (3) Return home.
  for (std::size_t p = 0; p < state.persons.size(); ++p) {
    state.location[p] = state.persons[p].state == HealthState::dead
                            ? -1
                            : state.persons[p].home_cell;
  }

  // (4) Clocks and transitions.
  for (std::size_t p = 0; p < state.persons.size(); ++p) {
    Person& person = state.persons[p];
    switch (person.state) {
      case HealthState::exposed:
        if (++person.days_in_state >= disease.exposed_duration) {
          person.state = rng.bernoulli(disease.p_exposed_to_infected)
                             ? HealthState::infected
                             : HealthState::asymptomatic;
          person.days_in_state = 0;
        }
        break;
      case HealthState::infected:
        if (++person.days_in_state >= disease.infectious_duration) {
          person.state = rng.bernoulli(disease.p_infected_to_dead)
                             ? HealthState::dead
                             : HealthState::recovered;
          person.days_in_state = 0;
          if (person.state == HealthState::dead) state.location[p] = -1;
        }
        break;
      case HealthState::asymptomatic:
        if (++person.days_in_state >= disease.infectious_duration) {
          person.state = HealthState::recovered;
          person.days_in_state = 0;
        }
        break;
      default:
        break;  // S, R, D carry no clock
    }
  }

  ++state.day;
  return state;
}

void FrameSnapshot::recount() {
  const int m = static_cast<int>(cells.size());
  n_i.assign(m, 0);
  v_i.assign(m, 0);
  y_i.assign(m, 0);
  total_n = total_v = total_y = 0;
  for (int c = 0; c < m; ++c) {
    n_i[c] = static_cast<int>(cells[c].person.size());
    for (std::uint8_t f : cells[c].v) v_i[c] += f;
    for (std::uint8_t f : cells[c].y) y_i[c] += f;
    total_n += n_i[c];
    total_v += v_i[c];
    total_y += y_i[c];
  }
}

FrameSnapshot snapshot_frame(const EpidemicState& state, const RunOptions& options) {
  FrameSnapshot fr;
  fr.grid = state.grid;
  fr.day = state.day;
  fr.cells.resize(state.grid.cell_count());
  for (std::size_t p = 0; p < state.persons.size(); ++p) {
    const Person& person = state.persons[p];
    if (person.state == HealthState::dead) continue;
    CellFrame& cf = fr.cells[person.home_cell];
    const bool infected = person.state == HealthState::infected ||
                          person.state == HealthState::asymptomatic ||
                          (options.include_exposed_in_y &&
                           person.state == HealthState::exposed);
    cf.person.push_back(static_cast<int>(p));
    cf.y.push_back(infected ? 1 : 0);
    cf.v.push_back(person.state == HealthState::infected ? 1 : 0);
  }
  fr.recount();
  return fr;
}

EpidemicRun run_epidemic(const PopulationGrid& grid,
                         const std::vector<PhaseParams>& phases,
                         const DiseaseParams& disease, int seed_cases,
                         std::uint64_t rng_seed, const RunOptions& options) {
  if (phases.empty())
    throw std::invalid_argument("run_epidemic: phase schedule is empty");
  for (const PhaseParams& ph : phases) ph.validate();
  disease.validate();

  Rng rng(rng_seed);
  EpidemicState st = init_epidemic(grid, seed_cases, rng);

  const SpatialWeights moran_w =
      build_weight_matrix(grid.spec, Contiguity::queen, true);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  EpidemicRun run;
  for (const PhaseParams& phase : phases) {
    for (int d = 0; d < phase.duration_days; ++d) {
      st = step_day(std::move(st), phase, disease, rng);
      FrameSnapshot fr = snapshot_frame(st, options);

      DailyCounts dc{st.day, 0, 0, 0, 0, 0, 0};
      for (const Person& p : st.persons) {
        switch (p.state) {
          case HealthState::susceptible: ++dc.s; break;
          case HealthState::exposed: ++dc.e; break;
          case HealthState::infected: ++dc.i; break;
          case HealthState::asymptomatic: ++dc.a; break;
          case HealthState::recovered: ++dc.r; break;
          case HealthState::dead: ++dc.d; break;
        }
      }
      run.counts.push_back(dc);

      std::vector<double> verified(fr.v_i.begin(), fr.v_i.end());
      std::vector<double> infected(fr.y_i.begin(), fr.y_i.end());
      try {
        run.moran_verified.push_back(morans_i(verified, moran_w));
      } catch (const std::invalid_argument&) {
        run.moran_verified.push_back(nan);
      }
      try {
        run.moran_infected.push_back(morans_i(infected, moran_w));
      } catch (const std::invalid_argument&) {
        run.moran_infected.push_back(nan);
      }

      run.frames.push_back(std::move(fr));
    }
  }
  return run;
}

void write_daily_csv(const EpidemicRun& run, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "day,S,E,I,A,R,D,moran_I_known,moran_I_total\n";
  for (std::size_t k = 0; k < run.counts.size(); ++k) {
    const DailyCounts& dc = run.counts[k];
    out << dc.day << ',' << dc.s << ',' << dc.e << ',' << dc.i << ','
        << dc.a << ',' << dc.r << ',' << dc.d << ','
        << format_double(run.moran_verified[k]) << ','
        << format_double(run.moran_infected[k]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_frame_csv(const FrameSnapshot& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "day,cell,N_i,V_i,Y_i\n";
  for (std::size_t c = 0; c < frame.cells.size(); ++c) {
    out << frame.day << ',' << c << ',' << frame.n_i[c] << ',' << frame.v_i[c]
        << ',' << frame.y_i[c] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

FrameSnapshot read_frame_csv(const std::string& path, const GridSpec& grid) {
  grid.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open frame file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "day,cell,N_i,V_i,Y_i")
    throw std::runtime_error("frame file has unexpected header: " + path);

  const int cells = grid.cell_count();
  FrameSnapshot frame;
  frame.grid = grid;
  frame.cells.resize(cells);
  frame.n_i.assign(cells, 0);
  frame.v_i.assign(cells, 0);
  frame.y_i.assign(cells, 0);
  std::vector<char> seen(cells, 0);
  int day = -1;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int d = 0, cell = 0, n = 0, v = 0, y = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%d", &d, &cell, &n, &v, &y) != 5)
      throw std::runtime_error("frame file has a malformed row: " + path);
    if (cell < 0 || cell >= cells || seen[cell])
      throw std::runtime_error("frame file cell ids do not match the grid: " + path);
    if (day >= 0 && d != day)
      throw std::runtime_error("frame file mixes days: " + path);
    if (v < 0 || y < v || n < y)
      throw std::runtime_error("frame file counts are inconsistent: " + path);
    day = d;
    seen[cell] = 1;
    frame.n_i[cell] = n;
    frame.v_i[cell] = v;
    frame.y_i[cell] = y;
    ++rows;
  }
  if (rows != cells)
    throw std::runtime_error("frame file is missing cells: " + path);

  frame.day = day;
  int next_id = 0;
  for (int c = 0; c < cells; ++c) {
    CellFrame& cf = frame.cells[c];
    const int n = frame.n_i[c];
    cf.person.resize(n);
    cf.y.assign(n, 0);
    cf.v.assign(n, 0);
    for (int p = 0; p < n; ++p) {
      cf.person[p] = next_id++;
      if (p < frame.y_i[c]) cf.y[p] = 1;
      if (p < frame.v_i[c]) cf.v[p] = 1;
    }
  }
  frame.recount();
  return frame;
}

}  // namespace spatsurv
