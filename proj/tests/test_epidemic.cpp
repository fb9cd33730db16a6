#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatsurv/epidemic.hpp"
#include "spatsurv/grid.hpp"
#include "spatsurv/rng.hpp"

using namespace spatsurv;

namespace {

EpidemicState two_person_cell(HealthState other) {
  EpidemicState st;
  st.grid = GridSpec{2, 2, 1.0};  // smallest valid grid; both persons share cell 0
  st.persons = {Person{0, HealthState::susceptible, 0}, Person{0, other, 0}};
  st.location = {0, 0};
  return st;
}

// A modest full run shared by several cases (built once).
const EpidemicRun& small_run() {
  static const EpidemicRun run = [] {
    const auto grid = generate_population(GridSpec{6, 6, 1.0}, 0.3, 800, 17);
    return run_epidemic(grid, default_phase_schedule(), DiseaseParams{}, 5, 555);
  }();
  return run;
}

}  // namespace

TEST_SUITE("epidemic") {

TEST_CASE("transition rows must sum to one") {
  DiseaseParams p;
  CHECK_NOTHROW(p.validate());
  p.p_exposed_to_infected = 0.5;  // 0.5 + 0.75 != 1
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = DiseaseParams{};
  p.p_infected_to_dead = 0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = DiseaseParams{};
  p.exposed_duration = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("default schedule carries the two published phases") {
  const auto phases = default_phase_schedule();
  REQUIRE(phases.size() == 2);
  CHECK(phases[0].duration_days == 28);
  CHECK(phases[0].center_frac == doctest::Approx(0.10));
  CHECK(phases[0].neighbor_frac == doctest::Approx(0.05));
  CHECK(phases[0].mean_meetings == doctest::Approx(5.0));
  CHECK(phases[0].mean_meeting_size == doctest::Approx(5.0));
  CHECK(phases[0].infections_per_meeting == 2);
  CHECK(phases[1].duration_days == 42);
  CHECK(phases[1].center_frac == doctest::Approx(0.01));
  CHECK(phases[1].neighbor_frac == doctest::Approx(0.0));
  CHECK(phases[1].mean_meetings == doctest::Approx(2.0));
  CHECK(phases[1].mean_meeting_size == doctest::Approx(3.0));
  CHECK(phases[1].infections_per_meeting == 1);
}

TEST_CASE("seeding is counted, bounded and deterministic") {
  const auto grid = generate_population(GridSpec{4, 4, 1.0}, 0.0, 200, 3);
  Rng rng(9);
  CHECK_THROWS_AS(init_epidemic(grid, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(init_epidemic(grid, 201, rng), std::invalid_argument);

  Rng r1(9), r2(9);
  const auto a = init_epidemic(grid, 10, r1);
  const auto b = init_epidemic(grid, 10, r2);
  int exposed = 0, susceptible = 0;
  for (std::size_t p = 0; p < a.persons.size(); ++p) {
    exposed += a.persons[p].state == HealthState::exposed;
    susceptible += a.persons[p].state == HealthState::susceptible;
    CHECK(a.persons[p].state == b.persons[p].state);
    CHECK(a.persons[p].home_cell == b.persons[p].home_cell);
  }
  CHECK(exposed == 10);
  CHECK(susceptible == 190);
  CHECK(a.day == 0);
}

TEST_CASE("two-person cell exposure probability matches the meeting-process oracle") {
  // closed form 1 - exp(-c_n (1 - e^{-c_p}(1+c_p))) for c_n=3, c_p=4,
  // frozen by tools/oracles/meeting_infection.py
  const double expected = 0.9344711920;
  PhaseParams phase{1, 0.0, 0.0, 3.0, 4.0, 1};
  const DiseaseParams disease;
  const int reps = 100000;
  int exposed = 0;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(77, "meeting-oracle", r));
    auto st = step_day(two_person_cell(HealthState::asymptomatic), phase, disease, rng);
    exposed += st.persons[0].state == HealthState::exposed;
  }
  const double p = static_cast<double>(exposed) / reps;
  CHECK(std::abs(p - expected) < 0.0035);  // 4 sigma binomial ~ 0.0031
}

TEST_CASE("exposed persons are already contagious in meetings") {
  PhaseParams phase{1, 0.0, 0.0, 8.0, 8.0, 1};
  const DiseaseParams disease;
  int exposed = 0;
  for (int r = 0; r < 2000; ++r) {
    Rng rng(derive_seed(78, "e-contagious", r));
    auto st = step_day(two_person_cell(HealthState::exposed), phase, disease, rng);
    exposed += st.persons[0].state == HealthState::exposed;
  }
  CHECK(exposed > 1900);  // p ~ 0.9997 at these means
}

TEST_CASE("the quarantined symptomatic neither move nor meet") {
  PhaseParams phase{1, 0.5, 0.5, 8.0, 8.0, 2};
  const DiseaseParams disease;
  for (int r = 0; r < 500; ++r) {
    EpidemicState st;
    st.grid = GridSpec{2, 2, 1.0};
    st.persons = {Person{0, HealthState::susceptible, 0},
                  Person{0, HealthState::infected, 0}};
    st.location = {0, 0};
    Rng rng(derive_seed(79, "quarantine", r));
    auto next = step_day(std::move(st), phase, disease, rng);
    CHECK(next.persons[0].state == HealthState::susceptible);
    CHECK(next.location[1] == next.persons[1].home_cell);
  }
}

TEST_CASE("no contagion source means no new exposures") {
  PhaseParams phase{1, 0.0, 0.0, 8.0, 8.0, 2};
  const DiseaseParams disease;
  Rng rng(4);
  auto st = step_day(two_person_cell(HealthState::recovered), phase, disease, rng);
  CHECK(st.persons[0].state == HealthState::susceptible);
  CHECK(st.persons[1].state == HealthState::recovered);
}

TEST_CASE("i_m = 0 freezes the epidemic at the seeded cases") {
  const auto grid = generate_population(GridSpec{4, 4, 1.0}, 0.0, 300, 6);
  std::vector<PhaseParams> phases{{20, 0.1, 0.05, 5.0, 5.0, 0}};
  const auto run = run_epidemic(grid, phases, DiseaseParams{}, 7, 88);
  const auto& last = run.counts.back();
  CHECK(last.s == 293);
  CHECK(last.e + last.i + last.a + last.r + last.d == 7);
}

TEST_CASE("deterministic exposure split: p_E_to_I = 1 never produces A") {
  const auto grid = generate_population(GridSpec{4, 4, 1.0}, 0.2, 300, 6);
  DiseaseParams disease;
  disease.p_exposed_to_infected = 1.0;
  disease.p_exposed_to_asymptomatic = 0.0;
  const auto run = run_epidemic(grid, default_phase_schedule(), disease, 7, 12);
  for (const auto& dc : run.counts) CHECK(dc.a == 0);
}

TEST_CASE("conservation, absorption and horizon on a full default run") {
  const auto& run = small_run();
  REQUIRE(run.counts.size() == 70);  // 28 + 42 days
  REQUIRE(run.frames.size() == 70);
  std::int64_t prev_d = 0, prev_r = 0, prev_s = 800;
  for (std::size_t k = 0; k < run.counts.size(); ++k) {
    const auto& dc = run.counts[k];
    CHECK(dc.day == static_cast<int>(k) + 1);
    CHECK(dc.s + dc.e + dc.i + dc.a + dc.r + dc.d == 800);
    CHECK(dc.d >= prev_d);  // dead stay dead
    CHECK(dc.r >= prev_r);  // recovered stay recovered
    CHECK(dc.s <= prev_s);  // infections only accumulate
    prev_d = dc.d;
    prev_r = dc.r;
    prev_s = dc.s;
  }
}

TEST_CASE("frames count living residents and keep Y above V") {
  const auto& run = small_run();
  for (std::size_t k = 0; k < run.frames.size(); ++k) {
    const auto& f = run.frames[k];
    CHECK(f.day == static_cast<int>(k) + 1);
    CHECK(f.total_n == 800 - run.counts[k].d);
    CHECK(f.total_y >= f.total_v);
    std::int64_t n = 0, v = 0, y = 0;
    for (std::size_t c = 0; c < f.cells.size(); ++c) {
      n += f.n_i[c];
      v += f.v_i[c];
      y += f.y_i[c];
      CHECK(f.n_i[c] == static_cast<int>(f.cells[c].person.size()));
      CHECK(f.v_i[c] <= f.y_i[c]);
      CHECK(f.y_i[c] <= f.n_i[c]);
    }
    CHECK(n == f.total_n);
    CHECK(v == f.total_v);
    CHECK(y == f.total_y);
  }
}

TEST_CASE("epidemic curve rises and then falls under the lockdown schedule") {
  const auto& run = small_run();
  std::int64_t peak = 0;
  std::size_t peak_day = 0;
  for (std::size_t k = 0; k < run.counts.size(); ++k) {
    const std::int64_t active = run.counts[k].i + run.counts[k].a;
    if (active > peak) {
      peak = active;
      peak_day = k;
    }
  }
  const std::int64_t last = run.counts.back().i + run.counts.back().a;
  CHECK(peak > 10 * (run.counts.front().i + run.counts.front().a + 1));
  CHECK(peak_day > 5);
  CHECK(peak_day < 60);
  CHECK(last < peak / 2);
}

TEST_CASE("full trajectories are deterministic in the seed") {
  const auto grid = generate_population(GridSpec{5, 5, 1.0}, 0.3, 400, 2);
  const auto a = run_epidemic(grid, default_phase_schedule(), DiseaseParams{}, 4, 99);
  const auto b = run_epidemic(grid, default_phase_schedule(), DiseaseParams{}, 4, 99);
  const auto c = run_epidemic(grid, default_phase_schedule(), DiseaseParams{}, 4, 100);
  REQUIRE(a.counts.size() == b.counts.size());
  bool all_equal = true, any_diff = false;
  for (std::size_t k = 0; k < a.counts.size(); ++k) {
    all_equal &= (a.counts[k].s == b.counts[k].s && a.counts[k].e == b.counts[k].e &&
                  a.counts[k].i == b.counts[k].i && a.counts[k].a == b.counts[k].a &&
                  a.counts[k].r == b.counts[k].r && a.counts[k].d == b.counts[k].d);
    any_diff |= (a.counts[k].s != c.counts[k].s);
  }
  CHECK(all_equal);
  CHECK(any_diff);
  for (std::size_t k = 0; k < a.frames.size(); ++k) {
    CHECK(a.frames[k].y_i == b.frames[k].y_i);
    CHECK(a.frames[k].v_i == b.frames[k].v_i);
  }
}

TEST_CASE("central cells of even and odd grids") {
  const GridSpec even{20, 20, 1.0};
  const auto four = central_cells(even);
  CHECK(four == std::vector<int>{even.index_of(9, 9), even.index_of(9, 10),
                                 even.index_of(10, 9), even.index_of(10, 10)});
  const GridSpec odd{3, 3, 1.0};
  CHECK(central_cells(odd) == std::vector<int>{odd.index_of(1, 1)});
}

TEST_CASE("frame csv roundtrip preserves the counts") {
  const auto& run = small_run();
  const auto& f = run.frames[14];
  const std::string path = "test_frame_roundtrip.csv";
  write_frame_csv(f, path);

  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "day,cell,N_i,V_i,Y_i");
  in.close();

  const auto back = read_frame_csv(path, f.grid);
  CHECK(back.day == f.day);
  CHECK(back.n_i == f.n_i);
  CHECK(back.v_i == f.v_i);
  CHECK(back.y_i == f.y_i);
  CHECK(back.total_n == f.total_n);
  CHECK(back.total_v == f.total_v);
  CHECK(back.total_y == f.total_y);
  // canonical person labels: verified first, then unverified infected
  for (std::size_t c = 0; c < back.cells.size(); ++c) {
    const auto& cf = back.cells[c];
    for (int j = 0; j < back.v_i[c]; ++j) {
      CHECK(cf.v[j] == 1);
      CHECK(cf.y[j] == 1);
    }
    for (int j = back.v_i[c]; j < back.y_i[c]; ++j) {
      CHECK(cf.v[j] == 0);
      CHECK(cf.y[j] == 1);
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("frame csv reader rejects malformed files") {
  const GridSpec grid{2, 2, 1.0};
  CHECK_THROWS_WITH_AS(read_frame_csv("no_such_file.csv", grid),
                       doctest::Contains("cannot open"), std::runtime_error);

  auto write_and_read = [&](const std::string& body) {
    const std::string path = "test_frame_bad.csv";
    std::ofstream out(path, std::ios::binary);
    out << body;
    out.close();
    try {
      read_frame_csv(path, grid);
      std::remove(path.c_str());
      return std::string("no error");
    } catch (const std::runtime_error& e) {
      std::remove(path.c_str());
      return std::string(e.what());
    }
  };

  CHECK(write_and_read("bogus\n1,0,1,0,0\n").find("unexpected header") !=
        std::string::npos);
  CHECK(write_and_read("day,cell,N_i,V_i,Y_i\nx,y\n").find("malformed") !=
        std::string::npos);
  CHECK(write_and_read("day,cell,N_i,V_i,Y_i\n1,9,1,0,0\n").find("cell ids") !=
        std::string::npos);
  CHECK(write_and_read("day,cell,N_i,V_i,Y_i\n1,0,1,0,0\n2,1,1,0,0\n"
                       "1,2,1,0,0\n1,3,1,0,0\n")
            .find("mixes days") != std::string::npos);
  CHECK(write_and_read("day,cell,N_i,V_i,Y_i\n1,0,1,2,1\n1,1,1,0,0\n"
                       "1,2,1,0,0\n1,3,1,0,0\n")
            .find("inconsistent") != std::string::npos);
  CHECK(write_and_read("day,cell,N_i,V_i,Y_i\n1,0,1,0,0\n").find("missing cells") !=
        std::string::npos);
}

TEST_CASE("moran series are computed for the run") {
  const auto& run = small_run();
  REQUIRE(run.moran_infected.size() == 70);
  REQUIRE(run.moran_verified.size() == 70);
  int finite = 0;
  for (double v : run.moran_infected) finite += std::isfinite(v) ? 1 : 0;
  // Constant fields (before takeoff, after die-out) are NaN by design; the
  // active stretch of this small run spans half the horizon.
  CHECK(finite > 25);
}

}  // TEST_SUITE
