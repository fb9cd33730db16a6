#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatsurv/epidemic.hpp"
#include "spatsurv/grid.hpp"
#include "spatsurv/harness.hpp"
#include "spatsurv/rng.hpp"
#include "spatsurv/sampling.hpp"

using namespace spatsurv;
namespace fs = std::filesystem;

namespace {

FrameSnapshot make_frame(const GridSpec& spec, const std::vector<int>& n,
                         const std::vector<int>& v, const std::vector<int>& y,
                         int day = 1) {
  FrameSnapshot f;
  f.grid = spec;
  f.day = day;
  f.cells.resize(n.size());
  f.n_i = n;
  f.v_i = v;
  f.y_i = y;
  int pid = 0;
  for (std::size_t c = 0; c < n.size(); ++c) {
    auto& cf = f.cells[c];
    for (int j = 0; j < n[c]; ++j) {
      cf.person.push_back(pid++);
      cf.y.push_back(j < y[c] ? 1 : 0);
      cf.v.push_back(j < v[c] ? 1 : 0);
    }
  }
  f.recount();
  return f;
}

FrameSnapshot six_cluster_frame(int day = 1) {
  return make_frame(GridSpec{2, 3, 1.0}, {10, 14, 8, 12, 9, 11},
                    {2, 0, 3, 1, 2, 1}, {4, 0, 5, 2, 3, 2}, day);
}

// Full-size realization shared by the reduced-scale invariant checks.
const EpidemicRun& study_run() {
  static const EpidemicRun run = [] {
    const auto grid = generate_population(GridSpec{20, 20, 1.0}, 0.3, 20000, 404);
    return run_epidemic(grid, default_phase_schedule(), DiseaseParams{}, 8, 405);
  }();
  return run;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("empirical entropy counts distinct canonical sets") {
  CHECK_THROWS_AS(empirical_entropy({}), std::invalid_argument);
  CHECK(empirical_entropy({{1, 2}, {2, 1}, {1, 2}}) == doctest::Approx(0.0));
  CHECK(empirical_entropy({{1, 2}, {3, 4}}) == doctest::Approx(std::log(2.0)));
  std::vector<std::vector<int>> draws;
  for (int k = 0; k < 7; ++k) draws.push_back({k, k + 1});
  CHECK(empirical_entropy(draws) == doctest::Approx(std::log(7.0)));
}

TEST_CASE("relative entropy table is anchored at fpps") {
  MCCell fpps;
  fpps.design = DesignKind::fpps;
  fpps.day = 15;
  fpps.rho = 0.3;
  fpps.m = 3;
  fpps.n_bar = 2;
  fpps.entropy = 1.2;
  MCCell lp = fpps;
  lp.design = DesignKind::lp;
  lp.entropy = 1.2;
  MCCell lcbv = fpps;
  lcbv.design = DesignKind::lcbv;
  lcbv.entropy = 0.0;

  MCReport report;
  report.cells = {fpps, lp, lcbv};
  const auto rows = relative_entropy_table(report);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].methods.size() == 2);
  CHECK(rows[0].methods[0] == DesignKind::lp);
  CHECK(rows[0].ratios[0] == doctest::Approx(1.0));
  CHECK(rows[0].methods[1] == DesignKind::lcbv);
  CHECK(std::isinf(rows[0].ratios[1]));

  MCReport no_anchor;
  no_anchor.cells = {lp};
  CHECK_THROWS_WITH_AS(relative_entropy_table(no_anchor),
                       doctest::Contains("FPPS"), std::runtime_error);
}

TEST_CASE("run_cell is deterministic and thread-count invariant") {
  const auto frame = six_cluster_frame();
  CellRequest req;
  req.design = DesignKind::lcbv;
  req.rho = 0.3;
  req.m = 3;
  req.n_bar = 2;
  req.replicates = 400;
  req.master_seed = 99;

  const MCCell a = run_cell(frame, req);
  const MCCell b = run_cell(frame, req);
  req.threads = 3;
  const MCCell c = run_cell(frame, req);

  CHECK(a.mean_estimate == b.mean_estimate);
  CHECK(a.rab == b.rab);
  CHECK(a.rel_se == b.rel_se);
  CHECK(a.entropy == b.entropy);
  CHECK(a.distinct_sets == b.distinct_sets);
  CHECK(a.incl_first == b.incl_first);
  CHECK(a.mean_estimate == c.mean_estimate);
  CHECK(a.rel_se == c.rel_se);
  CHECK(a.entropy == c.entropy);
  CHECK(a.true_value == doctest::Approx(16.0));  // frame total y

  req.threads = 1;
  req.replicates = 1;
  CHECK_THROWS_WITH_AS(run_cell(frame, req), doctest::Contains("at least 2"),
                       std::invalid_argument);
  const auto clean = make_frame(GridSpec{1, 2, 1.0}, {5, 5}, {0, 0}, {0, 0});
  req.replicates = 10;
  CHECK_THROWS_WITH_AS(run_cell(clean, req), doctest::Contains("no infected"),
                       std::invalid_argument);
}

TEST_CASE("run_experiment covers the grid and insists on its frames") {
  ExperimentConfig config;
  config.rho_levels = {0.3};
  config.survey_days = {1};
  config.designs = {DesignKind::fpps, DesignKind::lcbv};
  config.m_levels = {3};
  config.n_bar_levels = {2, 3};
  config.replicates = 60;
  config.master_seed = 5;

  std::vector<RhoFrames> snaps(1);
  snaps[0].rho = 0.3;
  snaps[0].frames = {six_cluster_frame()};
  const auto report = run_experiment(config, snaps);
  CHECK(report.cells.size() == 2 * 1 * 1 * 1 * 2);
  for (const auto& cell : report.cells) {
    CHECK(cell.replicates == 60);
    CHECK(cell.true_value == doctest::Approx(16.0));
    CHECK(std::isfinite(cell.rel_se));
  }

  config.survey_days = {9};
  CHECK_THROWS_WITH_AS(run_experiment(config, snaps),
                       doctest::Contains("no frame for day"), std::runtime_error);
  config.survey_days = {1};
  config.rho_levels = {0.5};
  CHECK_THROWS_WITH_AS(run_experiment(config, snaps),
                       doctest::Contains("no frames for rho"), std::runtime_error);
  config.rho_levels = {0.3};
  config.replicates = 1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("screening keeps the infected labels and only flips verification") {
  const auto& run = study_run();
  const auto& frame = run.frames[28];  // day 29
  Rng rng(911);
  const auto screened = apply_screening(frame, default_screening(), rng);
  CHECK(screened.total_y == frame.total_y);
  CHECK(screened.y_i == frame.y_i);
  CHECK(screened.n_i == frame.n_i);
  CHECK(screened.total_v != frame.total_v);  // the default scenario acts
  for (std::size_t c = 0; c < screened.cells.size(); ++c) {
    CHECK(screened.v_i[c] <= screened.y_i[c]);
    for (std::size_t p = 0; p < screened.cells[c].v.size(); ++p) {
      if (screened.cells[c].v[p]) CHECK(screened.cells[c].y[p] == 1);
    }
  }
}

TEST_CASE("an identity scenario leaves the frame untouched") {
  // quadrant split needs even dimensions, so not the 2x3 fixture
  const auto frame = make_frame(GridSpec{2, 2, 1.0}, {20, 12, 9, 10},
                                {10, 5, 4, 6}, {17, 9, 6, 9});
  Rng rng(12);
  const auto same = apply_screening(frame, ScreeningScenario{}, rng);
  CHECK(same.v_i == frame.v_i);
  CHECK(same.y_i == frame.y_i);
  CHECK(same.total_v == frame.total_v);
}

TEST_CASE("screening counts follow round(fraction x candidates) per quadrant") {
  // 2x2 grid: each quadrant is a single cell
  const auto frame = make_frame(GridSpec{2, 2, 1.0}, {20, 12, 9, 10},
                                {10, 5, 4, 6}, {17, 9, 6, 9});
  ScreeningScenario sc;
  sc.top_left = {0.0, 0.8};      // reveal 0.8 of 7 hidden -> +6
  sc.top_right = {0.8, 0.0};     // hide 0.8 of 5 verified -> -4
  sc.bottom_left = {0.5, 0.0};   // hide 0.5 of 4 -> -2
  sc.bottom_right = {0.0, 0.5};  // reveal 0.5 of 3 hidden -> +2
  Rng rng(77);
  const auto screened = apply_screening(frame, sc, rng);
  CHECK(screened.v_i[0] == 16);
  CHECK(screened.v_i[1] == 1);
  CHECK(screened.v_i[2] == 2);
  CHECK(screened.v_i[3] == 8);
  CHECK(screened.y_i == frame.y_i);

  ScreeningScenario bad;
  bad.top_left = {1.5, 0.0};
  CHECK_THROWS_WITH_AS(apply_screening(frame, bad, rng),
                       doctest::Contains("outside [0, 1]"), std::invalid_argument);
  const auto odd = make_frame(GridSpec{3, 3, 1.0}, std::vector<int>(9, 4),
                              std::vector<int>(9, 1), std::vector<int>(9, 2));
  CHECK_THROWS_WITH_AS(apply_screening(odd, ScreeningScenario{}, rng),
                       doctest::Contains("divide evenly"), std::invalid_argument);
}

TEST_CASE("the screening study reuses the plain cells and the original truth") {
  const auto frame = make_frame(GridSpec{2, 2, 1.0}, {20, 12, 9, 10},
                                {10, 5, 4, 6}, {17, 9, 6, 9});
  const auto study = run_screening_study(frame, 0.3, default_screening(),
                                         {DesignKind::lcbv, DesignKind::lcbvg},
                                         2, 3, 300, 31);
  REQUIRE(study.homogeneous.size() == 2);
  REQUIRE(study.heterogeneous.size() == 2);

  CellRequest req;
  req.design = DesignKind::lcbv;
  req.rho = 0.3;
  req.m = 2;
  req.n_bar = 3;
  req.replicates = 300;
  req.master_seed = 31;
  const MCCell plain = run_cell(frame, req);
  CHECK(study.homogeneous[0].mean_estimate == plain.mean_estimate);
  CHECK(study.homogeneous[0].rel_se == plain.rel_se);

  for (const auto& cell : study.heterogeneous) {
    CHECK(cell.true_value == doctest::Approx(frame.total_y));
    CHECK(std::isfinite(cell.rel_se));
  }
  // screened verified counts differ, so the redesigned draws differ too
  CHECK(study.heterogeneous[0].mean_estimate !=
        study.homogeneous[0].mean_estimate);
}

TEST_CASE("headline pair prefers the published combination") {
  ExperimentConfig config;
  config.m_levels = {20, 80, 160};
  config.n_bar_levels = {1, 3};
  CHECK(headline_pair(config) == std::pair<int, int>{80, 3});
  config.m_levels = {40};
  config.n_bar_levels = {5};
  CHECK(headline_pair(config) == std::pair<int, int>{40, 5});
}

TEST_CASE("summary rows carry the canonical header and ordering") {
  ExperimentConfig config;
  config.rho_levels = {0.3};
  config.survey_days = {1};
  config.designs = {DesignKind::lcbv, DesignKind::fpps};
  config.m_levels = {3};
  config.n_bar_levels = {2};
  config.replicates = 50;
  config.master_seed = 8;
  std::vector<RhoFrames> snaps(1);
  snaps[0].rho = 0.3;
  snaps[0].frames = {six_cluster_frame()};
  const auto report = run_experiment(config, snaps);

  const auto rows = summarize_tables(report);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "day,rho,design,m,n_bar,true,estimate,rab,se");
  CHECK(rows[1].substr(0, 11) == "1,0.3,fpps,");
  CHECK(rows[2].substr(0, 11) == "1,0.3,lcbv,");
}

TEST_CASE("tables are written byte-identically") {
  ExperimentConfig config;
  config.rho_levels = {0.3};
  config.survey_days = {1};
  config.designs = {DesignKind::fpps, DesignKind::lcbv};
  config.m_levels = {3};
  config.n_bar_levels = {2};
  config.replicates = 80;
  config.master_seed = 21;
  std::vector<RhoFrames> snaps(1);
  snaps[0].rho = 0.3;
  snaps[0].frames = {six_cluster_frame()};
  const auto report = run_experiment(config, snaps);

  const fs::path dir_a = "tables_check_a";
  const fs::path dir_b = "tables_check_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  write_tables(report, nullptr, config, dir_a.string());
  write_tables(report, nullptr, config, dir_b.string());
  for (const char* name : {"table3.csv", "table4.csv", "table5.csv"}) {
    const auto a = slurp(dir_a / name);
    CHECK(a == slurp(dir_b / name));
    CHECK(a.find('\r') == std::string::npos);
  }
  CHECK(!fs::exists(dir_a / "table6.csv"));

  const auto frame = make_frame(GridSpec{2, 2, 1.0}, {20, 12, 9, 10},
                                {10, 5, 4, 6}, {17, 9, 6, 9});
  const auto study = run_screening_study(frame, 0.3, default_screening(),
                                         {DesignKind::lcbv}, 2, 2, 120, 3);
  write_tables(report, &study, config, dir_a.string());
  CHECK(fs::exists(dir_a / "table6.csv"));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("estimates stay unbiased at full scale" * doctest::timeout(120)) {
  const auto& run = study_run();
  const auto& frame = run.frames[42];  // day 43
  CellRequest req;
  req.design = DesignKind::fpps;
  req.rho = 0.3;
  req.m = 80;
  req.n_bar = 3;
  req.replicates = 10000;
  req.master_seed = 640;
  const MCCell cell = run_cell(frame, req);
  CHECK(cell.rab <= 0.02);
  CHECK(cell.rel_se < 1.0);
}

TEST_CASE("balanced local designs beat fpps on the day-15 frame" *
          doctest::timeout(120)) {
  const auto& run = study_run();
  const auto& frame = run.frames[14];  // day 15
  auto se_of = [&](DesignKind k) {
    CellRequest req;
    req.design = k;
    req.rho = 0.3;
    req.m = 80;
    req.n_bar = 3;
    req.replicates = 2000;
    req.master_seed = 641;
    return run_cell(frame, req).rel_se;
  };
  const double fpps = se_of(DesignKind::fpps);
  const double lp = se_of(DesignKind::lp);
  const double lcbv = se_of(DesignKind::lcbv);
  const double lcbvg = se_of(DesignKind::lcbvg);
  CHECK(lcbv < lp);
  CHECK(lp < fpps);
  CHECK(lcbvg < fpps);
}

}  // TEST_SUITE
