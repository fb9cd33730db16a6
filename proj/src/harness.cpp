#include "spatsurv/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "spatsurv/csv.hpp"
#include "spatsurv/estimation.hpp"

namespace spatsurv {

namespace {

std::uint64_t rho_bits(double rho) { return std::bit_cast<std::uint64_t>(rho); }

// Canonical design order used for deterministic rows and columns.
constexpr DesignKind kAllDesigns[] = {DesignKind::fpps, DesignKind::cbv,
                                      DesignKind::lp,   DesignKind::lcbv,
                                      DesignKind::lcbg, DesignKind::lcbvg};

const FrameSnapshot& frame_for(const std::vector<RhoFrames>& snapshots,
                               double rho, int day) {
  for (const RhoFrames& rf : snapshots) {
    if (rf.rho != rho) continue;
    for (const FrameSnapshot& f : rf.frames)
      if (f.day == day) return f;
    throw std::runtime_error("run_experiment: no frame for day " +
                             std::to_string(day) + " at rho " + format_double(rho));
  }
  throw std::runtime_error("run_experiment: no frames for rho " + format_double(rho));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replicates < 2)
    throw std::invalid_argument(
        "experiment: replicates must be at least 2 (rel_SE is undefined otherwise)");
  if (rho_levels.empty() || survey_days.empty() || designs.empty() ||
      m_levels.empty() || n_bar_levels.empty())
    throw std::invalid_argument("experiment: empty level list");
  for (double r : rho_levels)
    if (!(r >= 0.0 && r < 1.0))
      throw std::invalid_argument("experiment: rho levels must lie in [0, 1)");
  for (int m : m_levels)
    if (m < 1) throw std::invalid_argument("experiment: m must be at least 1");
  for (int n : n_bar_levels)
    if (n < 1) throw std::invalid_argument("experiment: n_bar must be at least 1");
  if (threads < 1) throw std::invalid_argument("experiment: threads must be at least 1");
}

MCCell run_cell(const FrameSnapshot& frame, const CellRequest& req) {
  if (req.replicates < 2)
    throw std::invalid_argument(
        "run_cell: replicates must be at least 2 (rel_SE is undefined otherwise)");
  const double truth = static_cast<double>(frame.total_y);
  if (truth <= 0.0)
    throw std::invalid_argument("run_cell: frame has no infected persons, "
                                "relative errors are undefined");

  const InclusionPlan plan = make_design(req.design, frame, req.m, req.n_bar, req.options);
  const int R = req.replicates;
  std::vector<double> estimates(R);
  std::vector<std::vector<int>> sets(R);

  auto worker = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      Rng rng(derive_seed(req.master_seed, req.stage,
                          static_cast<std::uint64_t>(req.design),
                          static_cast<std::uint64_t>(frame.day), rho_bits(req.rho),
                          static_cast<std::uint64_t>(req.m),
                          static_cast<std::uint64_t>(req.n_bar),
                          static_cast<std::uint64_t>(r)));
      SampleDraw draw = draw_two_stage(plan, req.design, frame, req.n_bar, rng,
                                       req.options);
      estimates[r] = ht_estimate(draw, frame);
      sets[r] = std::move(draw.clusters);
    }
  };

  const int threads = std::min(std::max(req.threads, 1), R);
  if (threads == 1) {
    worker(0, R);
  } else {
    // Fixed contiguous blocks into preallocated slots: the aggregation below
    // runs in replicate order, so results do not depend on the thread count.
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (R + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(R, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (std::thread& th : pool) th.join();
  }

  MCCell cell;
  cell.design = req.design;
  cell.day = frame.day;
  cell.rho = req.rho;
  cell.m = req.m;
  cell.n_bar = req.n_bar;
  cell.replicates = R;
  cell.true_value = truth;

  double sum = 0.0;
  for (double e : estimates) sum += e;
  cell.mean_estimate = sum / R;
  cell.rab = std::abs(cell.mean_estimate - truth) / truth;
  double sq = 0.0;
  for (double e : estimates) sq += (e - truth) * (e - truth);
  cell.rel_se = std::sqrt(sq / R) / truth;

  cell.entropy = empirical_entropy(sets);
  {
    std::map<std::vector<int>, int> freq;
    for (const auto& s : sets) ++freq[s];
    cell.distinct_sets = static_cast<int>(freq.size());
  }

  const int M = plan.clusters();
  cell.incl_first.assign(M, 0.0);
  if (req.want_joint) cell.incl_joint.assign(static_cast<std::size_t>(M) * M, 0.0);
  for (const auto& s : sets) {
    for (std::size_t a = 0; a < s.size(); ++a) {
      cell.incl_first[s[a]] += 1.0;
      if (req.want_joint) {
        for (std::size_t b = a + 1; b < s.size(); ++b) {
          cell.incl_joint[static_cast<std::size_t>(s[a]) * M + s[b]] += 1.0;
          cell.incl_joint[static_cast<std::size_t>(s[b]) * M + s[a]] += 1.0;
        }
      }
    }
  }
  for (double& f : cell.incl_first) f /= R;
  if (req.want_joint) {
    for (double& f : cell.incl_joint) f /= R;
    for (int i = 0; i < M; ++i)
      cell.incl_joint[static_cast<std::size_t>(i) * M + i] = cell.incl_first[i];
  }
  return cell;
}

MCReport run_experiment(const ExperimentConfig& config,
                        const std::vector<RhoFrames>& snapshots) {
  config.validate();
  MCReport report;
  for (double rho : config.rho_levels) {
    for (int day : config.survey_days) {
      const FrameSnapshot& frame = frame_for(snapshots, rho, day);
      for (DesignKind design : config.designs) {
        for (int m : config.m_levels) {
          for (int n_bar : config.n_bar_levels) {
            CellRequest req;
            req.design = design;
            req.rho = rho;
            req.m = m;
            req.n_bar = n_bar;
            req.replicates = config.replicates;
            req.master_seed = config.master_seed;
            req.threads = config.threads;
            req.want_joint = config.want_joint;
            report.cells.push_back(run_cell(frame, req));
          }
        }
      }
    }
  }
  return report;
}

double empirical_entropy(const std::vector<std::vector<int>>& draws) {
  if (draws.empty()) throw std::invalid_argument("empirical_entropy: no draws");
  std::map<std::vector<int>, int> freq;
  for (std::vector<int> s : draws) {
    std::sort(s.begin(), s.end());
    ++freq[s];
  }
  const double n = static_cast<double>(draws.size());
  double h = 0.0;
  for (const auto& [set, count] : freq) {
    const double p = count / n;
    h -= p * std::log(p);  // counts are >= 1, so 0 log 0 never arises
  }
  return std::max(h, 0.0);  // clamp the -0.0 of a degenerate distribution
}

std::vector<EntropyRatioRow> relative_entropy_table(const MCReport& report) {
  // Group cells by (day, rho, m, n_bar); entropy only depends on the first
  // stage, but the grouping keeps draw counts comparable within a row.
  std::map<std::tuple<int, double, int, int>, std::map<DesignKind, double>> groups;
  for (const MCCell& cell : report.cells)
    groups[{cell.day, cell.rho, cell.m, cell.n_bar}][cell.design] = cell.entropy;

  std::vector<EntropyRatioRow> rows;
  for (const auto& [key, by_design] : groups) {
    const auto fpps = by_design.find(DesignKind::fpps);
    if (fpps == by_design.end())
      throw std::runtime_error(
          "relative_entropy_table: FPPS entropy missing for a cell group");
    EntropyRatioRow row;
    std::tie(row.day, row.rho, row.m, row.n_bar) = key;
    for (DesignKind d : kAllDesigns) {
      if (d == DesignKind::fpps) continue;
      const auto it = by_design.find(d);
      if (it == by_design.end()) continue;
      row.methods.push_back(d);
      row.ratios.push_back(it->second > 0.0
                               ? fpps->second / it->second
                               : std::numeric_limits<double>::infinity());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ScreeningScenario default_screening() {
  ScreeningScenario sc;
  sc.top_right.hide_verified = 0.8;
  sc.bottom_left.hide_verified = 0.8;
  sc.top_left.reveal_unverified = 0.8;
  sc.bottom_right.reveal_unverified = 0.5;
  return sc;
}

namespace {

void check_rule(const QuadrantRule& rule) {
  if (!(rule.hide_verified >= 0.0 && rule.hide_verified <= 1.0) ||
      !(rule.reveal_unverified >= 0.0 && rule.reveal_unverified <= 1.0))
    throw std::invalid_argument("apply_screening: multiplier outside [0, 1]");
}

void screen_quadrant(FrameSnapshot& frame, const QuadrantRule& rule, int row_lo,
                     int row_hi, int col_lo, int col_hi, Rng& rng) {
  // (cell, person) references gathered before any flips in this quadrant.
  std::vector<std::pair<int, int>> verified, hidden_infected;
  for (int r = row_lo; r < row_hi; ++r) {
    for (int c = col_lo; c < col_hi; ++c) {
      const int cell = frame.grid.index_of(r, c);
      const CellFrame& cf = frame.cells[cell];
      for (std::size_t p = 0; p < cf.person.size(); ++p) {
        if (cf.v[p]) verified.emplace_back(cell, static_cast<int>(p));
        else if (cf.y[p]) hidden_infected.emplace_back(cell, static_cast<int>(p));
      }
    }
  }
  const int hide = static_cast<int>(
      std::llround(rule.hide_verified * static_cast<double>(verified.size())));
  for (int idx : sample_without_replacement(static_cast<int>(verified.size()), hide, rng)) {
    const auto [cell, p] = verified[idx];
    frame.cells[cell].v[p] = 0;
  }
  const int reveal = static_cast<int>(std::llround(
      rule.reveal_unverified * static_cast<double>(hidden_infected.size())));
  for (int idx : sample_without_replacement(static_cast<int>(hidden_infected.size()),
                                            reveal, rng)) {
    const auto [cell, p] = hidden_infected[idx];
    frame.cells[cell].v[p] = 1;
  }
}

}  // namespace

FrameSnapshot apply_screening(const FrameSnapshot& frame,
                              const ScreeningScenario& scenario, Rng& rng) {
  check_rule(scenario.top_left);
  check_rule(scenario.top_right);
  check_rule(scenario.bottom_left);
  check_rule(scenario.bottom_right);
  if (frame.grid.rows % 2 != 0 || frame.grid.cols % 2 != 0)
    throw std::invalid_argument(
        "apply_screening: grid does not divide evenly into four quadrants");

  FrameSnapshot out = frame;
  const int rh = frame.grid.rows / 2;
  const int ch = frame.grid.cols / 2;
  screen_quadrant(out, scenario.top_left, 0, rh, 0, ch, rng);
  screen_quadrant(out, scenario.top_right, 0, rh, ch, frame.grid.cols, rng);
  screen_quadrant(out, scenario.bottom_left, rh, frame.grid.rows, 0, ch, rng);
  screen_quadrant(out, scenario.bottom_right, rh, frame.grid.rows, ch,
                  frame.grid.cols, rng);
  out.recount();
  return out;
}

ScreeningStudy run_screening_study(const FrameSnapshot& frame, double rho,
                                   const ScreeningScenario& scenario,
                                   const std::vector<DesignKind>& designs,
                                   int m, int n_bar, int replicates,
                                   std::uint64_t master_seed, int threads) {
  Rng screen_rng(derive_seed(master_seed, "screening"));
  const FrameSnapshot screened = apply_screening(frame, scenario, screen_rng);

  ScreeningStudy study;
  for (DesignKind design : designs) {
    CellRequest req;
    req.design = design;
    req.rho = rho;
    req.m = m;
    req.n_bar = n_bar;
    req.replicates = replicates;
    req.master_seed = master_seed;
    req.threads = threads;
    study.homogeneous.push_back(run_cell(frame, req));
    req.stage = "mc-screened";
    study.heterogeneous.push_back(run_cell(screened, req));
  }
  return study;
}

std::vector<std::string> summarize_tables(const MCReport& report) {
  std::vector<const MCCell*> order;
  order.reserve(report.cells.size());
  for (const MCCell& c : report.cells) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const MCCell* a, const MCCell* b) {
    return std::tuple(a->day, a->rho, static_cast<int>(a->design), a->m, a->n_bar) <
           std::tuple(b->day, b->rho, static_cast<int>(b->design), b->m, b->n_bar);
  });

  std::vector<std::string> rows;
  rows.reserve(order.size() + 1);
  rows.push_back("day,rho,design,m,n_bar,true,estimate,rab,se");
  for (const MCCell* c : order) {
    rows.push_back(std::to_string(c->day) + "," + format_double(c->rho) + "," +
                   design_name(c->design) + "," + std::to_string(c->m) + "," +
                   std::to_string(c->n_bar) + "," + format_double(c->true_value) +
                   "," + format_double(c->mean_estimate) + "," +
                   format_double(c->rab) + "," + format_double(c->rel_se));
  }
  return rows;
}

std::pair<int, int> headline_pair(const ExperimentConfig& config) {
  const bool has_m = std::find(config.m_levels.begin(), config.m_levels.end(), 80) !=
                     config.m_levels.end();
  const bool has_n = std::find(config.n_bar_levels.begin(), config.n_bar_levels.end(),
                               3) != config.n_bar_levels.end();
  if (has_m && has_n) return {80, 3};
  return {config.m_levels.front(), config.n_bar_levels.front()};
}

namespace {

std::ofstream open_table(const std::filesystem::path& dir, const char* name) {
  std::ofstream out(dir / name, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw std::runtime_error(std::string("cannot write ") + name);
  return out;
}

void write_screening_rows(std::ofstream& out, const char* label,
                          const std::vector<MCCell>& cells) {
  std::vector<const MCCell*> order;
  for (const MCCell& c : cells) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const MCCell* a, const MCCell* b) {
    return static_cast<int>(a->design) < static_cast<int>(b->design);
  });
  for (const MCCell* c : order) {
    out << label << ',' << design_name(c->design) << ','
        << format_double(c->true_value) << ',' << format_double(c->mean_estimate)
        << ',' << format_double(c->rab) << ',' << format_double(c->rel_se) << '\n';
  }
}

}  // namespace

void write_tables(const MCReport& report, const ScreeningStudy* screening,
                  const ExperimentConfig& config, const std::string& dir) {
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  const auto [hm, hn] = headline_pair(config);

  {  // Table 3: relative entropy, wide by method.
    auto out = open_table(base, "table3.csv");
    std::vector<EntropyRatioRow> rows = relative_entropy_table(report);
    std::erase_if(rows, [&](const EntropyRatioRow& r) {
      return r.m != hm || r.n_bar != hn;
    });
    out << "day,rho";
    if (!rows.empty())
      for (DesignKind d : rows.front().methods) out << ",fpps_over_" << design_name(d);
    out << '\n';
    for (const EntropyRatioRow& r : rows) {
      out << r.day << ',' << format_double(r.rho);
      for (double v : r.ratios) out << ',' << format_double(v);
      out << '\n';
    }
  }

  {  // Table 4: estimates at the first survey day.
    auto out = open_table(base, "table4.csv");
    const int day = config.survey_days.front();
    out << "rho,design,m,n_bar,true_value,estimate,rab,se\n";
    std::vector<std::string> rows = summarize_tables(report);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const std::string& row = rows[i];
      const std::string prefix = std::to_string(day) + ",";
      if (row.compare(0, prefix.size(), prefix) == 0)
        out << row.substr(prefix.size()) << '\n';
    }
  }

  {  // Table 5: rel_SE matrix, designs x (rho outer, day inner).
    auto out = open_table(base, "table5.csv");
    out << "design";
    for (double rho : config.rho_levels)
      for (int day : config.survey_days)
        out << ",se_day" << day << "_rho" << format_double(rho);
    out << '\n';
    for (DesignKind d : kAllDesigns) {
      if (std::find(config.designs.begin(), config.designs.end(), d) ==
          config.designs.end())
        continue;
      out << design_name(d);
      for (double rho : config.rho_levels) {
        for (int day : config.survey_days) {
          const MCCell* found = nullptr;
          for (const MCCell& c : report.cells) {
            if (c.design == d && c.day == day && c.rho == rho && c.m == hm &&
                c.n_bar == hn) {
              found = &c;
              break;
            }
          }
          out << ',' << (found ? format_double(found->rel_se) : "nan");
        }
      }
      out << '\n';
    }
  }

  if (screening) {  // Table 6: homogeneous vs heterogeneous screening.
    auto out = open_table(base, "table6.csv");
    out << "screening,design,true_value,estimate,rab,se\n";
    write_screening_rows(out, "homogeneous", screening->homogeneous);
    write_screening_rows(out, "heterogeneous", screening->heterogeneous);
  }
}

}  // namespace spatsurv
