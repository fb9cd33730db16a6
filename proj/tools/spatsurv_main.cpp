// spatsurv: synthesize spatially correlated populations, run the lattice
// epidemic, and evaluate two-stage sampling designs on the frozen frames.
//
//   spatsurv synth    --config cfg.json [--out DIR] [--seed S]
//   spatsurv simulate --config cfg.json [--out DIR] [--seed S]
//   spatsurv evaluate --config cfg.json [--out DIR] [--seed S]
//                     [--replicates R] [--threads T]
//   spatsurv variance --config cfg.json [--out DIR] [--seed S]
//
// Everything an invocation produces is a pure function of the config file
// and the master seed; `evaluate` consumes the frame files that `simulate`
// wrote under the same --out directory.

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "spatsurv/config.hpp"
#include "spatsurv/csv.hpp"

namespace fs = std::filesystem;
using namespace spatsurv;

namespace {

std::uint64_t rho_bits(double rho) { return std::bit_cast<std::uint64_t>(rho); }

struct Common {
  std::string config_path;
  std::string out = "out";
  std::uint64_t seed = 0;
  int replicates = 0;
  int threads = 0;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_replicates = nullptr;
  CLI::Option* o_threads = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", out, "output directory (default: out)");
    o_seed = cmd->add_option("--seed", seed, "master seed override");
    o_replicates =
        cmd->add_option("--replicates", replicates, "Monte Carlo replicate override");
    o_threads = cmd->add_option("--threads", threads, "worker thread override");
  }

  AppConfig load() const {
    AppConfig cfg = load_config(config_path);
    if (o_seed->count() > 0) cfg.master_seed = seed;
    if (o_replicates->count() > 0) cfg.replicates = replicates;
    if (o_threads->count() > 0) cfg.threads = threads;
    cfg.validate();
    return cfg;
  }
};

std::string rho_tag(double rho) { return format_double(rho); }

fs::path grid_path(const fs::path& out, double rho) {
  return out / "grids" / ("grid_rho" + rho_tag(rho) + ".csv");
}
fs::path daily_path(const fs::path& out, double rho) {
  return out / "epidemic" / ("daily_rho" + rho_tag(rho) + ".csv");
}
fs::path frame_path(const fs::path& out, double rho, int day) {
  return out / "frames" /
         ("frame_rho" + rho_tag(rho) + "_day" + std::to_string(day) + ".csv");
}

PopulationGrid synth_one(const AppConfig& cfg, double rho) {
  return generate_population(cfg.grid, rho, cfg.population_total,
                             derive_seed(cfg.master_seed, "synth", rho_bits(rho)));
}

void cmd_synth(const AppConfig& cfg, const fs::path& out) {
  fs::create_directories(out / "grids");
  for (double rho : cfg.rho_levels) {
    const PopulationGrid grid = synth_one(cfg, rho);
    const fs::path path = grid_path(out, rho);
    write_grid_csv(grid, path.string());
    std::cout << "wrote " << path.string() << "\n";
  }
  write_manifest(cfg, (out / "manifest.json").string());
}

void cmd_simulate(const AppConfig& cfg, const fs::path& out) {
  fs::create_directories(out / "epidemic");
  fs::create_directories(out / "frames");
  for (double rho : cfg.rho_levels) {
    const PopulationGrid grid = synth_one(cfg, rho);
    const EpidemicRun run =
        run_epidemic(grid, cfg.phases, cfg.disease, cfg.seed_cases,
                     derive_seed(cfg.master_seed, "epidemic", rho_bits(rho)),
                     cfg.run_options);
    const fs::path daily = daily_path(out, rho);
    write_daily_csv(run, daily.string());
    std::cout << "wrote " << daily.string() << "\n";
    for (int day : cfg.survey_days) {
      const FrameSnapshot& frame = run.frames.at(day - 1);
      const fs::path path = frame_path(out, rho, day);
      write_frame_csv(frame, path.string());
      std::cout << "wrote " << path.string() << " (Y=" << frame.total_y
                << ", V=" << frame.total_v << ")\n";
    }
  }
  write_manifest(cfg, (out / "manifest.json").string());
}

void cmd_evaluate(const AppConfig& cfg, const fs::path& out) {
  std::vector<RhoFrames> snapshots;
  for (double rho : cfg.rho_levels) {
    RhoFrames rf;
    rf.rho = rho;
    for (int day : cfg.survey_days) {
      const fs::path path = frame_path(out, rho, day);
      if (!fs::exists(path))
        throw std::runtime_error("evaluate: missing frame file '" + path.string() +
                                 "' (run `spatsurv simulate` first)");
      rf.frames.push_back(read_frame_csv(path.string(), cfg.grid));
    }
    snapshots.push_back(std::move(rf));
  }

  const ExperimentConfig exp = cfg.experiment();
  const MCReport report = run_experiment(exp, snapshots);

  ScreeningStudy study;
  bool have_study = false;
  if (cfg.screening.enabled) {
    const FrameSnapshot* frame = nullptr;
    for (const RhoFrames& rf : snapshots) {
      if (rf.rho != cfg.screening.rho) continue;
      for (const FrameSnapshot& f : rf.frames)
        if (f.day == cfg.screening.day) frame = &f;
    }
    if (!frame)
      throw std::runtime_error("evaluate: screening frame not available");
    const auto [m, n_bar] = headline_pair(exp);
    study = run_screening_study(*frame, cfg.screening.rho, default_screening(),
                                cfg.screening.designs, m, n_bar, cfg.replicates,
                                cfg.master_seed, cfg.threads);
    have_study = true;
  }

  const fs::path tables = out / "tables";
  write_tables(report, have_study ? &study : nullptr, exp, tables.string());
  for (const char* name : {"table3.csv", "table4.csv", "table5.csv"})
    std::cout << "wrote " << (tables / name).string() << "\n";
  if (have_study) std::cout << "wrote " << (tables / "table6.csv").string() << "\n";
  write_manifest(cfg, (out / "manifest.json").string());
  std::cout << "wrote " << (out / "manifest.json").string() << "\n";
}

// Synthetic instance for the variance calculator: one cluster per grid cell,
// `cluster_size` persons on a regular sublattice inside the cell, constant
// working-model mean.
StudyPopulation variance_population(const VarianceConfig& vc) {
  StudyPopulation pop;
  pop.x_dim = 1;
  const int sub = static_cast<int>(std::ceil(std::sqrt(double(vc.cluster_size))));
  for (int cell = 0; cell < vc.grid.cell_count(); ++cell) {
    StudyCluster c;
    c.cx = vc.grid.centroid_x(cell);
    c.cy = vc.grid.centroid_y(cell);
    for (int j = 0; j < vc.cluster_size; ++j) {
      c.px.push_back(c.cx + vc.grid.cell_side * ((j % sub + 0.5) / sub - 0.5));
      c.py.push_back(c.cy + vc.grid.cell_side * ((j / sub + 0.5) / sub - 0.5));
      c.x.push_back(1.0);
    }
    pop.clusters.push_back(std::move(c));
  }
  return pop;
}

void cmd_variance(const AppConfig& cfg, const fs::path& out) {
  const VarianceConfig& vc = cfg.variance;

  FrameSnapshot toy;
  toy.grid = vc.grid;
  toy.day = 0;
  toy.cells.resize(vc.grid.cell_count());
  for (CellFrame& cf : toy.cells) {
    cf.person.resize(vc.cluster_size);
    cf.y.assign(vc.cluster_size, 0);
    cf.v.assign(vc.cluster_size, 0);
  }
  toy.recount();

  const InclusionPlan plan = make_design(vc.design, toy, vc.m, vc.n_bar);
  InclusionEstimate inc =
      estimate_inclusion(plan, vc.design, vc.joint_draws,
                         derive_seed(cfg.master_seed, "joint"), /*want_joint=*/true);
  // The diagonal of a joint-inclusion matrix is the first-order probability
  // by definition; pin it to the plan rather than its Monte Carlo estimate.
  const int m_clusters = plan.clusters();
  for (int i = 0; i < m_clusters; ++i)
    inc.joint[static_cast<std::size_t>(i) * m_clusters + i] = plan.pi[i];

  const StudyPopulation pop = variance_population(vc);
  WorkingModel model;
  model.beta = {vc.beta0};
  model.cov = vc.covariance;

  AVOptions options;
  options.exact_small_factors = vc.exact_small_factors;
  const AVReport rep =
      anticipated_variance(pop, plan, inc.joint, model, vc.n_bar, options);

  std::vector<std::int64_t> counts(toy.n_i.begin(), toy.n_i.end());
  const double efficient =
      efficient_av(counts, vc.covariance.sigma_u2, vc.m, vc.n_bar);

  fs::create_directories(out / "variance");
  const fs::path path = out / "variance" / "av_report.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "quantity,index,value\n";
  os << "av_total,," << format_double(rep.av_total) << "\n";
  os << "f_total,," << format_double(rep.f_total) << "\n";
  os << "eta2,," << format_double(rep.components.eta2) << "\n";
  os << "srswor,," << format_double(rep.components.srswor) << "\n";
  os << "unit_var,," << format_double(rep.components.unit_var) << "\n";
  os << "within_corr,," << format_double(rep.components.within_corr) << "\n";
  os << "between_corr,," << format_double(rep.components.between_corr) << "\n";
  os << "efficient_av,," << format_double(efficient) << "\n";
  for (int i = 0; i < m_clusters; ++i)
    os << "pi," << i << ',' << format_double(plan.pi[i]) << "\n";
  for (int i = 0; i < m_clusters; ++i)
    os << "eta," << i << ',' << format_double(rep.eta[i]) << "\n";
  for (int i = 0; i < m_clusters; ++i)
    os << "sigma2," << i << ',' << format_double(rep.sigma_i2[i]) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path.string());
  std::cout << "wrote " << path.string() << "\n";
  write_manifest(cfg, (out / "manifest.json").string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatially balanced two-stage survey simulation"};
  app.require_subcommand(1);

  Common c_synth, c_simulate, c_evaluate, c_variance;
  CLI::App* synth = app.add_subcommand("synth", "generate population grids");
  CLI::App* simulate =
      app.add_subcommand("simulate", "run the epidemic and freeze survey frames");
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Monte Carlo design comparison tables");
  CLI::App* variance =
      app.add_subcommand("variance", "anticipated-variance calculator");
  c_synth.attach(synth);
  c_simulate.attach(simulate);
  c_evaluate.attach(evaluate);
  c_variance.attach(variance);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      cmd_synth(c_synth.load(), c_synth.out);
    } else if (simulate->parsed()) {
      cmd_simulate(c_simulate.load(), c_simulate.out);
    } else if (evaluate->parsed()) {
      cmd_evaluate(c_evaluate.load(), c_evaluate.out);
    } else if (variance->parsed()) {
      cmd_variance(c_variance.load(), c_variance.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
