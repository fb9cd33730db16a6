#include "spatsurv/config.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "spatsurv/csv.hpp"

namespace spatsurv {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("config: " + msg);
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// One JSON object: typed getters with defaults, error messages carrying the
// full key path, and unknown-key rejection via finish().
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("section '" + path_ + "' must be an object");
  }

  bool has(const std::string& key) {
    known_.push_back(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) const { return j_.at(key); }
  std::string path_of(const std::string& key) const { return join_path(path_, key); }

  Section section(const std::string& key) {
    known_.push_back(key);
    return Section(j_.at(key), path_of(key));
  }

  long long integer(const std::string& key, long long def, long long lo,
                    long long hi) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer())
      fail("key '" + path_of(key) + "' must be an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi)
      fail("key '" + path_of(key) + "' out of range [" + std::to_string(lo) +
           ", " + std::to_string(hi) + "]");
    return x;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      const long long x = v.get<long long>();
      if (x < 0) fail("key '" + path_of(key) + "' must be non-negative");
      return static_cast<std::uint64_t>(x);
    }
    fail("key '" + path_of(key) + "' must be an integer");
  }

  double real(const std::string& key, double def, double lo, double hi) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) fail("key '" + path_of(key) + "' must be a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi))
      fail("key '" + path_of(key) + "' out of range [" + format_double(lo) +
           ", " + format_double(hi) + "]");
    return x;
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail("key '" + path_of(key) + "' must be a boolean");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) fail("key '" + path_of(key) + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> real_array(const std::string& key, std::vector<double> def,
                                 double lo, double hi) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty())
      fail("key '" + path_of(key) + "' must be a non-empty array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number())
        fail("key '" + path_of(key) + "' must contain numbers only");
      const double x = e.get<double>();
      if (!(x >= lo && x <= hi))
        fail("key '" + path_of(key) + "' has an element out of range [" +
             format_double(lo) + ", " + format_double(hi) + "]");
      out.push_back(x);
    }
    return out;
  }

  std::vector<int> int_array(const std::string& key, std::vector<int> def,
                             int lo, int hi) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty())
      fail("key '" + path_of(key) + "' must be a non-empty array of integers");
    std::vector<int> out;
    for (const json& e : v) {
      if (!e.is_number_integer())
        fail("key '" + path_of(key) + "' must contain integers only");
      const long long x = e.get<long long>();
      if (x < lo || x > hi)
        fail("key '" + path_of(key) + "' has an element out of range [" +
             std::to_string(lo) + ", " + std::to_string(hi) + "]");
      out.push_back(static_cast<int>(x));
    }
    return out;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (std::find(known_.begin(), known_.end(), item.key()) == known_.end())
        fail("unknown key '" + join_path(path_, item.key()) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> known_;
};

DesignKind parse_design_name(const std::string& name, const std::string& path) {
  try {
    return design_from_name(name);
  } catch (const std::exception&) {
    fail("key '" + path + "' has unknown design name '" + name +
         "' (expected fpps, cbv, lp, lcbv, lcbg or lcbvg)");
  }
}

std::vector<DesignKind> design_list(Section& sec, const std::string& key,
                                    std::vector<DesignKind> def) {
  if (!sec.has(key)) return def;
  const json& v = sec.raw(key);
  if (!v.is_array() || v.empty())
    fail("key '" + sec.path_of(key) + "' must be a non-empty array of design names");
  std::vector<DesignKind> out;
  for (const json& e : v) {
    if (!e.is_string())
      fail("key '" + sec.path_of(key) + "' must contain strings only");
    out.push_back(parse_design_name(e.get<std::string>(), sec.path_of(key)));
  }
  return out;
}

GridSpec parse_grid(Section sec, const GridSpec& def) {
  GridSpec g = def;
  g.rows = static_cast<int>(sec.integer("rows", g.rows, 1, 10000));
  g.cols = static_cast<int>(sec.integer("cols", g.cols, 1, 10000));
  g.cell_side = sec.real("cell_side", g.cell_side, 1e-9, 1e9);
  sec.finish();
  return g;
}

CovarianceModel parse_covariance(Section sec, const CovarianceModel& def) {
  CovarianceModel m = def;
  if (sec.has("kind")) {
    const std::string k = sec.text("kind", "");
    if (k == "power") m.kind = CovarianceKind::power;
    else if (k == "gaussian") m.kind = CovarianceKind::gaussian;
    else fail("key '" + sec.path_of("kind") + "' must be 'power' or 'gaussian'");
  }
  m.sigma_u2 = sec.real("sigma_u2", m.sigma_u2, 0.0, 1e12);
  m.rho_base = sec.real("rho_base", m.rho_base, 0.0, 1.0);
  m.alpha = sec.real("alpha", m.alpha, 1e-12, 1e12);
  m.tau2 = sec.real("tau2", m.tau2, 0.0, 1e12);
  sec.finish();
  m.validate();
  return m;
}

std::uint64_t rho_bits(double rho) { return std::bit_cast<std::uint64_t>(rho); }

json designs_json(const std::vector<DesignKind>& designs) {
  json a = json::array();
  for (DesignKind d : designs) a.push_back(design_name(d));
  return a;
}

json grid_json(const GridSpec& g) {
  return {{"rows", g.rows}, {"cols", g.cols}, {"cell_side", g.cell_side}};
}

}  // namespace

ExperimentConfig AppConfig::experiment() const {
  ExperimentConfig e;
  e.rho_levels = rho_levels;
  e.survey_days = survey_days;
  e.designs = designs;
  e.m_levels = m_levels;
  e.n_bar_levels = n_bar_levels;
  e.replicates = replicates;
  e.master_seed = master_seed;
  e.threads = threads;
  e.want_joint = want_joint;
  return e;
}

void AppConfig::validate() const {
  grid.validate();
  if (population_total < 1)
    throw std::runtime_error("config: key 'population.total' must be positive");
  if (seed_cases < 1 || seed_cases > population_total)
    throw std::runtime_error(
        "config: key 'epidemic.seed_cases' must lie in [1, population total]");
  disease.validate();
  if (phases.empty())
    throw std::runtime_error("config: key 'epidemic.phases' must not be empty");
  int horizon = 0;
  for (const PhaseParams& p : phases) {
    p.validate();
    horizon += p.duration_days;
  }
  for (int day : survey_days)
    if (day < 1 || day > horizon)
      throw std::runtime_error("config: survey day " + std::to_string(day) +
                               " is beyond the simulated horizon of " +
                               std::to_string(horizon) + " days");
  experiment().validate();
  if (screening.enabled) {
    if (std::find(survey_days.begin(), survey_days.end(), screening.day) ==
        survey_days.end())
      throw std::runtime_error(
          "config: key 'screening.day' must be one of the survey days");
    if (std::find(rho_levels.begin(), rho_levels.end(), screening.rho) ==
        rho_levels.end())
      throw std::runtime_error(
          "config: key 'screening.rho' must be one of the rho levels");
    if (screening.designs.empty())
      throw std::runtime_error("config: key 'screening.designs' must not be empty");
  }
}

AppConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin + ": " + e.what());
  }
  // A manifest embeds the config it was produced from; accept it directly.
  if (j.is_object() && j.contains("manifest_version") && j.contains("config"))
    j = j.at("config");

  AppConfig cfg;
  Section root(j, "");

  if (root.has("grid")) cfg.grid = parse_grid(root.section("grid"), cfg.grid);

  if (root.has("population")) {
    Section p = root.section("population");
    cfg.population_total =
        p.integer("total", cfg.population_total, 1, 1000000000LL);
    cfg.rho_levels = p.real_array("rho_levels", cfg.rho_levels, 0.0, 1.0);
    p.finish();
  }

  if (root.has("epidemic")) {
    Section e = root.section("epidemic");
    cfg.seed_cases = static_cast<int>(
        e.integer("seed_cases", cfg.seed_cases, 1, 1000000000LL));
    cfg.run_options.include_exposed_in_y =
        e.boolean("include_exposed_in_y", cfg.run_options.include_exposed_in_y);
    if (e.has("disease")) {
      Section d = e.section("disease");
      DiseaseParams& dp = cfg.disease;
      dp.exposed_duration =
          static_cast<int>(d.integer("exposed_duration", dp.exposed_duration, 1, 365));
      dp.infectious_duration = static_cast<int>(
          d.integer("infectious_duration", dp.infectious_duration, 1, 365));
      dp.p_exposed_to_infected =
          d.real("p_exposed_to_infected", dp.p_exposed_to_infected, 0.0, 1.0);
      dp.p_exposed_to_asymptomatic =
          d.real("p_exposed_to_asymptomatic", dp.p_exposed_to_asymptomatic, 0.0, 1.0);
      dp.p_infected_to_recovered =
          d.real("p_infected_to_recovered", dp.p_infected_to_recovered, 0.0, 1.0);
      dp.p_infected_to_dead =
          d.real("p_infected_to_dead", dp.p_infected_to_dead, 0.0, 1.0);
      d.finish();
    }
    if (e.has("phases")) {
      const json& v = e.raw("phases");
      if (!v.is_array() || v.empty())
        fail("key 'epidemic.phases' must be a non-empty array");
      cfg.phases.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        Section ph(v[i], "epidemic.phases[" + std::to_string(i) + "]");
        PhaseParams p;
        p.duration_days = static_cast<int>(ph.integer("duration_days", 0, 1, 36500));
        p.center_frac = ph.real("center_frac", 0.0, 0.0, 1.0);
        p.neighbor_frac = ph.real("neighbor_frac", 0.0, 0.0, 1.0);
        p.mean_meetings = ph.real("mean_meetings", 0.0, 0.0, 1e6);
        p.mean_meeting_size = ph.real("mean_meeting_size", 0.0, 0.0, 1e6);
        p.infections_per_meeting =
            static_cast<int>(ph.integer("infections_per_meeting", 0, 0, 1000000));
        ph.finish();
        cfg.phases.push_back(p);
      }
    }
    e.finish();
  }

  if (root.has("experiment")) {
    Section x = root.section("experiment");
    cfg.survey_days = x.int_array("survey_days", cfg.survey_days, 1, 100000);
    cfg.designs = design_list(x, "designs", cfg.designs);
    cfg.m_levels = x.int_array("m_levels", cfg.m_levels, 1, 1000000);
    cfg.n_bar_levels = x.int_array("n_bar_levels", cfg.n_bar_levels, 1, 1000000);
    cfg.replicates =
        static_cast<int>(x.integer("replicates", cfg.replicates, 2, 100000000LL));
    cfg.want_joint = x.boolean("want_joint", cfg.want_joint);
    x.finish();
  }

  if (root.has("screening")) {
    Section s = root.section("screening");
    cfg.screening.enabled = s.boolean("enabled", cfg.screening.enabled);
    cfg.screening.day = static_cast<int>(s.integer("day", cfg.screening.day, 1, 100000));
    cfg.screening.rho = s.real("rho", cfg.screening.rho, 0.0, 1.0);
    cfg.screening.designs = design_list(s, "designs", cfg.screening.designs);
    s.finish();
  }

  if (root.has("variance")) {
    Section v = root.section("variance");
    VarianceConfig& vc = cfg.variance;
    if (v.has("grid")) vc.grid = parse_grid(v.section("grid"), vc.grid);
    vc.cluster_size =
        static_cast<int>(v.integer("cluster_size", vc.cluster_size, 1, 100000));
    vc.m = static_cast<int>(v.integer("m", vc.m, 1, 100000));
    vc.n_bar = static_cast<int>(v.integer("n_bar", vc.n_bar, 1, 100000));
    if (v.has("design"))
      vc.design = parse_design_name(v.text("design", ""), v.path_of("design"));
    vc.beta0 = v.real("beta0", vc.beta0, -1e12, 1e12);
    if (v.has("covariance"))
      vc.covariance = parse_covariance(v.section("covariance"), vc.covariance);
    vc.joint_draws =
        static_cast<int>(v.integer("joint_draws", vc.joint_draws, 100, 100000000LL));
    vc.exact_small_factors =
        v.boolean("exact_small_factors", vc.exact_small_factors);
    v.finish();
  }

  cfg.master_seed = root.u64("master_seed", cfg.master_seed);
  cfg.threads = static_cast<int>(root.integer("threads", cfg.threads, 1, 4096));
  root.finish();

  cfg.validate();
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string config_to_json(const AppConfig& c) {
  json j;
  j["grid"] = grid_json(c.grid);
  j["population"] = {{"total", c.population_total}, {"rho_levels", c.rho_levels}};

  json phases = json::array();
  for (const PhaseParams& p : c.phases) {
    phases.push_back({{"duration_days", p.duration_days},
                      {"center_frac", p.center_frac},
                      {"neighbor_frac", p.neighbor_frac},
                      {"mean_meetings", p.mean_meetings},
                      {"mean_meeting_size", p.mean_meeting_size},
                      {"infections_per_meeting", p.infections_per_meeting}});
  }
  j["epidemic"] = {
      {"seed_cases", c.seed_cases},
      {"include_exposed_in_y", c.run_options.include_exposed_in_y},
      {"disease",
       {{"exposed_duration", c.disease.exposed_duration},
        {"infectious_duration", c.disease.infectious_duration},
        {"p_exposed_to_infected", c.disease.p_exposed_to_infected},
        {"p_exposed_to_asymptomatic", c.disease.p_exposed_to_asymptomatic},
        {"p_infected_to_recovered", c.disease.p_infected_to_recovered},
        {"p_infected_to_dead", c.disease.p_infected_to_dead}}},
      {"phases", phases}};

  j["experiment"] = {{"survey_days", c.survey_days},
                     {"designs", designs_json(c.designs)},
                     {"m_levels", c.m_levels},
                     {"n_bar_levels", c.n_bar_levels},
                     {"replicates", c.replicates},
                     {"want_joint", c.want_joint}};

  j["screening"] = {{"enabled", c.screening.enabled},
                    {"day", c.screening.day},
                    {"rho", c.screening.rho},
                    {"designs", designs_json(c.screening.designs)}};

  j["variance"] = {{"grid", grid_json(c.variance.grid)},
                   {"cluster_size", c.variance.cluster_size},
                   {"m", c.variance.m},
                   {"n_bar", c.variance.n_bar},
                   {"design", design_name(c.variance.design)},
                   {"beta0", c.variance.beta0},
                   {"covariance",
                    {{"kind", c.variance.covariance.kind == CovarianceKind::power
                                  ? "power"
                                  : "gaussian"},
                     {"sigma_u2", c.variance.covariance.sigma_u2},
                     {"rho_base", c.variance.covariance.rho_base},
                     {"alpha", c.variance.covariance.alpha},
                     {"tau2", c.variance.covariance.tau2}}},
                   {"joint_draws", c.variance.joint_draws},
                   {"exact_small_factors", c.variance.exact_small_factors}};

  j["master_seed"] = c.master_seed;
  j["threads"] = c.threads;
  return j.dump();  // nlohmann objects are key-sorted, so this is canonical
}

std::string config_hash(const AppConfig& config) {
  const std::string s = config_to_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

void write_manifest(const AppConfig& config, const std::string& path) {
  json m;
  m["manifest_version"] = 1;
  m["tool"] = {{"name", "spatsurv"}, {"version", kVersion}};
  m["config_hash"] = config_hash(config);
  m["master_seed"] = config.master_seed;
  m["replicates"] = config.replicates;
  m["threads"] = config.threads;

  json seeds;
  for (double rho : config.rho_levels) {
    const std::string tag = "[rho=" + format_double(rho) + "]";
    seeds["synth" + tag] = derive_seed(config.master_seed, "synth", rho_bits(rho));
    seeds["epidemic" + tag] =
        derive_seed(config.master_seed, "epidemic", rho_bits(rho));
  }
  seeds["screening"] = derive_seed(config.master_seed, "screening");
  seeds["variance-joint"] = derive_seed(config.master_seed, "joint");
  seeds["mc"] = derive_seed(config.master_seed, "mc");
  m["stage_seeds"] = seeds;

  m["config"] = json::parse(config_to_json(config));

  // Informational only; everything reproducible flows from config + seed.
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  m["timestamps"] = {{"written", stamp}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << m.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace spatsurv
