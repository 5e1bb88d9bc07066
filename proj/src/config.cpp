#include "fibered/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "fibered/functionals.hpp"
#include "fibered/io.hpp"

namespace fibered {

namespace {

class Reader {
 public:
  Reader(const toml::table& root, std::string section) : root_(root), section_(std::move(section)) {
    if (section_.empty()) {
      table_ = &root_;
    } else if (const auto* node = root_.get(section_)) {
      table_ = node->as_table();
      if (!table_) throw ConfigError(section_ + ": expected a table");
    }
  }

  std::string path(const std::string& key) const { return section_.empty() ? key : section_ + "." + key; }

  const toml::node* find(const std::string& key) {
    seen_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }

  void number(const std::string& key, double& out) {
    if (const auto* n = find(key)) {
      auto v = n->value<double>();
      if (!v || !std::isfinite(*v)) throw ConfigError(path(key) + ": expected a finite number");
      out = *v;
    }
  }

  void integer(const std::string& key, int& out) {
    if (const auto* n = find(key)) {
      auto v = n->value_exact<std::int64_t>();
      if (!v) throw ConfigError(path(key) + ": expected an integer");
      out = static_cast<int>(*v);
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const auto* n = find(key)) {
      auto v = n->value_exact<bool>();
      if (!v) throw ConfigError(path(key) + ": expected true or false");
      out = *v;
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const auto* n = find(key)) {
      auto v = n->value_exact<std::string>();
      if (!v) throw ConfigError(path(key) + ": expected a string");
      out = *v;
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const auto* n = find(key)) {
      const auto* arr = n->as_array();
      if (!arr) throw ConfigError(path(key) + ": expected an array of numbers");
      out.clear();
      for (std::size_t k = 0; k < arr->size(); ++k) {
        auto v = (*arr)[k].value<double>();
        if (!v || !std::isfinite(*v)) throw ConfigError(path(key) + "[" + std::to_string(k) + "]: expected a finite number");
        out.push_back(*v);
      }
    }
  }

  void integers(const std::string& key, std::vector<std::int64_t>& out) {
    if (const auto* n = find(key)) {
      const auto* arr = n->as_array();
      if (!arr) throw ConfigError(path(key) + ": expected an array of integers");
      out.clear();
      for (std::size_t k = 0; k < arr->size(); ++k) {
        auto v = (*arr)[k].value_exact<std::int64_t>();
        if (!v) throw ConfigError(path(key) + "[" + std::to_string(k) + "]: expected an integer");
        out.push_back(*v);
      }
    }
  }

  // Rejects keys the reader never asked for.
  void finish(const std::set<std::string>& sections = {}) const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      const std::string key(k.str());
      if (seen_.count(key) || sections.count(key)) continue;
      throw ConfigError(path(key) + ": unknown key");
    }
  }

 private:
  const toml::table& root_;
  std::string section_;
  const toml::table* table_ = nullptr;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << origin << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ConfigError(os.str());
  }
  RunConfig cfg;
  cfg.source = text;

  Reader top(root, "");
  top.string("experiment", cfg.experiment);
  top.boolean("write_states", cfg.write_states);
  top.finish({"model", "grid", "initial", "pde", "jko", "particles", "ladder", "checks"});
  static const std::set<std::string> experiments{"pde", "jko", "particles", "dissipation", "rate",
                                                 "hydro-ladder", "check", "counterexample"};
  require(experiments.count(cfg.experiment) == 1, "experiment: unknown experiment '" + cfg.experiment + "'");

  Reader model(root, "model");
  model.numbers("psi", cfg.model.psi);
  model.string("kernel", cfg.model.kernel);
  model.number("kernel_amplitude", cfg.model.kernel_amplitude);
  model.numbers("kernel_samples", cfg.model.kernel_samples);
  model.number("c_psi", cfg.model.growth.c_psi);
  model.number("c1_psi", cfg.model.growth.c1_psi);
  model.number("c2_psi", cfg.model.growth.c2_psi);
  model.integer("ell", cfg.model.growth.ell);
  model.finish();

  Reader grid(root, "grid");
  grid.integer("n_x", cfg.grid.n_x);
  grid.integer("n_theta", cfg.grid.n_theta);
  grid.number("theta_min", cfg.grid.theta_min);
  grid.number("theta_max", cfg.grid.theta_max);
  grid.finish();
  require(cfg.grid.n_x >= 1, "grid.n_x: must be >= 1");
  require(cfg.grid.n_theta >= 3, "grid.n_theta: must be >= 3");
  require(cfg.experiment != "counterexample" || cfg.grid.n_x % 2 == 0, "grid.n_x: the counterexample needs an even n_x");
  require(cfg.grid.theta_min < cfg.grid.theta_max, "grid.theta_min: must be below grid.theta_max");

  Reader init(root, "initial");
  init.string("kind", cfg.initial.kind);
  init.number("mean", cfg.initial.mean);
  init.number("mean_amplitude", cfg.initial.mean_amplitude);
  init.number("variance", cfg.initial.variance);
  init.finish();
  require(cfg.initial.kind == "gaussian" || cfg.initial.kind == "gibbs",
          "initial.kind: expected \"gaussian\" or \"gibbs\"");
  require(cfg.initial.variance > 0.0, "initial.variance: must be positive");

  Reader pde(root, "pde");
  std::string scheme = to_string(cfg.pde.scheme);
  pde.number("dt", cfg.pde.dt);
  pde.number("horizon", cfg.pde.horizon);
  pde.number("output_interval", cfg.pde.output_interval);
  pde.string("scheme", scheme);
  pde.integer("max_halvings", cfg.pde.max_halvings);
  pde.finish();
  try {
    cfg.pde.scheme = parse_flux_scheme(scheme);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("pde.scheme: ") + e.what());
  }
  require(cfg.pde.dt >= 0.0, "pde.dt: must be >= 0 (0 selects the default step)");
  require(cfg.pde.horizon > 0.0, "pde.horizon: must be positive");
  require(cfg.pde.output_interval > 0.0, "pde.output_interval: must be positive");
  {
    const double r = cfg.pde.horizon / cfg.pde.output_interval;
    require(std::abs(r - std::round(r)) <= 1e-9 * r, "pde.horizon: must be a multiple of pde.output_interval");
  }

  Reader jko(root, "jko");
  jko.number("tau", cfg.jko.tau);
  jko.number("horizon", cfg.jko_horizon);
  jko.integer("max_sweeps", cfg.jko.max_sweeps);
  jko.integer("max_newton", cfg.jko.max_newton);
  jko.number("tolerance", cfg.jko.tolerance);
  jko.number("shrink", cfg.jko.shrink);
  jko.finish();
  require(cfg.jko_horizon > 0.0, "jko.horizon: must be positive");

  Reader part(root, "particles");
  std::vector<std::int64_t> seeds;
  part.integer("n", cfg.particles.n);
  part.number("dt", cfg.particles.dt);
  part.number("horizon", cfg.particles.horizon);
  part.integers("seeds", seeds);
  part.integer("record_every", cfg.particles.record_every);
  part.finish();
  if (!seeds.empty()) cfg.particles.seeds.assign(seeds.begin(), seeds.end());
  require(cfg.particles.n >= 1, "particles.n: must be >= 1");
  require(cfg.particles.dt > 0.0, "particles.dt: must be positive");
  require(cfg.particles.horizon > 0.0, "particles.horizon: must be positive");
  require(cfg.particles.record_every >= 1, "particles.record_every: must be >= 1");

  Reader lad(root, "ladder");
  std::vector<std::int64_t> ns, lseeds;
  lad.integers("n", ns);
  lad.integer("n_x", cfg.ladder_n_x);
  lad.integers("seeds", lseeds);
  lad.integer("seed_count", cfg.ladder_seed_count);
  lad.number("dt", cfg.ladder.dt);
  lad.numbers("times", cfg.ladder.times);
  lad.integer("blocks", cfg.ladder.blocks);
  lad.finish();
  if (!ns.empty()) cfg.ladder.n_ladder.assign(ns.begin(), ns.end());
  if (!lseeds.empty()) {
    cfg.ladder.seeds.assign(lseeds.begin(), lseeds.end());
  } else {
    require(cfg.ladder_seed_count >= 1, "ladder.seed_count: must be >= 1");
    for (int k = 0; k < cfg.ladder_seed_count; ++k) cfg.ladder.seeds.push_back(static_cast<std::uint64_t>(k + 1));
  }
  for (int n : cfg.ladder.n_ladder) {
    require(n >= 1 && cfg.ladder_n_x % n == 0,
            "ladder.n: every N must divide ladder.n_x = " + std::to_string(cfg.ladder_n_x) + " (got " + std::to_string(n) + ")");
    require(n % cfg.ladder.blocks == 0,
            "ladder.blocks: must divide every N (got N = " + std::to_string(n) + ")");
  }
  require(cfg.ladder.blocks >= 1 && cfg.ladder_n_x % cfg.ladder.blocks == 0, "ladder.blocks: must divide ladder.n_x");
  require(cfg.ladder.dt > 0.0, "ladder.dt: must be positive");
  for (double t : cfg.experiment == "hydro-ladder" ? cfg.ladder.times : std::vector<double>{}) {
    const double r = t / cfg.pde.output_interval;
    require(t > 0.0 && std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r),
            "ladder.times: every time must be a positive multiple of pde.output_interval");
  }

  Reader chk(root, "checks");
  double slope = -1.0;
  chk.number("final_slope_below", slope);
  chk.number("energy_slack", cfg.checks.energy_slack);
  chk.number("dissipation_relative", cfg.checks.dissipation_relative);
  chk.boolean("quick", cfg.checks.quick);
  chk.finish();
  if (slope >= 0.0) cfg.checks.final_slope_below = slope;

  // Cross-field checks that need the model.
  const auto p = make_model(cfg);
  const auto report = check_assumptions(p);
  if (!report.ok()) throw ConfigError(report.problems.front());
  try {
    validate(cfg.jko, p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

ModelParams make_model(const RunConfig& cfg) {
  Kernel j = Kernel::constant(0.0);
  if (cfg.model.kernel == "constant") {
    j = Kernel::constant(cfg.model.kernel_amplitude);
  } else if (cfg.model.kernel == "cosine") {
    j = Kernel::cosine(cfg.model.kernel_amplitude);
  } else if (cfg.model.kernel == "tabulated") {
    if (cfg.model.kernel_samples.empty()) throw ConfigError("model.kernel_samples: required for a tabulated kernel");
    j = Kernel::tabulated(cfg.model.kernel_samples);
  } else {
    throw ConfigError("model.kernel: expected \"constant\", \"cosine\" or \"tabulated\"");
  }
  if (cfg.model.psi.size() < 3) throw ConfigError("model.psi: need at least the coefficients up to theta^2");
  try {
    return ModelParams(Polynomial(cfg.model.psi), std::move(j), cfg.model.growth, cfg.grid.theta_min, cfg.grid.theta_max);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

Grid make_grid(const GridSpec& g) { return Grid{TorusGrid(g.n_x), ThetaGrid(g.theta_min, g.theta_max, g.n_theta)}; }

GridMeasure make_initial(const Grid& grid, const InitialSpec& init, const ModelParams& p) {
  if (init.kind == "gibbs") return gibbs_measure(grid, p);
  std::vector<double> raw;
  raw.reserve(grid.size());
  for (int i = 0; i < grid.n_x(); ++i) {
    const double a = init.mean + init.mean_amplitude * std::cos(2.0 * std::numbers::pi * grid.torus.site(i));
    for (int j = 0; j < grid.n_theta(); ++j) {
      const double t = grid.theta.center(j) - a;
      raw.push_back(std::exp(-t * t / (2.0 * init.variance)));
    }
  }
  return normalize_fibers(grid, std::move(raw));
}

}  // namespace fibered
