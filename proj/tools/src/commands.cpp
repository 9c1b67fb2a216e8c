#include "commands.hpp"

#include "config.hpp"
#include "verify.hpp"

#include "oslsim/path_stats.hpp"
#include "oslsim/simulator.hpp"
#include "oslsim/symbol.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace osl::cli {
namespace {

namespace fs = std::filesystem;

// 17 significant digits: every double round-trips.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json rows_json(const std::vector<double>& flat, int dim) {
  Json a = Json::array();
  for (std::size_t k = 0; k + static_cast<std::size_t>(dim) <= flat.size(); k += dim) {
    a.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(k),
                                    flat.begin() + static_cast<std::ptrdiff_t>(k + dim)));
  }
  return a;
}

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory " + dir);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path(name) + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path(name));
  }

  void write_json(const std::string& name, const Json& j) const { write(name, j.dump(2) + "\n"); }

 private:
  fs::path dir_;
};

Json report(const std::string& statistic, Json params, double estimate, Interval ci,
            const std::string& reference_shape, const std::string& verdict) {
  return {{"statistic", statistic},
          {"params", std::move(params)},
          {"estimate", estimate},
          {"ci", {ci.lo, ci.hi}},
          {"reference_shape", reference_shape},
          {"verdict", verdict}};
}

void emit_warnings(const RunConfig& cfg, std::ostream& log) {
  for (const auto& w : cfg.warnings) log << "warning: " << w << "\n";
}

// ----- validate -----

int cmd_validate(const RunConfig& cfg, const Options& opt, std::ostream& log) {
  const int dim = model_dim(cfg);
  const auto section = cfg.root().find("validate");
  const Box box = build_box(section ? section->find("box") : std::nullopt, dim);
  const int grid = static_cast<int>(section ? section->integer("grid_n", 20) : 20);
  const int pairs = static_cast<int>(section ? section->integer("pairs", 1000) : 1000);
  const auto seed = static_cast<std::uint64_t>(section ? section->integer("seed", 1) : 1);
  if (grid < 2) section->fail_key("grid_n", "grid_n must be >= 2");
  if (pairs < 0) section->fail_key("pairs", "pairs must be >= 0");

  Json out = {{"model_hash", cfg.model_hash()}};
  std::vector<std::string> violations;
  try {
    const OslModel model = build_model(cfg);
    emit_warnings(cfg, log);
    const auto rep = validate_admissible(model.field(), box, grid, pairs, seed);
    out["min_lambda"] = rep.min_lambda;
    out["max_Lambda"] = rep.max_Lambda;
    out["max_symmetry_defect"] = rep.max_symmetry_defect;
    out["max_lipschitz_ratio"] = rep.max_lipschitz_ratio;
    out["grid_points"] = rep.grid_points;
    out["pairs"] = rep.pairs;
    out["declared"] = {{"a", model.field().a()}, {"lip", model.field().lip()}};
    if (model.field().b()) out["declared"]["b"] = *model.field().b();
    violations = rep.violations;
  } catch (const AdmissibilityError& e) {
    violations.push_back(e.what());
  }
  out["violations"] = violations;
  out["ok"] = violations.empty();
  Output(opt.out_dir).write_json("validate.json", out);
  for (const auto& v : violations) log << "violation: " << v << "\n";
  log << (violations.empty() ? "admissible\n" : "not admissible\n");
  return violations.empty() ? kOk : kFailure;
}

// ----- symbol-eval -----

std::vector<Vector> xi_points(const Node& s, int dim) {
  std::vector<Vector> xi;
  if (s.has("xi")) xi = s.vectors("xi", dim);
  if (const auto g = s.find("xi_grid")) {
    const auto dirs = g->vectors("directions", dim);
    const double lo = g->number("lo");
    const double hi = g->number("hi");
    const auto n = g->integer("n");
    if (!(lo > 0.0 && hi >= lo)) g->fail_key("hi", "need 0 < lo <= hi");
    if (n < 1) g->fail_key("n", "n must be >= 1");
    for (const auto& d : dirs) {
      if (!(d.norm() > 0.0)) g->fail_key("directions", "zero direction");
      for (std::int64_t k = 0; k < n; ++k) {
        const double f = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
        xi.push_back(d / d.norm() * lo * std::pow(hi / lo, f));
      }
    }
  }
  if (xi.empty()) s.fail("need \"xi\" or \"xi_grid\"");
  return xi;
}

int cmd_symbol_eval(const RunConfig& cfg, const Options& opt, std::ostream& log) {
  const int dim = model_dim(cfg);
  const Node s = cfg.root().at("symbol_eval");
  const std::vector<Vector> xs = s.has("x") ? s.vectors("x", dim)
                                            : std::vector<Vector>{Vector::Zero(dim)};
  const std::vector<Vector> xis = xi_points(s, dim);
  const QuadSpec quad = build_quad(cfg);
  const OslModel model = build_model(cfg);
  emit_warnings(cfg, log);
  const bool complex = !model.symmetric();
  if (complex && !opt.complex) {
    throw ContractError("symbol-eval: the spectral measure is not symmetric, so the symbol is "
                        "complex; rerun with --complex");
  }
  const Output out(opt.out_dir);

  struct Row {
    double re = 0.0, im = 0.0, err = 0.0;
  };
  const std::size_t n = xs.size() * xis.size();
  std::vector<Row> rows(n);
  parallel_for(n, resolve_threads(opt.threads), [&](std::size_t k) {
    const Vector& x = xs[k / xis.size()];
    const Vector& xi = xis[k % xis.size()];
    if (complex) {
      const auto e = symbol_general(model, x, xi, quad);
      rows[k] = {e.value.real(), e.value.imag(), e.error};
    } else {
      const auto e = symbol_symmetric(model, x, xi, quad);
      rows[k] = {e.value, 0.0, e.error};
    }
  });

  std::ostringstream csv;
  for (int i = 0; i < dim; ++i) csv << "x" << i + 1 << ",";
  for (int i = 0; i < dim; ++i) csv << "xi" << i + 1 << ",";
  csv << (complex ? "q_re,q_im,err_est\n" : "q,err_est\n");
  for (std::size_t k = 0; k < n; ++k) {
    const Vector& x = xs[k / xis.size()];
    const Vector& xi = xis[k % xis.size()];
    for (int i = 0; i < dim; ++i) csv << num(x(i)) << ",";
    for (int i = 0; i < dim; ++i) csv << num(xi(i)) << ",";
    csv << num(rows[k].re) << ",";
    if (complex) csv << num(rows[k].im) << ",";
    csv << num(rows[k].err) << "\n";
  }
  out.write("symbol.csv", csv.str());
  log << "wrote " << n << " rows to " << out.path("symbol.csv") << "\n";
  return kOk;
}

// ----- simulate -----

Json header_json(const RunConfig& cfg, const SimSpec& sim, const OslModel& model) {
  return {{"type", "header"},
          {"seed", sim.config.seed},
          {"eps", sim.config.eps},
          {"horizon", sim.config.horizon},
          {"n_paths", sim.n_paths},
          {"dim", model.dim()},
          {"x0", vec_json(sim.x0)},
          {"model_hash", cfg.model_hash()}};
}

Json path_json(const PathSample& p, std::size_t index) {
  Json j = {{"index", index},       {"seed", p.seed_used},        {"stopped", p.stopped},
            {"times", p.times},     {"states", rows_json(p.states, p.dim)},
            {"radii", p.radii},     {"thetas", rows_json(p.thetas, p.dim)}};
  if (p.has_drift()) j["drifts"] = rows_json(p.drifts, p.dim);
  if (!p.grid_times.empty()) {
    j["grid_times"] = p.grid_times;
    j["grid_states"] = rows_json(p.grid_states, p.dim);
  }
  return j;
}

int cmd_simulate(const RunConfig& cfg, const Options& opt, std::ostream& log) {
  const OslModel model = build_model(cfg);
  emit_warnings(cfg, log);
  const SimSpec sim = build_sim(cfg, model.dim(), opt.seed);
  const Output out(opt.out_dir);
  const int threads = resolve_threads(opt.threads);

  std::string warning;
  resolve_drift_mode(model, sim.config.drift_mode, &warning);
  if (!warning.empty()) log << "warning: " << warning << "\n";

  std::ofstream file(out.path("ensemble.jsonl"), std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + out.path("ensemble.jsonl") + " for writing");
  file << header_json(cfg, sim, model).dump() << "\n";
  // Paths are generated in blocks and written in index order.
  const std::size_t block = 1024;
  std::size_t events = 0;
  for (std::size_t start = 0; start < sim.n_paths; start += block) {
    const std::size_t count = std::min(block, sim.n_paths - start);
    std::vector<std::string> lines(count);
    parallel_for(count, threads, [&](std::size_t i) {
      const PathSample p = simulate_indexed_path(model, sim.x0, sim.config, start + i);
      lines[i] = path_json(p, start + i).dump();
    });
    for (const auto& l : lines) file << l << "\n";
    events += count;
  }
  file.flush();
  if (!file) throw IoError("write failed for " + out.path("ensemble.jsonl"));

  Json manifest = header_json(cfg, sim, model);
  manifest.erase("type");
  manifest["truncation_error_bound"] = truncation_error_bound(model, sim.config.eps);
  manifest["files"] = {"ensemble.jsonl"};
  manifest["warnings"] = warning.empty() ? Json::array() : Json::array({warning});
  out.write_json("manifest.json", manifest);
  log << "wrote " << events << " paths to " << out.path("ensemble.jsonl") << "\n";
  return kOk;
}

// ----- stats -----

struct StatItem {
  Node node;
  std::string kind;
};

int cmd_stats(const RunConfig& cfg, const Options& opt, std::ostream& log) {
  const Node list = cfg.root().at("stats");
  if (!list.json().is_array() || list.json().empty()) {
    list.fail("\"stats\" must be a non-empty array of statistic objects");
  }
  const OslModel model = build_model(cfg);
  emit_warnings(cfg, log);
  const SimSpec sim = build_sim(cfg, model.dim(), opt.seed);
  const int dim = model.dim();

  // Parse every item before any simulation starts.
  struct Parsed {
    std::string kind;
    Json params;
    double t = 0.0;
    std::vector<double> R_grid, t_grid;
    double p = 0.0, R = 0.0, gamma = 0.0, reference = 0.0;
    Vector xi;
    int bootstrap = 200, max_level = 0;
    bool short_time = true, dyadic = false;
  };
  std::vector<Parsed> items;
  for (std::size_t i = 0; i < list.json().size(); ++i) {
    const Node n(list.json()[i], {"stats", std::to_string(i)}, *cfg.locator);
    Parsed it;
    it.kind = n.string("statistic");
    const double T = sim.config.horizon;
    auto time = [&](const char* key) {
      const double t = n.number(key, T);
      if (!(t >= 0.0 && t <= T)) n.fail_key(key, "must lie in [0, horizon]");
      return t;
    };
    if (it.kind == "tail") {
      it.t = time("t");
      it.R_grid = n.numbers("R_grid");
      it.reference = n.number("reference_slope", -1.0 / model.field().a());
      it.params = {{"t", it.t}, {"R_grid", it.R_grid}};
    } else if (it.kind == "moment") {
      it.t = time("t");
      it.p = n.number("p");
      if (!(it.p > 0.0)) n.fail_key("p", "p must be positive");
      it.bootstrap = static_cast<int>(n.integer("bootstrap", 200));
      it.params = {{"t", it.t}, {"p", it.p}, {"bootstrap", it.bootstrap}};
    } else if (it.kind == "exit_time") {
      it.R = n.number("R");
      if (!(it.R > 0.0)) n.fail_key("R", "R must be positive");
      it.params = {{"R", it.R}};
    } else if (it.kind == "cf") {
      it.t = time("t");
      it.xi = n.vector("xi", dim);
      it.params = {{"t", it.t}, {"xi", vec_json(it.xi)}};
    } else if (it.kind == "p_variation") {
      it.p = n.number("p");
      if (!(it.p > 0.0)) n.fail_key("p", "p must be positive");
      const std::string mode = n.string("mode", "jump_sum");
      if (mode != "jump_sum" && mode != "dyadic") n.fail_key("mode", "expected jump_sum or dyadic");
      it.dyadic = mode == "dyadic";
      it.max_level = static_cast<int>(n.integer("max_level", 12));
      if (it.dyadic && (it.max_level < 0 || it.max_level > 30)) {
        n.fail_key("max_level", "max_level must lie in [0, 30]");
      }
      it.params = {{"p", it.p}, {"mode", mode}};
      if (it.dyadic) it.params["max_level"] = it.max_level;
    } else if (it.kind == "growth") {
      it.t_grid = n.numbers("t_grid");
      for (double t : it.t_grid) {
        if (!(t > 0.0 && t <= T)) n.fail_key("t_grid", "grid points must lie in (0, horizon]");
      }
      if (it.t_grid.size() < 2) n.fail_key("t_grid", "need at least two grid points");
      it.gamma = n.number("gamma");
      it.short_time = n.boolean("short_time", true);
      it.params = {{"t_grid", it.t_grid}, {"gamma", it.gamma}, {"short_time", it.short_time}};
    } else {
      n.fail_key("statistic", "unknown statistic \"" + it.kind +
                                  "\" (expected tail, moment, exit_time, cf, p_variation or growth)");
    }
    items.push_back(std::move(it));
  }
  if (!model.symmetric()) {
    throw ContractError("stats: path statistics are defined for symmetric spectral measures only");
  }
  const Output out(opt.out_dir);

  // One pass over the ensemble; each item extracts its per-path features.
  using Features = std::vector<std::vector<double>>;
  const auto features = map_paths(
      model, sim.x0, sim.config, sim.n_paths,
      [&](const PathSample& p) {
        Features f(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
          const Parsed& it = items[i];
          if (it.kind == "tail" || it.kind == "moment") {
            f[i] = {max_process(p, it.t)};
          } else if (it.kind == "exit_time") {
            const ExitTime e = first_exit_time(p, it.R);
            f[i] = {e.time, e.censored ? 1.0 : 0.0};
          } else if (it.kind == "cf") {
            const Vector d = p.state_at(it.t) - p.x0;
            f[i].assign(d.data(), d.data() + d.size());
          } else if (it.kind == "p_variation") {
            f[i] = {it.dyadic ? p_variation_dyadic(p, it.p, it.max_level).running_max.back()
                              : p_variation_jump_sum(p, it.p)};
          } else {
            for (double t : it.t_grid) f[i].push_back(max_process(p, t));
          }
        }
        return f;
      },
      resolve_threads(opt.threads));

  auto column = [&](std::size_t i, std::size_t k) {
    std::vector<double> v(features.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = features[j][i][k];
    return v;
  };
  auto mean_ci = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = pairwise_sum(v) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double half = v.size() > 1 ? 1.96 * std::sqrt(ss / (n - 1) / n) : 0.0;
    return std::pair{m, Interval{m - half, m + half}};
  };

  const double a = model.field().a();
  const auto b = model.field().b();
  Json reports = Json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Parsed& it = items[i];
    Json params = it.params;
    params["n_paths"] = sim.n_paths;
    if (it.kind == "tail") {
      const auto rep = tail_report(column(i, 0), it.t, it.R_grid, it.reference);
      const bool ok = std::abs(rep.fitted_slope - rep.reference_slope) <= 0.2;
      Json r = report("tail_exceedance_slope", params, rep.fitted_slope,
                      {rep.fitted_slope - 1.96 * rep.slope_stderr,
                       rep.fitted_slope + 1.96 * rep.slope_stderr},
                      "C t R^(-1/a)", ok ? "consistent" : "inconsistent");
      r["warnings"] = rep.warnings;
      reports.push_back(r);
      std::ostringstream csv;
      csv << "R,exceedances,prob,ci_lo,ci_hi\n";
      for (std::size_t k = 0; k < rep.R_grid.size(); ++k) {
        csv << num(rep.R_grid[k]) << "," << rep.exceedances[k] << "," << num(rep.probs[k]) << ","
            << num(rep.ci[k].lo) << "," << num(rep.ci[k].hi) << "\n";
      }
      out.write("tail_" + std::to_string(i) + ".csv", csv.str());
    } else if (it.kind == "moment") {
      const auto rep = empirical_moment(column(i, 0), it.p, it.bootstrap, sim.config.seed);
      Json r = report("max_process_moment", params, rep.estimate,
                      {rep.estimate - rep.ci_half_width, rep.estimate + rep.ci_half_width},
                      b ? "finite for p < 1/b" : "finite for p below the index",
                      rep.stable ? "stable" : "unstable");
      r["top_share"] = rep.top_share;
      reports.push_back(r);
    } else if (it.kind == "exit_time") {
      std::vector<ExitTime> exits(features.size());
      for (std::size_t j = 0; j < exits.size(); ++j) {
        exits[j] = {features[j][i][0], features[j][i][1] != 0.0};
      }
      const auto rep = exit_time_moment_check(exits, it.R, a, b.value_or(a));
      Json r = report("mean_exit_time", params, rep.mean,
                      {rep.mean - rep.ci_half_width, rep.mean + rep.ci_half_width},
                      "between R^(1/a) and R^(1/b)",
                      rep.heavy_censoring ? "censored_lower_bound" : "reported");
      r["censored_fraction"] = rep.censored_fraction;
      r["lower_shape"] = rep.lower_shape;
      r["upper_shape"] = rep.upper_shape;
      reports.push_back(r);
    } else if (it.kind == "cf") {
      std::vector<Vector> disp(features.size());
      for (std::size_t j = 0; j < disp.size(); ++j) {
        disp[j] = Eigen::Map<const Vector>(features[j][i].data(), dim);
      }
      const CfEstimate cf = empirical_cf(disp, it.xi);
      std::string verdict = "reported";
      std::string shape = "exp(-t q(x0, xi)) for constant exponents";
      if (model.field().is_constant()) {
        const double q = symbol_symmetric(model, sim.x0, it.xi, build_quad(cfg)).value;
        const double budget =
            0.5 * it.xi.squaredNorm() * it.t * truncation_error_bound(model, sim.config.eps);
        const double ref = std::exp(-it.t * q);
        verdict = std::abs(cf.re - ref) <= 4 * cf.stderr_re + budget ? "consistent" : "inconsistent";
        params["reference"] = ref;
        params["truncation_budget"] = budget;
      }
      Json r = report("empirical_cf_re", params, cf.re,
                      {cf.re - 1.96 * cf.stderr_re, cf.re + 1.96 * cf.stderr_re}, shape, verdict);
      r["im"] = cf.im;
      r["stderr_im"] = cf.stderr_im;
      reports.push_back(r);
    } else if (it.kind == "p_variation") {
      const auto [m, ci] = mean_ci(column(i, 0));
      const double index = 1.0 / a;
      reports.push_back(report("p_variation_mean", params, m, ci,
                               "finite for p > 1/lambda", it.p > index ? "above_index" : "below_index"));
    } else {
      std::vector<std::vector<double>> maxima(it.t_grid.size());
      for (std::size_t k = 0; k < it.t_grid.size(); ++k) maxima[k] = column(i, k);
      const auto rep = growth_exponent_check(it.t_grid, maxima, it.gamma, it.short_time);
      const double ratio = rep.median_ratio.back() / rep.median_ratio.front();
      Json r = report("growth_ratio", params, ratio, {ratio, ratio},
                      "max_process(t) / t^(1/gamma)", to_string(rep.verdict));
      r["median_ratio"] = rep.median_ratio;
      r["upper_ratio"] = rep.upper_ratio;
      reports.push_back(r);
    }
  }
  out.write_json("stats.json", reports);
  log << "wrote " << reports.size() << " reports to " << out.path("stats.json") << "\n";
  return kOk;
}

// ----- indices -----

int cmd_indices(const RunConfig& cfg, const Options& opt, std::ostream& log) {
  const int dim = model_dim(cfg);
  const auto section = cfg.root().find("indices");
  const std::vector<Vector> xs = section && section->has("x")
                                     ? section->vectors("x", dim)
                                     : std::vector<Vector>{Vector::Zero(dim)};
  const Box box = build_box(section ? section->find("box") : std::nullopt, dim);
  const int grid = static_cast<int>(section ? section->integer("grid_n", 41) : 41);
  if (grid < 2) section->fail_key("grid_n", "grid_n must be >= 2");
  const OslModel model = build_model(cfg);
  emit_warnings(cfg, log);
  const Output out(opt.out_dir);

  Json j = {{"model_hash", cfg.model_hash()}, {"infinity", Json::array()}};
  for (const auto& x : xs) {
    const auto idx = bg_indices_infinity(model, x);
    j["infinity"].push_back({{"x", vec_json(x)}, {"beta", idx.beta}, {"delta", idx.delta}});
  }
  if (model.field().b()) {
    const auto z = bg_indices_zero(model, box, grid);
    j["zero"] = {{"value", z.value}, {"argmin", vec_json(z.argmin)},
                 {"boundary_warning", z.boundary_warning}};
    if (z.boundary_warning) log << "warning: " << z.warning << "\n";
  } else {
    j["zero"] = nullptr;
    log << "note: no upper bound b declared; the index at zero is not defined\n";
  }
  j["long_time_exponent"] = 1.0 / model.field().a();
  out.write_json("indices.json", j);
  log << "wrote " << out.path("indices.json") << "\n";
  return kOk;
}

// ----- verify -----

int cmd_verify(const RunConfig* cfg, const Options& opt, std::ostream& log) {
  VerifyContext ctx;
  ctx.threads = resolve_threads(opt.threads);
  ctx.log = &log;
  std::vector<std::string> suites = verify_suites();
  if (cfg) {
    if (const auto v = cfg->root().find("verify")) {
      if (v->has("suites")) {
        const Node s = v->at("suites");
        if (!s.json().is_array()) v->fail_key("suites", "expected an array of suite names");
        if (s.json().empty()) v->fail_key("suites", "empty suite selection");
        suites.clear();
        for (const auto& name : s.json()) {
          if (!name.is_string()) v->fail_key("suites", "suite names must be strings");
          const auto& all = verify_suites();
          if (std::find(all.begin(), all.end(), name.get<std::string>()) == all.end()) {
            v->fail_key("suites", "unknown suite \"" + name.get<std::string>() + "\"");
          }
          suites.push_back(name.get<std::string>());
        }
      }
      const std::string scale = v->string("scale", "desk");
      if (scale != "quick" && scale != "desk") v->fail_key("scale", "expected quick or desk");
      ctx.scale = scale == "quick" ? Scale::quick : Scale::desk;
      ctx.seed = static_cast<std::uint64_t>(v->integer("seed", 1));
      if (const auto b = v->find("box")) ctx.box = build_box(b, model_dim(*cfg));
    }
    if (cfg->has("model")) {
      ctx.model = build_model(*cfg);
      emit_warnings(*cfg, log);
    }
  }
  if (opt.seed) ctx.seed = *opt.seed;
  const Output out(opt.out_dir);
  const auto start = std::chrono::steady_clock::now();
  const auto items = run_verify(suites, ctx);
  Json j = {{"scale", ctx.scale == Scale::quick ? "quick" : "desk"},
            {"seed", ctx.seed},
            {"items", Json::array()}};
  std::size_t failed = 0;
  for (const auto& it : items) {
    j["items"].push_back(to_json(it));
    failed += !it.passed && !it.skipped;
  }
  j["passed"] = failed == 0;
  j["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.write_json("verify.json", j);
  log << items.size() - failed << "/" << items.size() << " items passed\n";
  return failed == 0 ? kOk : kFailure;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"validate", "symbol-eval", "simulate",
                                                 "stats",    "verify",      "indices"};
  return names;
}

int run(const Options& opt, std::ostream& log) {
  try {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), opt.command) == names.end()) {
      log << "error: unknown command \"" << opt.command << "\"\n";
      return kConfigError;
    }
    if (opt.threads && *opt.threads < 1) throw ConfigError("--threads must be >= 1", 0);
    if (opt.command == "verify" && opt.config_path.empty()) return cmd_verify(nullptr, opt, log);
    if (opt.config_path.empty()) {
      log << "error: " << opt.command << " needs --config\n";
      return kConfigError;
    }
    const RunConfig cfg = load_config(opt.config_path);
    if (opt.command == "validate") return cmd_validate(cfg, opt, log);
    if (opt.command == "symbol-eval") return cmd_symbol_eval(cfg, opt, log);
    if (opt.command == "simulate") return cmd_simulate(cfg, opt, log);
    if (opt.command == "stats") return cmd_stats(cfg, opt, log);
    if (opt.command == "indices") return cmd_indices(cfg, opt, log);
    return cmd_verify(&cfg, opt, log);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    log << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"oslsim: operator-stable-like jump processes"};
  app.require_subcommand(1);
  Options opt;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "JSON run configuration");
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "overrides the configured seed");
    sub->add_option("--threads", threads, "worker threads (default: OSLSIM_THREADS or 1)");
    sub->add_flag("--complex", opt.complex, "allow complex symbols for non-symmetric models");
    sub->callback([&opt, name] { opt.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  opt.seed = seed;
  opt.threads = threads;
  return run(opt, std::cerr);
}

}  // namespace osl::cli
