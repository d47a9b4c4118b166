#include "threespheres/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "threespheres/random.hpp"
#include "threespheres/uniqueness.hpp"

namespace threespheres {

using nlohmann::json;

const std::vector<std::string>& sweep_check_names() {
  static const std::vector<std::string> names{
      "derivative_identity", "transfer_identity", "log_convexity", "three_spheres",
      "holomorphic_variant", "three_balls",       "embedded_bound", "delta_lower_bound",
  };
  return names;
}

namespace {

const std::vector<std::string> kDefaultChecks{
    "derivative_identity", "transfer_identity", "log_convexity", "three_spheres",
    "holomorphic_variant", "three_balls",       "embedded_bound",
};

[[noreturn]] void bad_field(const std::string& field, const std::string& msg) {
  fail(ErrorCode::InvalidInput, "config field '" + field + "': " + msg);
}

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) bad_field(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) bad_field(where.empty() ? key : where + "." + key, "unknown field");
  }
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    bad_field(path, e.what());
  }
}

}  // namespace

SweepConfig sweep_config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidInput, std::string("config JSON: ") + e.what());
  }
  SweepConfig c;
  check_keys(doc, "", {"dimensions", "corpus", "geometry", "checks", "beta", "quadrature",
                       "output"});

  c.dimensions = get_field(doc, "dimensions", "dimensions", c.dimensions);
  if (c.dimensions.empty()) bad_field("dimensions", "must list at least one dimension");
  for (std::size_t i = 0; i < c.dimensions.size(); ++i) {
    if (c.dimensions[i] < 2 || c.dimensions[i] > 8) {
      bad_field("dimensions[" + std::to_string(i) + "]", "must lie in [2, 8]");
    }
  }

  if (doc.contains("corpus")) {
    const json& j = doc["corpus"];
    check_keys(j, "corpus", {"count", "max_degree", "seed", "growth_radius"});
    c.corpus_count = get_field(j, "count", "corpus.count", c.corpus_count);
    c.max_degree = get_field(j, "max_degree", "corpus.max_degree", c.max_degree);
    c.corpus_seed = get_field(j, "seed", "corpus.seed", c.corpus_seed);
    c.growth_radius = get_field(j, "growth_radius", "corpus.growth_radius", c.growth_radius);
  }
  if (c.corpus_count <= 0) fail(ErrorCode::InvalidInput, "empty corpus (corpus.count <= 0)");
  if (c.max_degree < 0 || c.max_degree > 12) bad_field("corpus.max_degree", "must lie in [0, 12]");
  if (!(c.growth_radius > 0)) bad_field("corpus.growth_radius", "must be > 0");

  if (doc.contains("geometry")) {
    const json& j = doc["geometry"];
    check_keys(j, "geometry",
               {"configs", "seed", "x_range", "gap", "r_min", "t_values", "xbar_values",
                "lambdas"});
    c.configs = get_field(j, "configs", "geometry.configs", c.configs);
    c.geometry_seed = get_field(j, "seed", "geometry.seed", c.geometry_seed);
    if (j.contains("x_range")) {
      const auto range = get_field(j, "x_range", "geometry.x_range", std::vector<double>{});
      if (range.size() != 2) bad_field("geometry.x_range", "expected [lo, hi]");
      c.x_lo = range[0];
      c.x_hi = range[1];
    }
    c.gap = get_field(j, "gap", "geometry.gap", c.gap);
    c.r_min = get_field(j, "r_min", "geometry.r_min", c.r_min);
    c.t_values = get_field(j, "t_values", "geometry.t_values", c.t_values);
    c.xbar_values = get_field(j, "xbar_values", "geometry.xbar_values", c.xbar_values);
    c.lambdas = get_field(j, "lambdas", "geometry.lambdas", c.lambdas);
  }
  if (c.configs <= 0) bad_field("geometry.configs", "must be > 0");
  if (!(c.x_lo > 0 && c.x_lo <= c.x_hi)) bad_field("geometry.x_range", "need 0 < lo <= hi");
  if (!(c.gap > 0)) bad_field("geometry.gap", "must be > 0 (r = 1 - |x| is a touching ball)");
  if (!(c.r_min > 0)) bad_field("geometry.r_min", "must be > 0");
  if (!(c.x_hi + c.gap + c.r_min < 1.0)) {
    bad_field("geometry.x_range", "x_hi + gap + r_min must stay below 1");
  }
  if (c.t_values <= 0) bad_field("geometry.t_values", "must be > 0");
  if (c.xbar_values <= 0) bad_field("geometry.xbar_values", "must be > 0");
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    if (!(c.lambdas[i] > 0 && c.lambdas[i] < 1)) {
      bad_field("geometry.lambdas[" + std::to_string(i) + "]", "must lie in (0, 1)");
    }
  }

  c.checks = get_field(doc, "checks", "checks", kDefaultChecks);
  const auto& known = sweep_check_names();
  for (std::size_t i = 0; i < c.checks.size(); ++i) {
    if (std::find(known.begin(), known.end(), c.checks[i]) == known.end()) {
      bad_field("checks[" + std::to_string(i) + "]", "unknown check '" + c.checks[i] + "'");
    }
  }

  if (doc.contains("beta")) {
    const json& j = doc["beta"];
    check_keys(j, "beta", {"mode", "value", "unchecked"});
    const std::string mode = get_field<std::string>(j, "mode", "beta.mode", "omega");
    if (mode == "omega") {
      c.beta = BetaChoice::omega();
    } else if (mode == "alpha") {
      c.beta = BetaChoice::alpha();
    } else if (mode == "explicit") {
      if (!j.contains("value")) bad_field("beta.value", "required for explicit mode");
      const double v = get_field(j, "value", "beta.value", 0.0);
      if (!(v > 0)) bad_field("beta.value", "must be > 0");
      c.beta = BetaChoice::explicit_value(v, get_field(j, "unchecked", "beta.unchecked", false));
    } else {
      bad_field("beta.mode", "expected omega, alpha or explicit");
    }
  }

  if (doc.contains("quadrature")) {
    const json& j = doc["quadrature"];
    check_keys(j, "quadrature",
               {"mc_samples", "seed", "radial_points", "pole_tolerance", "max_rule_degree"});
    auto& q = c.quadrature;
    q.mc_samples = get_field(j, "mc_samples", "quadrature.mc_samples", q.mc_samples);
    q.seed = get_field(j, "seed", "quadrature.seed", q.seed);
    q.radial_points = get_field(j, "radial_points", "quadrature.radial_points", q.radial_points);
    q.pole_tolerance =
        get_field(j, "pole_tolerance", "quadrature.pole_tolerance", q.pole_tolerance);
    q.max_rule_degree =
        get_field(j, "max_rule_degree", "quadrature.max_rule_degree", q.max_rule_degree);
    if (q.mc_samples < 2) bad_field("quadrature.mc_samples", "must be >= 2");
    if (q.radial_points < 1) bad_field("quadrature.radial_points", "must be >= 1");
    if (!(q.pole_tolerance > 0 && q.pole_tolerance < 1)) {
      bad_field("quadrature.pole_tolerance", "must lie in (0, 1)");
    }
    if (q.max_rule_degree < 1) bad_field("quadrature.max_rule_degree", "must be >= 1");
  }

  if (doc.contains("output")) {
    const json& j = doc["output"];
    check_keys(j, "output", {"csv", "json"});
    if (j.contains("csv")) c.csv_path = get_field<std::string>(j, "csv", "output.csv", "");
    if (j.contains("json")) c.json_path = get_field<std::string>(j, "json", "output.json", "");
  }
  return c;
}

// ---------------------------------------------------------------------------

bool SweepResult::all_pass() const { return failures() == 0; }

int SweepResult::failures() const {
  return static_cast<int>(
      std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.report.pass; }));
}

int sweep_threads() {
  if (const char* env = std::getenv("THREESPHERES_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct TaskOutput {
  std::vector<SweepRow> rows;
  std::vector<SkippedCheck> skipped;
};

struct DimensionData {
  int n = 0;
  std::vector<HarmonicPolynomial> corpus;
  PolynomialBatch batch{2, 0};
  std::vector<GeometryConfig> configs;
};

bool wants(const SweepConfig& c, const std::string& name) {
  return std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end();
}

std::vector<double> fractions(int count, double top) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(k == count ? top : top * k / count);
  return out;
}

void add_rows(TaskOutput& out, const std::vector<InequalityReport>& reports, int n, int config,
              double x_norm, double r, double parameter) {
  for (std::size_t p = 0; p < reports.size(); ++p) {
    out.rows.push_back({reports[p], n, config, static_cast<int>(p), x_norm, r, parameter});
  }
}

void config_task(const SweepConfig& c, const DimensionData& d, int index, TaskOutput& out) {
  const GeometryConfig& g = d.configs[index];
  const int n = d.n;
  const Family fam(g.x, g.r);
  const double xn = fam.x_norm();
  const std::vector<double> ts = fractions(c.t_values, xn);
  const auto& q = c.quadrature;

  if (wants(c, "derivative_identity")) {
    const double t = 0.5 * xn;
    std::vector<InequalityReport> reps;
    for (const auto& f : d.corpus) {
      const Field field = [&f](const Vector& y) { return f(y); };
      reps.push_back(derivative_identity_check(field, f.degree(), fam, t));
    }
    add_rows(out, reps, n, index, xn, g.r, t);
  }
  if (wants(c, "transfer_identity")) {
    for (double t : ts) add_rows(out, transfer_identity_check(d.batch, fam, t, q), n, index, xn, g.r, t);
  }
  if (wants(c, "three_spheres")) {
    const auto table = three_spheres_check(d.batch, fam, ts, c.beta, q);
    for (std::size_t k = 0; k < ts.size(); ++k) add_rows(out, table[k], n, index, xn, g.r, ts[k]);
  }
  if (wants(c, "holomorphic_variant")) {
    if (n != 2) {
      out.skipped.push_back({"holomorphic_variant", n, index, "needs n = 2"});
    } else {
      const Vector& a = fam.inversion().center;
      const Polynomial w = complex_coordinate() - Polynomial::constant(2, Complex(a[0], a[1]));
      PolynomialBatch batch(2, c.max_degree + 2);
      for (int p = 0; p < c.corpus_count; ++p) {
        const Polynomial f = random_holomorphic_polynomial(
            c.max_degree, derive_seed(c.corpus_seed, static_cast<std::uint64_t>(p)),
            c.growth_radius);
        batch.add(w * w * f);
      }
      const auto table = three_spheres_check(batch, fam, ts, c.beta, q);
      for (std::size_t k = 0; k < ts.size(); ++k) {
        auto reps = table[k];
        for (auto& r : reps) r.name = "holomorphic_variant";
        add_rows(out, reps, n, index, xn, g.r, ts[k]);
      }
    }
  }
  const std::vector<double> xbars = fractions(c.xbar_values, xn);
  BallsGeometry base{g.x, g.r, xn, 1.0};
  if (wants(c, "three_balls")) {
    const auto table = three_balls_check(d.batch, base, xbars, q);
    for (std::size_t k = 0; k < xbars.size(); ++k) {
      add_rows(out, table[k], n, index, xn, g.r, xbars[k]);
    }
  }
  if (wants(c, "embedded_bound")) {
    if (xn < 0.5) {
      out.skipped.push_back({"embedded_bound", n, index, "needs |x0| >= R/2"});
    } else {
      for (double xb : xbars) {
        BallsGeometry geo = base;
        geo.xbar_norm = xb;
        for (double lambda : c.lambdas) {
          const auto reps = embedded_bound_check(d.batch, geo, lambda, std::nullopt, q);
          char suffix[32];
          std::snprintf(suffix, sizeof suffix, "@%g", lambda);
          std::vector<InequalityReport> unit, general, averaged;
          for (const auto& r : reps) {
            if (r.unit) unit.push_back(*r.unit);
            general.push_back(r.general);
            averaged.push_back(r.averaged);
          }
          for (auto* group : {&unit, &general, &averaged}) {
            for (auto& r : *group) r.name += suffix;
            add_rows(out, *group, n, index, xn, g.r, xb);
          }
        }
      }
    }
  }
}

void convexity_task(const SweepConfig& c, const DimensionData& d, TaskOutput& out) {
  const int n = d.n;
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(i / 21.0);
  const SphereRule rule = SphereRule::exact(n, rule_degree_for(c.max_degree));
  Eigen::MatrixXd values(grid.size(), d.batch.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values.row(static_cast<Eigen::Index>(i)) =
        sphere_squared_norms(d.batch, Vector::Zero(n), grid[i], rule).value.transpose();
  }
  for (int p = 0; p < d.batch.size(); ++p) {
    double discrepancy = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double exact = parseval_sphere_l2_squared(d.corpus[p], grid[i]);
      discrepancy = std::max(discrepancy, std::abs(values(i, p) - exact) / exact);
    }
    const auto L = [&](double r) {
      const auto it = std::find(grid.begin(), grid.end(), r);
      return std::sqrt(values(it - grid.begin(), p));
    };
    const ConvexityGridReport rep = log_convexity_check(L, grid);
    const double alpha = std::log(rep.worst_r2 / rep.worst_r) / std::log(rep.worst_r2 / rep.worst_r1);
    const double bound = L(rep.worst_r1) == 0 ? 0.0
                                              : std::pow(L(rep.worst_r1), alpha) *
                                                    std::pow(L(rep.worst_r2), 1.0 - alpha);
    out.rows.push_back({inequality_report("log_convexity", L(rep.worst_r), bound, alpha,
                                          rep.tolerance),
                        n, -1, p, 0.0, 0.0, rep.worst_r});
    out.rows.push_back(
        {identity_report("parseval", discrepancy, 1e-10), n, -1, p, 0.0, 0.0, grid.back()});
  }
}

void delta_task(TaskOutput& out) {
  int index = 0;
  for (double x = 16.0; x <= 1024.0 * (1 + 1e-12); x *= 2.0, ++index) {
    const DeltaLowerBound d = delta_lower_bound_check(x, x / 4.0);
    out.rows.push_back({d.scale_derived, 0, index, -1, x, x / 4.0, x / 3.0});
    out.rows.push_back({d.as_printed, 0, index, -1, x, x / 4.0, x / 3.0});
  }
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, int threads) {
  if (config.corpus_count <= 0) fail(ErrorCode::InvalidInput, "empty corpus");
  std::vector<DimensionData> dims;
  for (int n : config.dimensions) {
    DimensionData d;
    d.n = n;
    d.corpus = make_corpus(n, config.corpus_count, config.max_degree, config.corpus_seed,
                           config.growth_radius);
    d.batch = PolynomialBatch(d.corpus);
    d.configs = sample_configs(n, config.configs, config.geometry_seed, config.x_lo, config.x_hi,
                               config.gap, config.r_min);
    dims.push_back(std::move(d));
  }

  // Tasks in output order.
  std::vector<std::function<void(TaskOutput&)>> tasks;
  for (const auto& d : dims) {
    if (wants(config, "log_convexity")) {
      tasks.push_back([&config, &d](TaskOutput& out) { convexity_task(config, d, out); });
    }
    for (int i = 0; i < static_cast<int>(d.configs.size()); ++i) {
      tasks.push_back([&config, &d, i](TaskOutput& out) { config_task(config, d, i, out); });
    }
  }
  if (wants(config, "delta_lower_bound")) tasks.push_back([](TaskOutput& out) { delta_task(out); });

  std::vector<TaskOutput> outputs(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i](outputs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < count; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult result;
  for (auto& o : outputs) {
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
    result.skipped.insert(result.skipped.end(), o.skipped.begin(), o.skipped.end());
  }
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string sweep_csv(const SweepResult& result) {
  std::string out = "name,n,x_norm,r,t_or_xbar,exponent,lhs,rhs,ratio,pass\n";
  for (const auto& row : result.rows) {
    const auto& r = row.report;
    out += r.name + ',' + std::to_string(row.n) + ',' + fmt(row.x_norm) + ',' + fmt(row.r) + ',' +
           fmt(row.parameter) + ',' + fmt(r.exponent_used) + ',' + fmt(r.lhs) + ',' + fmt(r.rhs) +
           ',' + fmt(r.ratio) + ',' + (r.pass ? "true" : "false") + '\n';
  }
  return out;
}

std::string sweep_json_lines(const SweepResult& result) {
  std::string out;
  for (const auto& row : result.rows) {
    json j = json::parse(to_json(row.report));
    j["n"] = row.n;
    j["config"] = row.config;
    j["poly"] = row.poly;
    j["x_norm"] = row.x_norm;
    j["r"] = row.r;
    j["parameter"] = row.parameter;
    out += j.dump() + '\n';
  }
  for (const auto& s : result.skipped) {
    out += json{{"skipped", s.check}, {"n", s.n}, {"config", s.config}, {"reason", s.reason}}
               .dump() +
           '\n';
  }
  return out;
}

}  // namespace threespheres
