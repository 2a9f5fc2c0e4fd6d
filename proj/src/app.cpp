#include "convexflow/app.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "convexflow/envelope.hpp"
#include "convexflow/error.hpp"
#include "convexflow/flow.hpp"

namespace convexflow {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

namespace {

Json custom_to_json(const PolynomialSpec& s) {
  Json j;
  j["dim"] = s.dim;
  j["coefficients"] = s.coefficients;
  j["lower"] = s.lower;
  j["upper"] = s.upper;
  j["r0"] = s.r0 ? Json(*s.r0) : Json(nullptr);
  j["default_n"] = s.default_n;
  return j;
}

PolynomialSpec custom_from_json(const Json& j) {
  PolynomialSpec s;
  for (const auto& [k, v] : j.items()) {
    if (k == "dim") s.dim = v.get<int>();
    else if (k == "coefficients") s.coefficients = v.get<std::vector<double>>();
    else if (k == "lower") s.lower = v.get<double>();
    else if (k == "upper") s.upper = v.get<double>();
    else if (k == "r0") s.r0 = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    else if (k == "default_n") s.default_n = v.get<int>();
    else throw PreconditionError("config: unknown key custom." + k);
  }
  return s;
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
void read_opt(const Json& v, std::optional<T>& dst) {
  if (v.is_null())
    dst.reset();
  else
    dst = v.get<T>();
}

}  // namespace

Json config_to_json(const RunConfig& c) {
  Json j;
  j["problem"] = c.problem;
  j["custom"] = c.custom ? custom_to_json(*c.custom) : Json(nullptr);
  j["n"] = opt(c.n);
  j["lower"] = opt(c.lower);
  j["upper"] = opt(c.upper);
  j["dirs"] = opt(c.dirs);
  j["safety"] = c.safety;
  j["T"] = c.T;
  j["snapshot_spacing"] = c.snapshot_spacing;
  j["snapshot_times"] = c.snapshot_times;
  j["tail_fraction"] = c.tail_fraction;
  j["lemma2_radius"] = c.lemma2_radius;
  j["flow"] = {{"x0", c.flow.x0}, {"dt_ode", c.flow.dt_ode}, {"method", c.flow.method}, {"t_end", c.flow.t_end}};
  j["mc"] = {{"n_paths", c.mc.n_paths},       {"dt_mc", c.mc.dt_mc},       {"horizon", c.mc.horizon},
             {"facet_x0", c.mc.facet_x0},     {"value_t", opt(c.mc.value_t)},   {"value_x0", c.mc.value_x0},
             {"exit_r", c.mc.exit_r},         {"exit_paths", c.mc.exit_paths}, {"exit_ts", c.mc.exit_ts}};
  j["tolerances"] = {{"c_dir", c.tol.c_dir}, {"c_disc", c.tol.c_disc}};
  j["out"] = c.out;
  j["seed"] = c.seed;
  return j;
}

RunConfig config_from_json(const Json& j, RunConfig c) {
  if (!j.is_object()) throw PreconditionError("config: top level must be a JSON object");
  // A manifest embeds its configuration under "config".
  if (j.contains("config") && j.contains("config_hash")) return config_from_json(j.at("config"), c);
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "problem") c.problem = v.get<std::string>();
      else if (k == "custom") c.custom = v.is_null() ? std::nullopt : std::optional(custom_from_json(v));
      else if (k == "n") read_opt(v, c.n);
      else if (k == "lower") read_opt(v, c.lower);
      else if (k == "upper") read_opt(v, c.upper);
      else if (k == "dirs") read_opt(v, c.dirs);
      else if (k == "safety") c.safety = v.get<double>();
      else if (k == "T") c.T = v.get<double>();
      else if (k == "snapshot_spacing") c.snapshot_spacing = v.get<double>();
      else if (k == "snapshot_times") c.snapshot_times = v.get<std::vector<double>>();
      else if (k == "tail_fraction") c.tail_fraction = v.get<double>();
      else if (k == "lemma2_radius") c.lemma2_radius = v.get<double>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "flow") {
        for (const auto& [fk, fv] : v.items()) {
          if (fk == "x0") c.flow.x0 = fv.get<std::vector<std::vector<double>>>();
          else if (fk == "dt_ode") c.flow.dt_ode = fv.get<double>();
          else if (fk == "method") c.flow.method = fv.get<std::string>();
          else if (fk == "t_end") c.flow.t_end = fv.get<double>();
          else throw PreconditionError("config: unknown key flow." + fk);
        }
      } else if (k == "mc") {
        for (const auto& [mk, mv] : v.items()) {
          if (mk == "n_paths") c.mc.n_paths = mv.get<long>();
          else if (mk == "dt_mc") c.mc.dt_mc = mv.get<double>();
          else if (mk == "horizon") c.mc.horizon = mv.get<double>();
          else if (mk == "facet_x0") c.mc.facet_x0 = mv.get<double>();
          else if (mk == "value_t") read_opt(mv, c.mc.value_t);
          else if (mk == "value_x0") c.mc.value_x0 = mv.get<std::vector<double>>();
          else if (mk == "exit_r") c.mc.exit_r = mv.get<double>();
          else if (mk == "exit_paths") c.mc.exit_paths = mv.get<long>();
          else if (mk == "exit_ts") c.mc.exit_ts = mv.get<std::vector<double>>();
          else throw PreconditionError("config: unknown key mc." + mk);
        }
      } else if (k == "tolerances") {
        for (const auto& [tk, tv] : v.items()) {
          if (tk == "c_dir") c.tol.c_dir = tv.get<double>();
          else if (tk == "c_disc") c.tol.c_disc = tv.get<double>();
          else throw PreconditionError("config: unknown key tolerances." + tk);
        }
      } else {
        throw PreconditionError("config: unknown key " + k);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_hash(const RunConfig& c) {
  Json j = config_to_json(c);
  j.erase("out");
  return hex64(fnv1a64(j.dump()));
}

// ---------------------------------------------------------------- resolution

ResolvedRun resolve(const RunConfig& c) {
  ResolvedRun r;
  if (c.custom) {
    r.problem = polynomial_problem(*c.custom);
  } else {
    r.problem = problem_library(c.problem);
  }
  if (c.lower) r.problem.box_lower = *c.lower;
  if (c.upper) r.problem.box_upper = *c.upper;
  r.problem.validate();
  const int n = c.n.value_or(r.problem.default_n);
  r.grid = r.problem.grid(n);
  const int dim = r.problem.dim;
  r.dirs = DirectionSet::preset(parse_direction_preset(c.dirs.value_or(dim == 1 ? "axes" : "stencil8")), dim);
  for (int a = 0; a < dim; ++a)
    if (r.grid.n(a) < 2 * r.dirs.band_width() + 3)
      throw PreconditionError("grid too small for the direction set: need at least " +
                              std::to_string(2 * r.dirs.band_width() + 3) + " nodes per axis");

  if (!(c.safety > 0 && c.safety <= 1))
    throw CflViolation("CFL safety factor must lie in (0, 1]: dt = safety * (h*min|p|)^2/2 with safety = " +
                       format_double(c.safety) + " would exceed the bound (h*min|p|)^2/2 = " +
                       format_double(cfl_dt(r.grid, r.dirs, 1.0)));
  if (!(c.T > 0)) throw PreconditionError("T must be positive");
  r.solve.T = c.T;
  r.solve.dirs = r.dirs;
  r.solve.safety = c.safety;
  if (!c.snapshot_times.empty()) {
    if (!std::is_sorted(c.snapshot_times.begin(), c.snapshot_times.end()))
      throw PreconditionError("snapshot_times must be sorted");
    if (c.snapshot_times.front() < 0 || c.snapshot_times.back() > c.T)
      throw PreconditionError("snapshot_times must lie in [0, T]");
    r.solve.snapshot_times = c.snapshot_times;
  } else {
    if (!(c.snapshot_spacing > 0)) throw PreconditionError("snapshot_spacing must be positive");
    r.solve.snapshot_times = uniform_times(c.T, c.snapshot_spacing);
  }
  if (!(c.tail_fraction > 0 && c.tail_fraction <= 1)) throw PreconditionError("tail_fraction must lie in (0, 1]");
  if (!(c.lemma2_radius > 0)) throw PreconditionError("lemma2_radius must be positive");
  if (!(c.tol.c_dir > 0 && c.tol.c_disc > 0)) throw PreconditionError("tolerance constants must be positive");

  r.flow.t_end = c.flow.t_end;
  r.flow.dt_ode = c.flow.dt_ode;
  r.flow.method = parse_flow_method(c.flow.method);
  if (!(r.flow.t_end > 0 && r.flow.dt_ode > 0)) throw PreconditionError("flow t_end and dt_ode must be positive");
  if (c.flow.x0.empty()) {
    const double lo = r.grid.lower(0), hi = r.grid.upper(0);
    for (double f : {0.125, 0.3, 0.5, 0.7, 0.875}) {
      Point p(dim);
      p(0) = lo + f * (hi - lo);
      if (dim == 2) p(1) = lo + (1 - f * 0.5 - 0.25) * (hi - lo);
      r.flow_starts.push_back(p);
    }
  } else {
    for (const auto& x : c.flow.x0) {
      if (int(x.size()) != dim) throw PreconditionError("flow.x0 entries must have dimension " + std::to_string(dim));
      Point p = Eigen::Map<const Eigen::VectorXd>(x.data(), dim);
      if (!r.grid.contains(p)) throw PreconditionError("flow.x0 entry outside the grid box");
      r.flow_starts.push_back(p);
    }
  }

  r.mc.n_paths = c.mc.n_paths;
  r.mc.dt_mc = c.mc.dt_mc;
  r.mc.horizon = c.mc.horizon;
  r.mc.seed = c.seed;
  r.mc.validate();
  const double value_t = c.mc.value_t.value_or(std::min(2.0, c.T));
  if (!(value_t > 0 && value_t <= c.T)) throw PreconditionError("mc.value_t must lie in (0, T]");
  if (!c.mc.value_x0.empty() && int(c.mc.value_x0.size()) != dim)
    throw PreconditionError("mc.value_x0 must have dimension " + std::to_string(dim));
  if (!(c.mc.exit_r > 0) || c.mc.exit_paths < 100) throw PreconditionError("mc exit-time settings invalid");
  return r;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"solve", "envelope", "flow", "mc-validate", "rates", "audit", "all"};
  return s;
}

// ---------------------------------------------------------------- run

namespace {

std::vector<double> to_vec(const Point& p) { return {p.data(), p.data() + p.size()}; }

Json check_json(const std::string& name, bool passed, double measured, double limit) {
  return {{"name", name}, {"passed", passed}, {"measured", measured}, {"limit", limit}, {"margin", limit - measured}};
}

class Session {
 public:
  Session(const RunConfig& c, std::ostream& log) : cfg_(c), run_(resolve(c)), log_(log), out_(c.out) {
    fs::create_directories(out_);
  }

  void write(const std::string& rel, const std::string& content) {
    write_text(out_ / rel, content);
    if (std::find(artifacts_.begin(), artifacts_.end(), rel) == artifacts_.end()) artifacts_.push_back(rel);
  }
  void write_json(const std::string& rel, const Json& j) { write(rel, j.dump(2) + "\n"); }

  const ScalarField& u0() {
    if (!u0_) u0_ = run_.problem.sample(run_.grid.n(0));
    return *u0_;
  }
  const EnvelopeResult& envelope() {
    if (!env_) env_ = reference_envelope(u0());
    return *env_;
  }
  const Snapshots& snapshots() {
    if (!snaps_) {
      log_ << "solving " << run_.problem.name << " on " << run_.grid.n(0) << (run_.grid.dim() == 2 ? "^2" : "")
           << " nodes to T = " << cfg_.T << "\n";
      snaps_ = solve(u0(), run_.solve);
    }
    return *snaps_;
  }

  bool solve_cmd() {
    const auto& s = snapshots();
    auto files = write_snapshots(out_ / "snapshots", s, config_hash(cfg_));
    for (const auto& f : files) artifacts_.push_back("snapshots/" + f);
    log_ << "wrote " << s.size() << " snapshots (dt = " << format_double(s.dt_used) << ", steps = " << s.steps
         << ")\n";
    return audit_cmd();
  }

  bool envelope_cmd() {
    const auto& e = envelope();
    write("envelope.csv", field_csv(e.envelope));
    Json j;
    j["method"] = to_string(e.method);
    j["max_gap_to_input"] = e.max_gap_to_input;
    j["min"] = e.envelope.values().minCoeff();
    j["argmin"] = Json::array();
    for (const auto& p : argmin_nodes(e.envelope)) j["argmin"].push_back(to_vec(p));
    write_json("envelope.json", j);
    log_ << "envelope (" << to_string(e.method) << "): min " << format_double(j["min"].get<double>()) << "\n";
    return true;
  }

  bool audit_cmd() {
    const auto rep = structural_audit(snapshots(), envelope().envelope, run_.problem, cfg_.tol);
    Json j;
    j["checks"] = Json::array();
    for (const auto& c : rep.checks) {
      j["checks"].push_back(check_json(c.name, c.passed, c.measured, c.limit));
      log_ << (c.passed ? "PASS " : "FAIL ") << c.name << " measured " << format_double(c.measured) << " limit "
           << format_double(c.limit) << "\n";
    }
    j["all_passed"] = rep.all_passed();
    write_json("audit.json", j);
    return rep.all_passed();
  }

  std::optional<RateFit> rate_fit() {
    const auto series = sup_error_series(snapshots(), envelope().envelope);
    try {
      return fit_rate(series, cfg_.tail_fraction, rate_floor(u0().scale(), cfg_.tol.c_dir, run_.grid.h()));
    } catch (const PreconditionError&) {
      return std::nullopt;
    }
  }

  bool rates_cmd() {
    const auto& s = snapshots();
    const auto& env = envelope().envelope;
    const auto series = sup_error_series(s, env);
    const auto grad = grad_error_series(s, env);
    const double h = run_.grid.h();
    const auto fit = fit_rate(series, cfg_.tail_fraction, rate_floor(u0().scale(), cfg_.tol.c_dir, h));

    write("error_series.csv", columns_csv({"t", "error"}, {series.t, series.error}));
    write("grad_error_series.csv", columns_csv({"t", "grad_error"}, {grad.t, grad.error}));
    write("fit_points.csv", columns_csv({"t", "error"}, {fit.t, fit.error}));
    write("error_series.gp", gnuplot_error_script("error_series.csv", "error_series.png", "sup error"));
    write("grad_error_series.gp",
          gnuplot_error_script("grad_error_series.csv", "grad_error_series.png", "gradient error"));

    Json checks = Json::array();
    bool ok = true;
    auto add = [&](const std::string& name, bool passed, double measured, double limit) {
      checks.push_back(check_json(name, passed, measured, limit));
      ok = ok && passed;
    };
    double rise = 0;
    for (std::size_t k = 1; k < series.error.size(); ++k) rise = std::max(rise, series.error[k] - series.error[k - 1]);
    add("error_nonincreasing", rise <= 0, rise, 0);
    add("lambda_positive", fit.lambda > 0, -fit.lambda, 0);
    const double r2_min = run_.grid.dim() == 1 ? 0.9 : 0.85;
    add("r_squared", fit.r_squared >= r2_min, -fit.r_squared, -r2_min);
    const double e_cap = std::max(0.02 * series.error.front(), 5 * cfg_.tol.c_dir * h);
    add("final_error", series.error.back() <= e_cap, series.error.back(), e_cap);

    const auto l2 = lemma2_gradient_bound_check(s, env, time_lipschitz_check(s, run_.problem.hessian_bound).m_disc,
                                                cfg_.lemma2_radius);
    const double tol_h = cfg_.tol.c_dir * h;
    add("lemma2_ratio", l2.worst_ratio <= 1 + tol_h, l2.worst_ratio, 1 + tol_h);

    Json j;
    j["C"] = fit.C;
    j["lambda"] = fit.lambda;
    j["r_squared"] = fit.r_squared;
    j["t_lo"] = fit.t_lo;
    j["t_hi"] = fit.t_hi;
    j["points"] = fit.t.size();
    j["excluded_below_floor"] = fit.excluded_below_floor;
    j["clamped_snapshots"] = series.clamped;
    j["most_negative_gap"] = series.most_negative;
    j["lemma2"] = {{"r", l2.r}, {"shrunk", l2.shrunk}, {"worst_ratio", l2.worst_ratio}};
    j["checks"] = checks;
    j["all_passed"] = ok;
    write_json("rates.json", j);
    log_ << "rate fit: lambda = " << format_double(fit.lambda) << ", C = " << format_double(fit.C)
         << ", R^2 = " << format_double(fit.r_squared) << "\n";
    return ok;
  }

  bool flow_cmd() {
    const auto& s = snapshots();
    const auto& env = envelope().envelope;
    const double env_min = env.values().minCoeff();
    const auto argmin = argmin_nodes(env);
    const auto fit = rate_fit();
    const double scale = u0().scale();
    const double h = run_.grid.h();
    Json runs = Json::array();
    bool ok = true;
    for (std::size_t k = 0; k < run_.flow_starts.size(); ++k) {
      const auto tr = integrate(s, env, run_.flow_starts[k], run_.flow);
      const std::string name = "trajectory_" + std::to_string(k) + ".csv";
      write(name, trajectory_csv(tr));
      Json sum = trajectory_summary(tr, env_min);
      const double dist = distance_to_set(tr.final_point(), argmin);
      const auto tail = monotone_tail_check(tr, argmin, fit ? fit->C : 0.0, fit ? fit->lambda : 0.0);
      const bool gap_ok = sum["final_env_gap"].get<double>() <= 1e-3 * scale;
      const bool dist_ok = dist <= 5 * h;
      sum["csv"] = name;
      sum["distance_to_argmin"] = dist;
      sum["checks"] = {check_json("env_gap", gap_ok, sum["final_env_gap"].get<double>(), 1e-3 * scale),
                       check_json("distance_to_argmin", dist_ok, dist, 5 * h),
                       check_json("monotone_tail", tail.passed, tail.worst_excess, 1e-12)};
      ok = ok && gap_ok && dist_ok && tail.passed;
      log_ << "flow from " << format_double(run_.flow_starts[k](0)) << ": " << to_string(tr.terminated_reason)
           << ", gap " << format_double(sum["final_env_gap"].get<double>()) << "\n";
      runs.push_back(sum);
    }
    Json j;
    j["method"] = to_string(run_.flow.method);
    j["dt_ode"] = run_.flow.dt_ode;
    j["t_end"] = run_.flow.t_end;
    j["env_min"] = env_min;
    j["trajectories"] = runs;
    j["all_passed"] = ok;
    try {
      const auto integ = gradient_error_integrability_report(s, env);
      j["gradient_error_integral"] = integ.integral;
    } catch (const PreconditionError&) {
    }
    write_json("flow.json", j);
    return ok;
  }

  bool mc_cmd() {
    const auto& s = snapshots();
    const double h = run_.grid.h();
    const double slack = cfg_.tol.c_disc * (h + std::sqrt(run_.mc.dt_mc));
    const int dim = run_.grid.dim();
    Json checks = Json::array();
    bool ok = true;
    auto add = [&](const std::string& name, bool passed, double measured, double limit) {
      checks.push_back(check_json(name, passed, measured, limit));
      ok = ok && passed;
    };
    Json j;
    j["config"] = {{"n_paths", run_.mc.n_paths}, {"dt_mc", run_.mc.dt_mc}, {"seed", run_.mc.seed}};

    Point x0 = Point::Zero(dim);
    if (!cfg_.mc.value_x0.empty()) x0 = Eigen::Map<const Eigen::VectorXd>(cfg_.mc.value_x0.data(), dim);
    const double t = cfg_.mc.value_t.value_or(std::min(2.0, cfg_.T));
    const double value = field_value(s, t, x0);
    const auto fb = control_value_estimate(s, x0, t, run_.mc, ControlPolicy::feedback);
    const auto zero = control_value_estimate(s, x0, t, run_.mc, ControlPolicy::zero);
    const double fb_tol = 3 * fb.se + slack;
    add("feedback_brackets_value", std::abs(fb.mean - value) <= fb_tol, std::abs(fb.mean - value), fb_tol);
    add("feedback_lower_bound", fb.mean >= value - fb_tol, value - fb.mean, fb_tol);
    const double z_tol = 3 * zero.se + slack;
    add("zero_control_lower_bound", zero.mean >= value - z_tol, value - zero.mean, z_tol);
    j["value"] = {{"x0", to_vec(x0)},        {"t", t},
                  {"solver_value", value},   {"feedback_mean", fb.mean},
                  {"feedback_se", fb.se},    {"feedback_absorbed", fb.absorbed},
                  {"zero_mean", zero.mean},  {"zero_se", zero.se},
                  {"checkpoint_s", fb.checkpoint_s}, {"checkpoint_mean", fb.value_mean},
                  {"checkpoint_se", fb.value_se}};

    const auto dp = dynamic_programming_check(s, x0, t, t / 2, run_.mc, cfg_.tol);
    add("dynamic_programming", dp.within, std::abs(dp.gap), dp.tolerance);
    j["dynamic_programming"] = {{"t", t}, {"s", t / 2}, {"value_t", dp.value_t}, {"mean_value_s", dp.mean_value_s},
                                {"se", dp.se}, {"gap", dp.gap}, {"tolerance", dp.tolerance}};

    if (dim == 1) {
      const auto fw = facet_walk_1d(run_.problem, u0(), cfg_.mc.facet_x0, run_.mc);
      const double hit_tol = 3 * fw.hit_a_se;
      add("facet_hit_probability", std::abs(fw.hit_a_fraction - fw.weight_a) <= hit_tol,
          std::abs(fw.hit_a_fraction - fw.weight_a), hit_tol);
      const double val_tol = 3 * fw.se + cfg_.tol.c_disc * std::sqrt(run_.mc.dt_mc);
      add("facet_value", std::abs(fw.mean - fw.envelope_value) <= val_tol, std::abs(fw.mean - fw.envelope_value),
          val_tol);
      j["facet_walk"] = {{"x0", cfg_.mc.facet_x0},         {"a", fw.a},
                         {"b", fw.b},                      {"weight_a", fw.weight_a},
                         {"hit_a_fraction", fw.hit_a_fraction}, {"hit_a_se", fw.hit_a_se},
                         {"mean", fw.mean},                {"se", fw.se},
                         {"envelope_value", fw.envelope_value}, {"censored_fraction", fw.censored_fraction},
                         {"censored_bound", fw.censored_bound}};
    }

    MCConfig exit_cfg = run_.mc;
    exit_cfg.n_paths = cfg_.mc.exit_paths;
    const auto et = exit_time_tail(cfg_.mc.exit_r, cfg_.mc.exit_ts, exit_cfg);
    double worst = -1;
    for (std::size_t k = 0; k < et.ts.size(); ++k)
      worst = std::max(worst, et.empirical_tail[k] - et.bound[k] - 3 * et.standard_error[k]);
    add("exit_time_bound", worst <= 0, worst, 0);
    j["exit_time"] = {{"r", et.r},           {"q", q_of_r(et.r)},         {"n_paths", et.n_paths},
                      {"t", et.ts},          {"tail", et.empirical_tail}, {"se", et.standard_error},
                      {"bound", et.bound}};
    j["checks"] = checks;
    j["all_passed"] = ok;
    write_json("mc_report.json", j);
    log_ << "monte carlo: feedback " << format_double(fb.mean) << " +- " << format_double(fb.se) << " vs solver "
         << format_double(value) << "\n";
    return ok;
  }

  void manifest(const std::string& subcommand, int exit_code) {
    Json m;
    m["subcommand"] = subcommand;
    m["config"] = config_to_json(cfg_);
    m["config_hash"] = config_hash(cfg_);
    m["exit_code"] = exit_code;
    std::map<std::string, std::string> sums;
    for (const auto& a : artifacts_) sums[a] = file_checksum(out_ / a);
    m["artifacts"] = sums;
    write_text(out_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  RunConfig cfg_;
  ResolvedRun run_;
  std::ostream& log_;
  fs::path out_;
  std::vector<std::string> artifacts_;
  std::optional<ScalarField> u0_;
  std::optional<EnvelopeResult> env_;
  std::optional<Snapshots> snaps_;
};

}  // namespace

int run(const std::string& sub, const RunConfig& c, std::ostream& log, std::ostream& err) {
  try {
    const auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), sub) == subs.end())
      throw PreconditionError("unknown subcommand '" + sub + "'");
    Session s(c, log);
    bool ok = true;
    if (sub == "solve") ok = s.solve_cmd();
    else if (sub == "envelope") ok = s.envelope_cmd();
    else if (sub == "audit") ok = s.audit_cmd();
    else if (sub == "rates") ok = s.rates_cmd();
    else if (sub == "flow") ok = s.flow_cmd();
    else if (sub == "mc-validate") ok = s.mc_cmd();
    else {
      ok = s.envelope_cmd();
      ok = s.solve_cmd() && ok;
      ok = s.rates_cmd() && ok;
      ok = s.flow_cmd() && ok;
      ok = s.mc_cmd() && ok;
    }
    const int code = ok ? 0 : 1;
    s.manifest(sub, code);
    if (!ok) err << "error: invariant check failed (see reports in " << c.out << ")\n";
    return code;
  } catch (const NumericalAbort& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace convexflow
