#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "scalext/ambiguity.hpp"
#include "scalext/euler.hpp"
#include "scalext/microlocal.hpp"
#include "scalext/models.hpp"
#include "scalext/renorm_product.hpp"
#include "scalext/scaling.hpp"

using nlohmann::json;
using namespace scalext;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  fs::path out;
  int threads = 1;
  bool verbose = false;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- schema helpers -------------------------------------------------------

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

double get_num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

std::string get_str(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

std::vector<double> get_vec(const json& j, const std::string& where, size_t size = 0) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> v;
  for (size_t i = 0; i < j.size(); ++i) v.push_back(get_num(j[i], where + "[" + std::to_string(i) + "]"));
  if (size && v.size() != size)
    throw ConfigError(where + ": expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
  return v;
}

std::array<double, kMaxDim> to_array(const std::vector<double>& v) {
  std::array<double, kMaxDim> a{};
  for (size_t i = 0; i < v.size() && i < a.size(); ++i) a[i] = v[i];
  return a;
}

std::vector<std::array<double, kMaxDim>> get_points(const json& j, const std::string& where, size_t size) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
  std::vector<std::array<double, kMaxDim>> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(to_array(get_vec(j[i], where + "[" + std::to_string(i) + "]", size)));
  return out;
}

// ---- config pieces --------------------------------------------------------

ChartRegion parse_chart(const json& j) {
  allow_keys(j, "chart", {"n", "d", "half_x", "half_h"});
  const int n = get_int(need(j, "n", "chart"), "chart.n"), d = get_int(need(j, "d", "chart"), "chart.d");
  const double hx = j.contains("half_x") ? get_num(j["half_x"], "chart.half_x") : 1.0;
  const double hh = j.contains("half_h") ? get_num(j["half_h"], "chart.half_h") : 1.0;
  if (!(hx > 0.0 && hh > 0.0)) throw ConfigError("chart: half widths must be positive");
  try {
    return ChartRegion::standard(n, d, hx, hh);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("chart: ") + e.what());
  }
}

Distribution parse_model(const json& j, const ChartRegion& chart, const std::string& where) {
  allow_keys(j, where, {"name", "a", "alpha", "g"});
  const std::string name = get_str(need(j, "name", where), where + ".name");
  const auto names = model_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError(where + ": unknown model '" + name + "'");
  ModelParams p;
  if (j.contains("a")) p.a = get_num(j["a"], where + ".a");
  if (j.contains("alpha")) {
    const auto a = get_vec(j["alpha"], where + ".alpha", chart.dims.d);
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] < 0 || a[i] != std::floor(a[i])) throw ConfigError(where + ".alpha: entries must be natural numbers");
      p.alpha[i] = static_cast<int>(a[i]);
    }
  }
  if (j.contains("g")) p.g = get_str(j["g"], where + ".g");
  try {
    return model(name, p, chart);
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Cutoff parse_cutoff(const json& j, const std::string& where) {
  allow_keys(j, where, {"a", "b", "profile"});
  const double a = j.contains("a") ? get_num(j["a"], where + ".a") : 0.5;
  const double b = j.contains("b") ? get_num(j["b"], where + ".b") : 1.0;
  const std::string prof = j.contains("profile") ? get_str(j["profile"], where + ".profile") : "exp";
  if (!(a > 0.0 && b > a)) throw ConfigError(where + ": need 0 < a < b");
  try {
    return make_cutoff(a, b, prof);
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::vector<Cutoff> parse_cutoffs(const json& cfg, size_t min_count) {
  if (!cfg.contains("cutoffs")) {
    if (min_count > 1) throw ConfigError("cutoffs: need at least " + std::to_string(min_count) + " entries");
    return {make_cutoff()};
  }
  const json& j = cfg["cutoffs"];
  if (!j.is_array() || j.size() < std::max<size_t>(min_count, 1))
    throw ConfigError("cutoffs: need at least " + std::to_string(std::max<size_t>(min_count, 1)) + " entries");
  std::vector<Cutoff> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(parse_cutoff(j[i], "cutoffs[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> parse_lambda_grid(const json& cfg) {
  if (!cfg.contains("lambda_grid")) return default_lambda_grid();
  const json& j = cfg["lambda_grid"];
  if (j.is_array()) {
    auto g = get_vec(j, "lambda_grid");
    if (g.size() < 2) throw ConfigError("lambda_grid: need at least two points");
    for (double v : g)
      if (!(v > 0.0 && v <= 1.0)) throw ConfigError("lambda_grid: entries must lie in (0, 1]");
    return g;
  }
  allow_keys(j, "lambda_grid", {"points", "lo", "hi"});
  const int pts = j.contains("points") ? get_int(j["points"], "lambda_grid.points") : 40;
  const double lo = j.contains("lo") ? get_num(j["lo"], "lambda_grid.lo") : 1e-4;
  const double hi = j.contains("hi") ? get_num(j["hi"], "lambda_grid.hi") : 1.0;
  if (pts < 2 || !(lo > 0.0 && hi > lo && hi <= 1.0)) throw ConfigError("lambda_grid: need points >= 2, 0 < lo < hi <= 1");
  return default_lambda_grid(pts, lo, hi);
}

std::vector<TestFunction> parse_probes(const json& cfg, Dims dims, bool required_nonempty = true) {
  if (!cfg.contains("probes")) return default_probes(dims);
  const json& j = cfg["probes"];
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "default") return default_probes(dims);
    if (s == "away") return away_probes(dims);
    throw ConfigError("probes: expected 'default', 'away' or a list of bumps");
  }
  if (!j.is_array()) throw ConfigError("probes: expected a list");
  if (j.empty() && required_nonempty) throw ConfigError("probes: the probe list is empty");
  std::vector<TestFunction> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string w = "probes[" + std::to_string(i) + "]";
    allow_keys(j[i], w, {"center", "radius"});
    const auto c = get_vec(need(j[i], "center", w), w + ".center", dims.total());
    const auto r = get_vec(need(j[i], "radius", w), w + ".radius", dims.total());
    for (double v : r)
      if (!(v > 0.0)) throw ConfigError(w + ".radius: entries must be positive");
    out.push_back(make_bump(dims, c, r).with_id("bump" + std::to_string(i)));
  }
  return out;
}

Cone named_cone(const std::string& name, const Distribution& t, const std::string& where) {
  const Dims dm = t.dims();
  const Box box = t.domain().full_box();
  if (name == "empty") return Cone(dm);
  if (name == "full") return full_cone(dm, box);
  if (name == "conormal_I") return conormal_I(dm, box);
  if (name == "model") {
    if (!t.meta_cone) throw ConfigError(where + ": the model declares no cone");
    return *t.meta_cone;
  }
  if (name == "V") {
    if (dm.n < 1) throw ConfigError(where + ": 'V' needs n >= 1");
    const Cone a = conormal_hyperplane_x(dm, box, 0), b = conormal_I(dm, box);
    return cone_union(cone_union(a, b), cone_sum(a, b));
  }
  if (name.rfind("conormal_x", 0) == 0) {
    int i = -1;
    try {
      i = std::stoi(name.substr(10));
    } catch (...) {
    }
    if (i < 0 || i >= dm.n) throw ConfigError(where + ": bad hyperplane index in '" + name + "'");
    return conormal_hyperplane_x(dm, box, i);
  }
  throw ConfigError(where + ": unknown cone '" + name + "'");
}

// ---- output ---------------------------------------------------------------

void write_file(const Context& ctx, const std::string& name, const std::string& body) {
  std::ofstream f(ctx.out / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (ctx.out / name).string());
  f << body;
  if (ctx.verbose) std::cerr << "wrote " << (ctx.out / name).string() << "\n";
}

// RFC 4180 quoting for fields holding commas or quotes
std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\n") == std::string::npos) return f;
  std::string q = "\"";
  for (char c : f) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string csv_row(const std::vector<std::string>& cols) {
  std::string s;
  for (size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + csv_field(cols[i]);
  return s + "\n";
}

void log(const Context& ctx, const std::string& msg) {
  if (ctx.verbose) std::cerr << msg << "\n";
}

// ---- experiments ----------------------------------------------------------

ScalingOptions scaling_options(const json& cfg, const ChartRegion& chart, const Context& ctx) {
  ScalingOptions so;
  so.threads = ctx.threads;
  if (cfg.contains("euler")) {
    const std::string id = get_str(cfg["euler"], "euler");
    try {
      so.action = ScalingAction::euler(euler_field_by_id(id, chart));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("euler: ") + e.what());
    }
  }
  return so;
}

void degree_csv(const Context& ctx, const ScalingReport& rep, const std::string& prefix) {
  std::string fits = csv_row({"probe", "usable", "points", "slope", "residual", "log_slope", "log_residual", "log_flag"});
  for (size_t i = 0; i < rep.fits.size(); ++i) {
    const auto& f = rep.fits[i];
    fits += csv_row({rep.probes[i], f.usable ? "1" : "0", std::to_string(f.points), num(f.slope), num(f.residual),
                     num(f.log_slope), num(f.log_residual), f.log_flag ? "1" : "0"});
  }
  write_file(ctx, prefix + "fits.csv", fits);
  std::vector<std::string> head{"lambda"};
  for (const auto& p : rep.probes) head.push_back(p);
  std::string raw = csv_row(head);
  for (size_t g = 0; g < rep.lambda_grid.size(); ++g) {
    std::vector<std::string> row{num(rep.lambda_grid[g])};
    for (const auto& r : rep.raw) row.push_back(num(r[g]));
    raw += csv_row(row);
  }
  write_file(ctx, prefix + "raw.csv", raw);
}

void run_degree(const json& cfg, const Context& ctx) {
  allow_keys(cfg, "config", {"experiment", "chart", "model", "lambda_grid", "probes", "euler", "out"});
  const ChartRegion chart = parse_chart(need(cfg, "chart", "config"));
  const Distribution t = parse_model(need(cfg, "model", "config"), chart, "model");
  const auto probes = parse_probes(cfg, chart.dims);
  const auto grid = parse_lambda_grid(cfg);
  const ScalingOptions so = scaling_options(cfg, chart, ctx);
  log(ctx, "degree: " + t.id() + " with " + std::to_string(probes.size()) + " probes");
  const ScalingReport rep = estimate_degree(t, probes, grid, so);
  degree_csv(ctx, rep, "degree_");
  write_file(ctx, "summary.csv",
             csv_row({"model", "action", "s_hat", "log_flag", "residual"}) +
                 csv_row({t.id(), rep.action, num(rep.s_hat), rep.log_flag ? "1" : "0", num(rep.residual)}));
}

void run_extension(const json& cfg, const Context& ctx) {
  allow_keys(cfg, "config",
             {"experiment", "chart", "model", "s", "cutoffs", "probes", "estimate", "lambda_grid", "out"});
  const ChartRegion chart = parse_chart(need(cfg, "chart", "config"));
  const Distribution t = parse_model(need(cfg, "model", "config"), chart, "model");
  const double s = get_num(need(cfg, "s", "config"), "s");
  const auto chis = parse_cutoffs(cfg, 1);
  const auto probes = parse_probes(cfg, chart.dims);
  const bool estimate = cfg.contains("estimate") ? cfg["estimate"].get<bool>() : false;
  ExtendOptions eo;
  eo.estimate = estimate;
  eo.grid = parse_lambda_grid(cfg);
  eo.scaling.threads = ctx.threads;

  std::vector<ExtensionResult> res;
  for (const auto& c : chis) {
    log(ctx, "extension: " + t.id() + " with " + c.id());
    res.push_back(extend(t, s, c, std::nullopt, eo));
  }
  std::string body = csv_row({"probe", "cutoff", "value"});
  std::vector<std::vector<double>> vals(res.size());
  for (size_t p = 0; p < probes.size(); ++p)
    for (size_t c = 0; c < res.size(); ++c) {
      vals[c].push_back(res[c].tbar.pair(probes[p]));
      body += csv_row({probes[p].id().empty() ? "probe" + std::to_string(p) : probes[p].id(), chis[c].id(),
                       num(vals[c].back())});
    }
  write_file(ctx, "extension.csv", body);
  double disc = 0.0;
  for (size_t a = 0; a < res.size(); ++a)
    for (size_t b = a + 1; b < res.size(); ++b)
      for (size_t p = 0; p < probes.size(); ++p) disc = std::max(disc, std::abs(vals[a][p] - vals[b][p]));
  const auto& r0 = res.front();
  write_file(ctx, "summary.csv",
             csv_row({"model", "s_in", "m", "integer_case", "landing", "s_out", "log_flag", "max_pairwise_discrepancy"}) +
                 csv_row({t.id(), num(s), std::to_string(r0.m), r0.integer_case ? "1" : "0", r0.landing ? "1" : "0",
                          num(r0.s_out), r0.log_flag ? "1" : "0", num(disc)}));
  json rep = json::array();
  for (const auto& r : res) rep.push_back(json::parse(r.to_json()));
  write_file(ctx, "report.json", rep.dump(2) + "\n");
  if (estimate) degree_csv(ctx, *r0.report, "degree_");
}

void run_wf(const json& cfg, const Context& ctx) {
  allow_keys(cfg, "config",
             {"experiment", "chart", "model", "extend", "points", "directions", "k_grid", "window", "threshold",
              "bound", "compare", "out"});
  const ChartRegion chart = parse_chart(need(cfg, "chart", "config"));
  Distribution t = parse_model(need(cfg, "model", "config"), chart, "model");
  const Dims dm = chart.dims;
  const std::string bound_name = cfg.contains("bound") ? get_str(cfg["bound"], "bound") : "model";
  const std::string compare_name = cfg.contains("compare") ? get_str(cfg["compare"], "compare") : bound_name;
  const Cone bound = named_cone(bound_name, t, "bound");
  const Cone compare = named_cone(compare_name, t, "compare");
  if (cfg.contains("extend")) {
    const json& e = cfg["extend"];
    allow_keys(e, "extend", {"s", "cutoff"});
    const double s = get_num(need(e, "s", "extend"), "extend.s");
    const Cutoff c = e.contains("cutoff") ? parse_cutoff(e["cutoff"], "extend.cutoff") : make_cutoff();
    ExtendOptions eo;
    eo.estimate = false;
    t = extend(t, s, c, std::nullopt, eo).tbar;
  }
  const auto pts = get_points(need(cfg, "points", "config"), "points", dm.total());
  const auto dirs = get_points(need(cfg, "directions", "config"), "directions", dm.total());
  for (const auto& w : dirs) {
    double nn = 0.0;
    for (int i = 0; i < dm.total(); ++i) nn += w[i] * w[i];
    if (!(nn > 0.0)) throw ConfigError("directions: zero covector");
  }
  WfOptions wo;
  wo.threads = ctx.threads;
  if (cfg.contains("k_grid")) wo.k_grid = get_vec(cfg["k_grid"], "k_grid");
  if (cfg.contains("threshold")) wo.threshold = get_num(cfg["threshold"], "threshold");
  if (cfg.contains("window")) {
    const json& w = cfg["window"];
    allow_keys(w, "window", {"radius", "taper"});
    if (w.contains("radius")) wo.window.radius = get_num(w["radius"], "window.radius");
    if (w.contains("taper")) wo.window.taper = get_num(w["taper"], "window.taper");
    if (!(wo.window.radius > 0.0)) throw ConfigError("window.radius: must be positive");
  }
  log(ctx, "wf: " + std::to_string(pts.size() * dirs.size()) + " samples of " + t.id());
  const WfReport rep = wf_estimate(t, pts, dirs, wo);
  write_file(ctx, "wf.csv", rep.to_csv());
  const WfAgreement ag = wf_compare(rep, compare);
  size_t failed = 0;
  for (const auto& s : rep.samples) failed += !s.ok;
  write_file(ctx, "summary.csv",
             csv_row({"model", "samples", "failed", "slow", "slow_outside", "consistent", "agreement", "bound", "bound_ok"}) +
                 csv_row({t.id(), std::to_string(rep.samples.size()), std::to_string(failed), std::to_string(ag.slow),
                          std::to_string(ag.slow_outside), num(ag.consistent()), num(ag.agreement()), bound_name,
                          wf_bound_check(rep, bound) ? "1" : "0"}));
}

void run_conjugation(const json& cfg, const Context& ctx) {
  allow_keys(cfg, "config", {"experiment", "chart", "euler", "points", "lambda_grid", "out"});
  const ChartRegion chart = parse_chart(need(cfg, "chart", "config"));
  const json& e = need(cfg, "euler", "config");
  if (!e.is_array() || e.size() != 2) throw ConfigError("euler: expected two field ids");
  EulerField r1, r2;
  try {
    r1 = euler_field_by_id(get_str(e[0], "euler[0]"), chart);
    r2 = euler_field_by_id(get_str(e[1], "euler[1]"), chart);
  } catch (const DomainError& ex) {
    throw ConfigError(std::string("euler: ") + ex.what());
  }
  const Dims dm = chart.dims;
  const auto pts = get_points(need(cfg, "points", "config"), "points", dm.total());
  const auto grid = parse_lambda_grid(cfg);
  std::vector<std::string> head{"lambda"};
  for (int i = 0; i < dm.total(); ++i) head.push_back("p" + std::to_string(i));
  for (int i = 0; i < dm.total(); ++i) head.push_back("phi" + std::to_string(i));
  head.push_back("relation_error");
  std::string body = csv_row(head);
  double worst = 0.0;
  for (double lam : grid)
    for (const auto& p : pts) {
      const ConjugationResult c = conjugation(r1, r2, lam, p);
      const Point lhs = flow(r2, lam, p).endpoint, rhs = flow(r1, lam, c.point).endpoint;
      double err = 0.0;
      for (int i = 0; i < dm.total(); ++i) err = std::max(err, std::abs(lhs[i] - rhs[i]));
      worst = std::max(worst, err);
      std::vector<std::string> row{num(lam)};
      for (int i = 0; i < dm.total(); ++i) row.push_back(num(p[i]));
      for (int i = 0; i < dm.total(); ++i) row.push_back(num(c.point[i]));
      row.push_back(num(err));
      body += csv_row(row);
    }
  write_file(ctx, "conjugation.csv", body);
  write_file(ctx, "summary.csv",
             csv_row({"rho1", "rho2", "samples", "max_relation_error"}) +
                 csv_row({r1.id(), r2.id(), std::to_string(grid.size() * pts.size()), num(worst)}));
}

void run_ambiguity(const json& cfg, const Context& ctx) {
  allow_keys(cfg, "config", {"experiment", "chart", "model", "s", "cutoffs", "m", "x_grid", "out"});
  const ChartRegion chart = parse_chart(need(cfg, "chart", "config"));
  const Distribution t = parse_model(need(cfg, "model", "config"), chart, "model");
  const double s = get_num(need(cfg, "s", "config"), "s");
  const auto chis = parse_cutoffs(cfg, 2);
  const Dims dm = chart.dims;
  const int m = cfg.contains("m") ? get_int(cfg["m"], "m") : std::max(0, subtraction_order(s, dm.d));
  if (m < 0) throw ConfigError("m: must be >= 0");
  std::vector<Point> xg;
  if (cfg.contains("x_grid")) {
    for (const auto& x : get_points(cfg["x_grid"], "x_grid", dm.n)) xg.push_back(x);
  } else {
    xg.push_back(Point{});
  }
  ExtendOptions eo;
  eo.estimate = false;
  log(ctx, "ambiguity: " + t.id() + " between " + chis[0].id() + " and " + chis[1].id());
  const ExtensionResult a = extend(t, s, chis[0], std::nullopt, eo), b = extend(t, s, chis[1], std::nullopt, eo);
  const Decomposition dd = decompose_difference(a, b, m, xg);
  write_file(ctx, "counterterm.csv", dd.counterterm.to_csv());
  write_file(ctx, "summary.csv",
             csv_row({"model", "s", "m", "rank", "equal", "max_coeff", "residual"}) +
                 csv_row({t.id(), num(s), std::to_string(m), std::to_string(counterterm_rank(s, dm.d)),
                          dd.equal ? "1" : "0", num(dd.max_coeff), num(dd.residual)}));
}

void run_product(const json& cfg, const Context& ctx) {
  allow_keys(cfg, "config",
             {"experiment", "chart", "u1", "u2", "s1", "s2", "g1", "g2", "s_target", "cutoff", "probes", "out"});
  const ChartRegion chart = parse_chart(need(cfg, "chart", "config"));
  ProductRequest req;
  req.u1 = parse_model(need(cfg, "u1", "config"), chart, "u1");
  req.u2 = parse_model(need(cfg, "u2", "config"), chart, "u2");
  req.s1 = get_num(need(cfg, "s1", "config"), "s1");
  req.s2 = get_num(need(cfg, "s2", "config"), "s2");
  req.g1 = named_cone(cfg.contains("g1") ? get_str(cfg["g1"], "g1") : "empty", req.u1, "g1");
  req.g2 = named_cone(cfg.contains("g2") ? get_str(cfg["g2"], "g2") : "empty", req.u2, "g2");
  if (cfg.contains("s_target")) req.s_target = get_num(cfg["s_target"], "s_target");
  if (!(req.target() < req.s1 + req.s2)) throw ConfigError("s_target: must be below s1 + s2");
  const Cutoff chi = cfg.contains("cutoff") ? parse_cutoff(cfg["cutoff"], "cutoff") : make_cutoff();
  const auto probes = parse_probes(cfg, chart.dims);
  ExtendOptions eo;
  eo.estimate = false;
  log(ctx, "product: " + req.u1.id() + " * " + req.u2.id());
  const ExtensionResult r = renormalize_product(req, chi, eo);
  std::string body = csv_row({"probe", "value"});
  for (size_t p = 0; p < probes.size(); ++p)
    body += csv_row({probes[p].id().empty() ? "probe" + std::to_string(p) : probes[p].id(), num(r.tbar.pair(probes[p]))});
  write_file(ctx, "product.csv", body);
  write_file(ctx, "summary.csv",
             csv_row({"product", "s_target", "m", "landing"}) +
                 csv_row({r.tbar.id(), num(req.target()), std::to_string(r.m), r.landing ? "1" : "0"}));
  write_file(ctx, "report.json", json::parse(r.to_json()).dump(2) + "\n");
}

json error_record(const std::string& kind, const std::string& message) {
  return json{{"status", "error"}, {"kind", kind}, {"message", message}};
}

int fail(const Context& ctx, int code, const json& rec) {
  std::cerr << rec.dump() << "\n";
  std::error_code ec;
  if (!ctx.out.empty() && fs::is_directory(ctx.out, ec)) {
    std::ofstream f(ctx.out / "error.json");
    f << rec.dump(2) << "\n";
  }
  return code;
}

int run(const std::string& path, const std::string& out_flag, int threads, bool verbose) {
  Context ctx;
  ctx.threads = threads;
  ctx.verbose = verbose;
  json cfg;
  try {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    try {
      cfg = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("parse error: ") + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config: expected an object");
    std::string out = out_flag;
    if (out.empty()) out = cfg.contains("out") ? get_str(cfg["out"], "out") : "out";
    ctx.out = out;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out + "'");
    if (threads < 1) throw ConfigError("--threads must be >= 1");
    const std::string kind = get_str(need(cfg, "experiment", "config"), "experiment");
    if (kind == "degree")
      run_degree(cfg, ctx);
    else if (kind == "extension")
      run_extension(cfg, ctx);
    else if (kind == "wf")
      run_wf(cfg, ctx);
    else if (kind == "conjugation")
      run_conjugation(cfg, ctx);
    else if (kind == "ambiguity")
      run_ambiguity(cfg, ctx);
    else if (kind == "product")
      run_product(cfg, ctx);
    else
      throw ConfigError("experiment: unknown kind '" + kind + "'");
  } catch (const ConfigError& e) {
    return fail(ctx, kConfigError, error_record("config", e.what()));
  } catch (const json::exception& e) {
    return fail(ctx, kConfigError, error_record("config", e.what()));
  } catch (const TransversalityError& e) {
    json rec = error_record("transversality", e.what());
    rec["point"] = std::vector<double>(e.violation.point.begin(), e.violation.point.end());
    rec["direction"] = std::vector<double>(e.violation.direction.begin(), e.violation.direction.end());
    return fail(ctx, kNumericError, rec);
  } catch (const DomainError& e) {
    return fail(ctx, kConfigError, error_record("domain", e.what()));
  } catch (const std::exception& e) {
    return fail(ctx, kNumericError, error_record("numeric", e.what()));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalext: extension of distributions across a subspace"};
  app.require_subcommand(1);
  std::string config, out;
  int threads = 1;
  bool verbose = false;
  CLI::App* r = app.add_subcommand("run", "run one experiment from a JSON config");
  r->add_option("config", config, "experiment config")->required();
  r->add_option("--out", out, "output directory (overrides the config)");
  r->add_option("--threads", threads, "worker threads");
  r->add_flag("--verbose", verbose, "progress on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }
  return run(config, out, threads, verbose);
}
