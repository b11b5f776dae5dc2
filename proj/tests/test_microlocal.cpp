#include <doctest.h>

#include <json.hpp>

#include "scalext/extension.hpp"
#include "scalext/microlocal.hpp"
#include "scalext/models.hpp"

using namespace scalext;

namespace {

Covector cv(std::initializer_list<double> v) {
  Covector c{};
  int i = 0;
  for (double x : v) c[i++] = x;
  return c;
}

Point pt(std::initializer_list<double> v) {
  Point p{};
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// directions every `step` degrees on the unit circle
std::vector<Covector> circle(double step) {
  std::vector<Covector> out;
  for (double a = 0.0; a < 360.0 - 1e-9; a += step) out.push_back(cv({std::cos(a * kDegree), std::sin(a * kDegree)}));
  return out;
}

// h arbitrary (h ≠ 0), only η directions: lands in N*(I)
Cone eta_cone_off_I(Dims dims, const Box& box) {
  std::vector<Covector> eta;
  for (int j = 0; j < dims.d; ++j) {
    Covector e{};
    e[dims.n + j] = 1.0;
    eta.push_back(e);
  }
  return Cone(dims, {{base_everywhere(dims, box, true), DirectionSet::subspace(eta, dims.total())}});
}

}  // namespace

TEST_CASE("conormal bundle membership") {
  const Dims dm{1, 1};
  const Cone n = conormal_I(dm, ChartRegion::standard(1, 1).full_box());
  CHECK(n.contains(pt({0.3, 0.0}), cv({0, 1})));
  CHECK(n.contains(pt({0.3, 0.0}), cv({0, -2})));
  CHECK_FALSE(n.contains(pt({0.0, 0.0}), cv({1, 0})));
  CHECK_FALSE(n.contains(pt({0.0, 0.1}), cv({0, 1})));
}

TEST_CASE("scaling stability") {
  const Dims dm{1, 1};
  const Box box = ChartRegion::standard(1, 1).full_box();
  CHECK(check_scaling_stable(conormal_I(dm, box), box));
  CHECK(check_scaling_stable(full_cone(dm, box), box));
  const Cone fixed(dm, {{base_everywhere(dm, box), DirectionSet::cap(cv({1, 1}), 0.0, 2)}});
  CHECK_FALSE(check_scaling_stable(fixed, box));
  CHECK(check_scaling_stable(eta_cone_off_I(dm, box), box));
}

TEST_CASE("xi projection") {
  const Dims dm{2, 1};
  const Box box = ChartRegion::standard(2, 1).full_box();
  const Cone xi = xi_projection(conormal_hyperplane_x(dm, box, 0), 0.5, 1.0);
  REQUIRE_FALSE(xi.is_empty());
  CHECK(xi.contains(pt({0, 0.3, 0}), cv({1, 0, 1})));
  CHECK(xi.contains(pt({0, -0.7, 0}), cv({-1, 0, 0.2})));
  CHECK_FALSE(xi.contains(pt({0.2, 0.3, 0}), cv({1, 0, 1})));
  CHECK_FALSE(xi.contains(pt({0, 0.3, 0.5}), cv({1, 0, 1})));
  CHECK_FALSE(xi.contains(pt({0, 0.3, 0}), cv({0, 1, 0})));
  CHECK(xi_projection(conormal_I(dm, box), 0.5, 1.0).is_empty());
  CHECK(xi_projection(eta_cone_off_I(dm, box), 0.5, 1.0).is_empty());
  // an η-dominant cap over the shell never reaches η = 0
  const Cone tilted(dm, {{base_everywhere(dm, box, true), DirectionSet::cap(cv({0.2, 0, 1}), 0.05, 3)}});
  CHECK(xi_projection(tilted, 0.5, 1.0).is_empty());
}

TEST_CASE("conormal landing") {
  const Dims dm{2, 1};
  const Box box = ChartRegion::standard(2, 1).full_box();
  CHECK(check_landing(eta_cone_off_I(dm, box)));
  BaseRegion off = base_everywhere(dm, box, true);
  for (int i = 0; i < 2; ++i) off.box.iv[i] = {i == 0 ? 0.0 : -1.0, i == 0 ? 0.0 : 1.0};
  const Cone hyper_off_I(dm, {{off, DirectionSet::subspace({cv({1, 0, 0})}, 3)}});
  CHECK_FALSE(check_landing(hyper_off_I));
  BaseRegion far = base_everywhere(dm, box);
  far.rmin = 0.3;
  CHECK(check_landing(Cone(dm, {{far, DirectionSet::full(3)}})));
  // landing cones have no (ξ, 0) shell directions, so Ξ is empty
  CHECK(xi_projection(eta_cone_off_I(dm, box), 0.5, 1.0).is_empty());
}

TEST_CASE("cone sums, unions and transversality") {
  const Dims dm{2, 1};
  const Box box = ChartRegion::standard(2, 1).full_box();
  const Cone nI = conormal_I(dm, box), nx = conormal_hyperplane_x(dm, box, 0);
  const Cone ss = cone_sum(nI, nI);
  CHECK(ss.contains(pt({0.1, 0.2, 0}), cv({0, 0, 1})));
  CHECK_FALSE(ss.contains(pt({0.1, 0.2, 0}), cv({1, 0, 1})));
  CHECK_FALSE(ss.contains(pt({0.1, 0.2, 0.3}), cv({0, 0, 1})));
  const Cone sx = cone_sum(nx, nI);
  CHECK(sx.contains(pt({0, 0.2, 0}), cv({1, 0, 1})));
  CHECK(sx.contains(pt({0, 0.2, 0}), cv({-1, 0, 0.3})));
  CHECK_FALSE(sx.contains(pt({0.3, 0.2, 0}), cv({1, 0, 1})));
  CHECK_FALSE(sx.contains(pt({0, 0.2, 0.4}), cv({1, 0, 1})));
  CHECK_FALSE(sx.contains(pt({0, 0.2, 0}), cv({0, 1, 0})));
  CHECK_FALSE(check_transverse(nI, nI));
  CHECK(check_transverse(eta_cone_off_I(dm, box), Cone(dm)));
  const auto v = find_transversality_violation(nI, nI);
  REQUIRE(v.has_value());
  CHECK(h_norm(v->point, dm) == doctest::Approx(0.0));

  // union has set semantics on sample points
  const Cone u1 = cone_union(nI, nx), u2 = cone_union(nx, nI), uu = cone_union(u1, u1);
  const Cone a = cone_union(cone_union(nI, nx), sx), b = cone_union(nI, cone_union(nx, sx));
  for (const auto& p : {pt({0, 0.2, 0}), pt({0.3, 0.2, 0}), pt({0, 0.2, 0.4})})
    for (const auto& w : {cv({1, 0, 0}), cv({0, 0, 1}), cv({1, 0, 1}), cv({0, 1, 0})}) {
      CHECK(u1.contains(p, w) == u2.contains(p, w));
      CHECK(uu.contains(p, w) == u1.contains(p, w));
      CHECK(a.contains(p, w) == b.contains(p, w));
    }
  CHECK(nlohmann::json::parse(sx.to_json()).is_object());
}

TEST_CASE("oscillatory probes reproduce the windowed exponential") {
  const Dims dm{1, 1};
  const Window win{};
  const Point p = pt({0.1, -0.05});
  const Covector w = cv({0.6, 0.8});
  const double k = 20.0;
  const auto [re, im] = oscillatory_probe(dm, p, w, k, win);
  const auto [env, zero] = oscillatory_probe(dm, p, w, 0.0, win);
  CHECK(zero.is_zero());
  for (const auto& q : {pt({0.1, -0.05}), pt({0.2, 0.0}), pt({0.02, -0.13})}) {
    const double ph = k * (0.6 * q[0] + 0.8 * q[1]);
    CHECK(re(q) == doctest::Approx(env(q) * std::cos(ph)).epsilon(1e-12));
    CHECK(im(q) == doctest::Approx(-env(q) * std::sin(ph)).epsilon(1e-12));
  }
  CHECK(env(pt({0.35, -0.05})) == 0.0);
}

TEST_CASE("decay fit") {
  const std::vector<double> k = default_k_grid();
  std::vector<double> a, flat, fast;
  for (double v : k) {
    a.push_back(std::pow(v, -1.5));
    flat.push_back(0.3);
    fast.push_back(std::exp(-v / 4));
  }
  CHECK(fit_decay(k, a, 1.0, 1e-8) == doctest::Approx(1.5));
  CHECK(fit_decay(k, flat, 0.3, 1e-8) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit_decay(k, fast, 1.0, 1e-8) > 3.0);
  CHECK(fit_decay(k, flat, 0.0, 1e-8) == kRapidDecay);
  CHECK_THROWS_AS(fit_decay({8}, {1}, 1, 1e-8), FitError);
}

TEST_CASE("wave front of delta and smooth models") {
  const auto chart = ChartRegion::standard(1, 1);
  const Box box = chart.full_box();
  ModelParams p;
  const Distribution delta = model("delta_derivative", p, chart);
  const auto rep = wf_estimate(delta, {pt({0, 0})}, {cv({0, 1}), cv({1, 0})});
  REQUIRE(rep.samples.size() == 2);
  CHECK(std::abs(rep.samples[0].decay_exponent) < 0.1);
  CHECK(rep.samples[1].decay_exponent > 3.0);
  CHECK(wf_bound_check(rep, conormal_I({1, 1}, box)));
  CHECK(rep.estimated_cone.contains(pt({0, 0}), cv({0, 1})));
  CHECK_FALSE(rep.estimated_cone.contains(pt({0, 0}), cv({1, 0})));

  // known cone reproduced at most sampled pairs
  std::vector<Point> pts{pt({0, 0}), pt({0.4, 0}), pt({-0.3, 0.5})};
  const auto full = wf_estimate(delta, pts, circle(30));
  const WfAgreement agree = wf_compare(full, conormal_I({1, 1}, box));
  CHECK(agree.samples == 36);
  CHECK(agree.agreement() >= 0.9);
  CHECK(agree.slow == 4);

  p.g = "gauss";
  const auto smooth = wf_estimate(model("smooth", p, chart), pts, circle(45));
  for (const auto& s : smooth.samples) CHECK(s.decay_exponent > 3.0);
  CHECK(smooth.estimated_cone.is_empty());

  const std::string csv = rep.to_csv();
  CHECK(csv.rfind("p0,p1,w0,w1,decay_exponent,slow,ok,amp_k8", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("finite part of 1/|h| is conormal") {
  const auto chart = ChartRegion::standard(1, 1);
  const Box box = chart.full_box();
  ModelParams p;
  p.a = 1.0;
  const Distribution t = model("power_law", p, chart);
  ExtendOptions eo;
  eo.estimate = false;
  const ExtensionResult r = extend(t, -1.0, make_cutoff(), eta_cone_off_I({1, 1}, box), eo);
  CHECK(r.landing);
  WfOptions wo;
  wo.k_grid = {8, 16, 32, 64, 128};
  const auto rep = wf_estimate(r.tbar, {pt({0, 0}), pt({0.3, 0.45})}, circle(45), wo);
  const WfAgreement on = wf_compare(rep, conormal_I({1, 1}, box));
  CHECK(on.slow == 2);
  CHECK(on.agreement() == 1.0);
  CHECK(wf_bound_check(rep, conormal_I({1, 1}, box)));
  CHECK(wf_bound_check(rep, r.wf_bound));
}

TEST_CASE("cube-root factor has slow decay across x1 = 0") {
  const auto chart = ChartRegion::standard(2, 1);
  const Box box = chart.full_box();
  const Dims dm{2, 1};
  const Distribution f = model("nonsmooth_factor", {}, chart);
  const Distribution fb = extension_distribution(f, 0.0, make_cutoff());
  const std::vector<Covector> dirs{cv({1, 0, 0}),  cv({-1, 0, 0}), cv({0, 1, 0}), cv({0, 0, 1}),
                                   cv({1, 0, 1}),  cv({1, 1, 0}),  cv({0, 1, 1}), cv({-1, 0, -1})};
  const auto rep = wf_estimate(fb, {pt({0, 0, 0}), pt({0, 0.3, 0.4}), pt({0.5, 0, 0})}, dirs);
  const Cone nx = conormal_hyperplane_x(dm, box, 0), nI = conormal_I(dm, box);
  const WfAgreement a = wf_compare(rep, nx);
  CHECK(a.samples == 24);
  CHECK(a.slow == 4);
  CHECK(a.agreement() == 1.0);
  CHECK_FALSE(wf_bound_check(rep, nI));
  CHECK(wf_bound_check(rep, cone_union(cone_union(nx, nI), cone_sum(nx, nI))));
}

TEST_CASE("wf estimator errors") {
  const auto chart = ChartRegion::standard(1, 1);
  const Distribution delta = model("delta_derivative", {}, chart);
  WfOptions bad;
  bad.k_grid = {16, 8};
  CHECK_THROWS_AS(wf_estimate(delta, {pt({0, 0})}, {cv({0, 1})}, bad), DomainError);
  CHECK_THROWS_AS(oscillatory_probe({1, 1}, pt({0, 0}), cv({0, 1}), 8, {0.0, 5.0}), DomainError);
  // a window leaving the chart is reported per sample
  const auto rep = wf_estimate(delta, {pt({0.95, 0})}, {cv({0, 1})});
  CHECK_FALSE(rep.samples[0].ok);
  CHECK_FALSE(rep.samples[0].error.empty());
  CHECK(rep.estimated_cone.is_empty());
}
