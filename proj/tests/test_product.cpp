#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "scalext/ambiguity.hpp"
#include "scalext/models.hpp"
#include "scalext/renorm_product.hpp"

using namespace scalext;

namespace {

Distribution power(const ChartRegion& chart, double a, const std::string& name = "power_law") {
  ModelParams p;
  p.a = a;
  return model(name, p, chart);
}

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

double bump1(double x, double c, double r) {
  const double u = (x - c) / r;
  return std::abs(u) >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double step_exp(double tau) {
  if (tau <= 0.0) return 1.0;
  if (tau >= 1.0) return 0.0;
  auto f = [](double t) { return std::exp(-1.0 / t); };
  return f(1.0 - tau) / (f(1.0 - tau) + f(tau));
}

TestFunction bump(Dims dims, std::vector<double> c, std::vector<double> r) { return make_bump(dims, c, r); }

ExtendOptions no_estimate() {
  ExtendOptions o;
  o.estimate = false;
  return o;
}

ProductRequest request(const Distribution& u1, const Distribution& u2, double s1, double s2) {
  ProductRequest r;
  r.u1 = u1;
  r.u2 = u2;
  r.s1 = s1;
  r.s2 = s2;
  r.g1 = Cone(u1.dims());
  r.g2 = Cone(u2.dims());
  return r;
}

}  // namespace

TEST_CASE("pointwise product of power kernels") {
  const auto chart = ChartRegion::standard(1, 1);
  const auto u = power(chart, 0.4);
  const Cone none(chart.dims);
  const Distribution p = hormander_product(u, u, none, none);
  REQUIRE(p.kernel());
  for (double h : {-0.9, -0.3, 0.01, 0.2, 0.77}) {
    Point q{};
    q[0] = 0.1;
    q[1] = h;
    CHECK(p.kernel()->full(q) == doctest::Approx(std::pow(std::abs(h), -0.8)).epsilon(1e-14));
  }
  REQUIRE(p.meta_degree);
  CHECK(*p.meta_degree == doctest::Approx(-0.8));
  REQUIRE(p.meta_cone);
  CHECK(p.meta_cone->is_empty());

  // off I the product pairs like the closed-form kernel
  const auto phi = bump(chart.dims, {0.1, 0.5}, {0.3, 0.2});
  const double xm = gk([](double x) { return bump1(x, 0.1, 0.3); }, -0.2, 0.4);
  const double hm = gk([](double h) { return bump1(h, 0.5, 0.2) * std::pow(h, -0.8); }, 0.3, 0.7);
  CHECK(p.pair(phi) == doctest::Approx(xm * hm).epsilon(1e-9));
}

TEST_CASE("one-sided powers multiply") {
  const auto chart = ChartRegion::standard(0, 1);
  const Cone none(chart.dims);
  const Distribution p =
      hormander_product(power(chart, 0.3, "one_sided"), power(chart, 0.5, "one_sided"), none, none);
  for (double h : {-0.6, -0.01, 0.02, 0.4, 0.9}) {
    Point q{};
    q[0] = h;
    CHECK(p.kernel()->full(q) == doctest::Approx(h > 0 ? std::pow(h, -0.8) : 0.0).epsilon(1e-14));
  }
}

TEST_CASE("delta times delta is refused") {
  const auto chart = ChartRegion::standard(1, 1);
  const auto d = model("delta_derivative", {}, chart);
  const Cone n = conormal_I(chart.dims, chart.full_box());
  try {
    (void)hormander_product(d, d, n, n);
    FAIL("expected a refusal");
  } catch (const TransversalityError& e) {
    CHECK(std::abs(e.violation.point[1]) < 1e-12);
    CHECK(std::abs(e.violation.direction[0]) < 1e-9);
    CHECK(std::abs(std::abs(e.violation.direction[1]) - 1.0) < 1e-9);
  }
  // transverse but without kernels
  CHECK_THROWS_AS(hormander_product(d, d, Cone(chart.dims), Cone(chart.dims)), DomainError);
  // N*(I) is transverse to N*({x1 = 0}) off the diagonal directions
  const Cone nx = conormal_hyperplane_x(chart.dims, chart.full_box(), 0);
  CHECK(check_transverse(n, nx));
  const Cone g = product_cone(n, nx);
  Point o{};
  Covector w{};
  w[0] = w[1] = M_SQRT1_2;
  CHECK(g.contains(o, w, 1e-9));
}

TEST_CASE("renormalized square of |h|^-0.4") {
  const auto chart = ChartRegion::standard(1, 1);
  const auto u = power(chart, 0.4);
  const ExtensionResult r = renormalize_product(request(u, u, -0.4, -0.4), make_cutoff(), no_estimate());
  CHECK(r.s_in == doctest::Approx(-0.81));
  CHECK(r.landing);
  const ExtensionResult direct = extend(power(chart, 0.8), -0.85, make_cutoff(0.25, 0.75, "exp2"), {}, no_estimate());
  auto req = request(u, u, -0.4, -0.4);
  req.s_target = -0.85;
  const ExtensionResult r85 = renormalize_product(req, make_cutoff(), no_estimate());
  for (const auto& phi : {bump(chart.dims, {0.0, 0.0}, {0.5, 0.6}), bump(chart.dims, {0.2, 0.1}, {0.4, 0.3})}) {
    const double a = r.tbar.pair(phi), b = r85.tbar.pair(phi), c = direct.tbar.pair(phi);
    CHECK(std::abs(a - c) < 1e-6);
    CHECK(std::abs(b - c) < 1e-6);
  }
  // independent oracle: ∫ bump_x · 2∫_0^r h^{-0.8} bump_h, with h = v^5 removing the singularity
  const auto phi = bump(chart.dims, {0.0, 0.0}, {0.5, 0.6});
  const double xm = gk([](double x) { return bump1(x, 0.0, 0.5); }, -0.5, 0.5);
  const double hm = 2.0 * gk([](double v) { return 5.0 * bump1(std::pow(v, 5), 0.0, 0.6); }, 0.0, std::pow(0.6, 0.2));
  CHECK(std::abs(r.tbar.pair(phi) - xm * hm) < 1e-6);
  // the bound is Γ ∪ N*(I) with Γ empty
  Point o{};
  Covector eta{}, xi{};
  eta[1] = 1.0;
  xi[0] = 1.0;
  CHECK(r.wf_bound.contains(o, eta, 1e-9));
  CHECK_FALSE(r.wf_bound.contains(o, xi, 1e-3));
}

TEST_CASE("restriction, symmetry and the unit factor") {
  const auto chart = ChartRegion::standard(1, 1);
  const auto u1 = power(chart, 0.3), u2 = power(chart, 0.5);
  const Cone none(chart.dims);
  const ExtensionResult r12 = renormalize_product(request(u1, u2, -0.3, -0.5), make_cutoff(), no_estimate());
  const ExtensionResult r21 = renormalize_product(request(u2, u1, -0.5, -0.3), make_cutoff(), no_estimate());
  const Distribution off = hormander_product(u1, u2, none, none);
  for (const auto& phi : {bump(chart.dims, {0.1, 0.6}, {0.3, 0.3}), bump(chart.dims, {-0.2, -0.4}, {0.5, 0.35})})
    CHECK(std::abs(r12.tbar.pair(phi) - off.pair(phi)) < 1e-6);
  const auto phi0 = bump(chart.dims, {0.0, 0.05}, {0.6, 0.5});
  CHECK(std::abs(r12.tbar.pair(phi0) - r21.tbar.pair(phi0)) < 1e-9);

  const auto one = model("smooth", {}, chart);
  auto req = request(u2, one, -0.5, 0.0);
  req.s_target = -0.6;
  const ExtensionResult ru = renormalize_product(req, make_cutoff(), no_estimate());
  const ExtensionResult e = extend(u2, -0.6, make_cutoff(), {}, no_estimate());
  CHECK(std::abs(ru.tbar.pair(phi0) - e.tbar.pair(phi0)) < 1e-7);
}

TEST_CASE("square of |h|^-0.6 is fixed up to a delta counterterm") {
  const auto chart = ChartRegion::standard(1, 1);
  const auto u = power(chart, 0.6);
  auto req = request(u, u, -0.6, -0.6);
  req.s_target = -1.25;
  const Cutoff c1 = make_cutoff(0.5, 1.0, "exp"), c2 = make_cutoff(0.25, 0.75, "exp");
  const ExtensionResult r1 = renormalize_product(req, c1, no_estimate());
  const ExtensionResult r2 = renormalize_product(req, c2, no_estimate());
  CHECK(r1.m == 0);
  Point x0{}, x1{};
  x1[0] = 0.3;
  const Decomposition dd = decompose_difference(r1, r2, 0, {x0, x1});
  CHECK_FALSE(dd.equal);
  CHECK(dd.residual < 1e-6);
  const double oracle = 2.0 * gk(
                                  [](double r) {
                                    return (step_exp((r - 0.25) / 0.5) - step_exp((r - 0.5) / 0.5)) * std::pow(r, -1.2);
                                  },
                                  0.25, 1.0);
  for (double c : dd.counterterm.terms[0].coeff) CHECK(std::abs(c - oracle) < 1e-6);
}

TEST_CASE("degree of the renormalized product") {
  const auto chart = ChartRegion::standard(0, 1);
  const auto u = power(chart, 0.4);
  const ExtensionResult r = renormalize_product(request(u, u, -0.4, -0.4), make_cutoff());
  REQUIRE(r.report);
  CHECK(r.s_out >= -0.9);
}

TEST_CASE("product request errors") {
  const auto chart = ChartRegion::standard(1, 1);
  const auto u = power(chart, 0.4);
  auto req = request(u, u, -0.4, -0.4);
  req.s_target = -0.8;
  CHECK_THROWS_AS(renormalize_product(req, make_cutoff(), no_estimate()), DomainError);
  req.s_target.reset();
  req.g1 = conormal_hyperplane_x(chart.dims, chart.full_box(), 0);
  CHECK_THROWS_AS(renormalize_product(req, make_cutoff(), no_estimate()), DomainError);
  const auto other = power(ChartRegion::standard(0, 1), 0.4);
  CHECK_THROWS_AS(hormander_product(u, other, Cone(chart.dims), Cone(chart.dims)), DomainError);
}
