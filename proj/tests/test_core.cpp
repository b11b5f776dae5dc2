#include <random>

#include "doctest.h"
#include "scalext/cutoff.hpp"
#include "scalext/jet.hpp"
#include "scalext/quadrature.hpp"
#include "scalext/test_function.hpp"

using namespace scalext;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p{};
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

double bump1(double u) { return std::abs(u) < 1 ? std::exp(1.0 - 1.0 / (1 - u * u)) : 0.0; }

}  // namespace

TEST_CASE("jet arithmetic agrees with finite differences") {
  // f(u,v) = exp(u v) / (1 + u^2) + sqrt(2 + v) cos(u)
  auto f = [](double u, double v) { return std::exp(u * v) / (1 + u * u) + std::sqrt(2 + v) * std::cos(u); };
  double u0 = 0.3, v0 = -0.4;
  Jet U = Jet::variable(2, 3, 0, u0), V = Jet::variable(2, 3, 1, v0);
  Jet F = exp(U * V) * reciprocal(U * U + 1.0) + sqrt(V + 2.0) * cos(U);
  CHECK(F.value() == doctest::Approx(f(u0, v0)).epsilon(1e-14));
  const double e = 1e-4;
  double fu = (f(u0 + e, v0) - f(u0 - e, v0)) / (2 * e);
  double fuv = (f(u0 + e, v0 + e) - f(u0 + e, v0 - e) - f(u0 - e, v0 + e) + f(u0 - e, v0 - e)) / (4 * e * e);
  double fvv = (f(u0, v0 + e) - 2 * f(u0, v0) + f(u0, v0 - e)) / (e * e);
  CHECK(F.derivative({1, 0}) == doctest::Approx(fu).epsilon(1e-7));
  CHECK(F.derivative({1, 1}) == doctest::Approx(fuv).epsilon(1e-6));
  CHECK(F.derivative({0, 2}) == doctest::Approx(fvv).epsilon(1e-6));
  Jet S = sin(U);
  CHECK(S.derivative({3, 0}) == doctest::Approx(-std::cos(u0)).epsilon(1e-14));
  Jet L = log(U + 2.0);
  CHECK(L.derivative({2, 0}) == doctest::Approx(-1.0 / ((u0 + 2) * (u0 + 2))).epsilon(1e-14));
}

TEST_CASE("gauss-legendre rule is exact for high-degree polynomials") {
  const GaussRule& g = gauss_legendre_32();
  REQUIRE(g.x.size() == 32);
  double s = 0.0, s63 = 0.0;
  for (size_t i = 0; i < g.x.size(); ++i) {
    s += g.w[i];
    s63 += g.w[i] * std::pow(g.x[i], 63);
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s63 == doctest::Approx(1.0 / 64).epsilon(1e-13));
}

TEST_CASE("adaptive quadrature and singular shells") {
  QuadOptions opt;
  EvalBudget b(opt.max_evals);
  auto r = integrate([](double x) { return std::exp(-x * x); }, -2, 2, opt, b);
  CHECK(r.value == doctest::Approx(std::sqrt(M_PI) * std::erf(2.0)).epsilon(1e-12));
  auto s = integrate_to_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opt, b);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-9));
  auto s2 = integrate_to_singular([](double x) { return std::pow(std::abs(x), -0.5); }, 0.0, -1.0, opt, b);
  CHECK(s2.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_THROWS_AS(integrate_to_singular([](double x) { return 1.0 / x; }, 0.0, 1.0, opt, b), QuadratureError);
  EvalBudget tiny(100);
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(1000 * x); }, 0, 10, opt, tiny), QuadratureError);
}

TEST_CASE("make_bump: peak, boundary, seminorm") {
  Dims dims{0, 1};
  TestFunction b = make_bump(dims, {0.0}, {1.0});
  CHECK(b(pt({0.0})) == doctest::Approx(1.0));
  CHECK(b(pt({1.0})) == 0.0);
  CHECK(b(pt({0.5})) > 0.0);
  Box K;
  K.dim = 1;
  K.iv[0] = {-1, 1};
  CHECK(seminorm(b, 0, K) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(make_bump(dims, {0.0}, {0.0}), DomainError);
  CHECK_THROWS_AS(make_bump(dims, {0.0}, {-1.0}), DomainError);
  // deriv(0) = eval
  TestFunction b2 = make_bump(Dims{1, 1}, {0.1, 0.2}, {0.7, 0.5});
  Point p = pt({0.3, 0.1});
  CHECK(b2.deriv({0, 0}, p) == b2(p));
  CHECK(b2(pt({0.9, 0.1})) == 0.0);
}

TEST_CASE("scale_testfn") {
  Dims dims{1, 1};
  TestFunction phi = make_bump(dims, {0.0, 0.1}, {0.8, 0.6});
  TestFunction same = scale_testfn(phi, 1.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  for (int i = 0; i < 10; ++i) {
    Point p = pt({U(rng), U(rng)});
    CHECK(same(p) == phi(p));
  }
  // φ(h) = h on the interior of a wide plateau
  TestFunction lin = TestFunction::separable(Dims{0, 1}, {}, product(Block::monomial(1, {1}), Block::radial_chi(1, 0.5, 0.9, "exp")));
  CHECK(scale_testfn(lin, 0.5)(pt({0.3})) == doctest::Approx(0.15).epsilon(1e-15));
  // ∂_h φ_λ = λ (∂_h φ)(x, λh), against central differences
  double lam = 0.37;
  TestFunction sl = scale_testfn(phi, lam);
  for (int i = 0; i < 10; ++i) {
    Point p = pt({U(rng), U(rng)});
    double e = 1e-5;
    Point a = p, b = p;
    a[1] += e;
    b[1] -= e;
    double fd = (sl(a) - sl(b)) / (2 * e);
    Point q = p;
    q[1] *= lam;
    CHECK(sl.deriv({0, 1}, p) == doctest::Approx(lam * phi.deriv({0, 1}, q)).epsilon(1e-12));
    CHECK(sl.deriv({0, 1}, p) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
  CHECK_THROWS_AS(scale_testfn(phi, 0.0), DomainError);
  CHECK_THROWS_AS(scale_testfn(phi, -0.5), DomainError);
  // (φ_λ)_μ = φ_{λμ}
  TestFunction c1 = scale_testfn(scale_testfn(phi, 0.5), 0.3), c2 = scale_testfn(phi, 0.15);
  for (int i = 0; i < 10; ++i) {
    Point p = pt({U(rng), U(rng)});
    CHECK(c1(p) == doctest::Approx(c2(p)).epsilon(1e-14));
  }
}

TEST_CASE("seminorm against a dense-grid brute force") {
  TestFunction phi = TestFunction::separable(Dims{0, 1}, {}, product(Block::cosine({1.0}, -M_PI / 2), Block::bump({0.0}, {1.0})));
  Box K;
  K.dim = 1;
  K.iv[0] = {-1, 1};
  double s1 = seminorm(phi, 1, K);
  double brute = 0.0;
  const int N = 400001;
  for (int i = 0; i < N; ++i) {
    double h = -1 + 2.0 * i / (N - 1);
    if (std::abs(h) >= 1) continue;
    double B = bump1(h), dB = B * (-2 * h / ((1 - h * h) * (1 - h * h)));
    brute = std::max({brute, std::abs(std::sin(h) * B), std::abs(std::cos(h) * B + std::sin(h) * dB)});
  }
  CHECK(std::abs(s1 - brute) < 1e-6);
  double s0 = seminorm(phi, 0, K), s2 = seminorm(phi, 2, K);
  CHECK(s0 <= s1);
  CHECK(s1 <= s2);
  CHECK(seminorm(TestFunction(Dims{0, 1}), 2, K) == 0.0);
  CHECK_THROWS_AS(seminorm(phi, 7, K), DomainError);
}

TEST_CASE("taylor polynomial") {
  Dims dims{1, 1};
  Block loc = Block::radial_chi(1, 0.5, 0.9, "exp");
  TestFunction h2 = TestFunction::separable(dims, {Block::constant(1, 1.0)}, product(Block::monomial(1, {2}), loc));
  TestFunction P1 = taylor_poly(h2, 1);
  CHECK(P1(pt({0.2, 0.3})) == 0.0);
  TestFunction c = TestFunction::separable(dims, {Block::constant(1, 1.0)}, product(Block::constant(1, 2.5), loc));
  CHECK(taylor_poly(c, 0)(pt({0.2, 0.1})) == doctest::Approx(2.5));
  // φ = x h + h^3, P_2 φ = x h
  TestFunction phi = TestFunction::separable(dims, {Block::monomial(1, {1})}, product(Block::monomial(1, {1}), loc)) +
                     TestFunction::separable(dims, {Block::constant(1, 1.0)}, product(Block::monomial(1, {3}), loc));
  TestFunction P2 = taylor_poly(phi, 2);
  for (double x : {-0.5, 0.1, 0.7})
    for (double h : {-0.4, -0.1, 0.2, 0.45}) CHECK(P2(pt({x, h})) == doctest::Approx(x * h).epsilon(1e-13));
  TestFunction limited(dims, 2);
  limited += phi;
  CHECK_THROWS_AS(taylor_poly(limited, 2), DomainError);
}

TEST_CASE("taylor remainder: flat functions, exact cases, identity") {
  Dims dims{0, 1};
  Block loc = Block::radial_chi(1, 0.5, 0.9, "exp");
  TestFunction h2 = TestFunction::separable(dims, {}, product(Block::monomial(1, {2}), loc));
  TestFunction I1 = taylor_remainder(h2, 1);
  for (double h : {-0.3, 0.01, 0.2}) CHECK(I1(pt({h})) == doctest::Approx(h * h).epsilon(1e-13));
  TestFunction h3 = TestFunction::separable(dims, {}, product(Block::monomial(1, {3}), Block::bump({0.0}, {0.8})));
  TestFunction I1b = taylor_remainder(h3, 1);
  for (double h : {-0.05, 0.02, 0.07}) CHECK(I1b(pt({h})) == doctest::Approx(h3(pt({h}))).epsilon(1e-12));

  // random smooth functions in n = 1, d = 2
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  Dims d2{1, 2};
  for (int trial = 0; trial < 3; ++trial) {
    double w1 = 2 * U(rng), w2 = 2 * U(rng), c1 = 0.2 * U(rng);
    TestFunction phi = TestFunction::separable(
        d2, {Block::bump({0.0}, {0.9})},
        product(product(Block::cosine({w1, w2}, U(rng)), Block::gaussian({c1, 0.1}, {0.6, 0.5})), Block::bump({0.0, 0.0}, {0.9, 0.9})));
    for (int m = 0; m <= 2; ++m) {
      TestFunction Im = taylor_remainder(phi, m);
      TestFunction Pm = taylor_poly(phi, m);
      for (int i = 0; i < 20; ++i) {
        Point p = pt({0.8 * U(rng), 0.1 * U(rng), 0.1 * U(rng)});
        CHECK(std::abs(Im(p) + Pm(p) - phi(p)) < 1e-9);
      }
    }
  }
  // d = 1 points in both evaluation regimes
  TestFunction osc = TestFunction::separable(dims, {}, product(Block::cosine({3.0}, 0.4), Block::bump({0.05}, {0.6})));
  for (int m = 0; m <= 2; ++m) {
    TestFunction Im = taylor_remainder(osc, m), Pm = taylor_poly(osc, m);
    for (int i = 0; i < 20; ++i) {
      Point p = pt({0.6 * U(rng)});
      CHECK(std::abs(Im(p) + Pm(p) - osc(p)) < 1e-9);
    }
  }
}

TEST_CASE("cutoff and psi") {
  for (const char* prof : {"exp", "exp2"}) {
    Cutoff chi = make_cutoff(0.5, 1.0, prof);
    PsiFunction psi = psi_of(chi);
    Dims dims{1, 1};
    CHECK(chi.chi(pt({0.3, 0.25}), dims) == 1.0);
    CHECK(chi.chi(pt({0.3, -1.2}), dims) == 0.0);
    CHECK(psi.psi(pt({0.0, 2.0}), dims) == 0.0);
    CHECK(psi.psi(pt({0.0, 0.2}), dims) == 0.0);
    for (double h = 0.0; h <= 1.2; h += 0.01) {
      double c = chi.chi(pt({0.0, h}), dims);
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      double e = 1e-6;
      double dchi = (chi.chi(pt({0.0, h + e}), dims) - chi.chi(pt({0.0, h - e}), dims)) / (2 * e);
      CHECK(psi.psi(pt({0.0, h}), dims) == doctest::Approx(-h * dchi).epsilon(1e-6).scale(1.0));
    }
    // d = 2: ψ = −h·∇χ
    Dims d2{0, 2};
    Block cb = chi.chi_block(2), pb = psi.block(2);
    std::array<double, 2> h{0.45, 0.42};
    Jet j = cb.jet(std::span<const double>(h.data(), 2), 1);
    double expect = -(h[0] * j.derivative({1, 0}) + h[1] * j.derivative({0, 1}));
    CHECK(pb(std::span<const double>(h.data(), 2)) == doctest::Approx(expect).epsilon(1e-12));
    (void)d2;
  }
  CHECK_THROWS_AS(make_cutoff(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(make_cutoff(0.5, 0.5), DomainError);
  CHECK_THROWS_AS(make_cutoff(0.5, 1.0, "linear"), DomainError);
}

TEST_CASE("partition of unity identity") {
  std::mt19937 rng(3);
  for (const char* prof : {"exp", "exp2"}) {
    Cutoff chi = make_cutoff(0.5, 1.0, prof);
    for (int d : {1, 2}) {
      Dims dims{1, d};
      for (double Lambda : {10.0, 100.0, 1000.0}) {
        std::uniform_real_distribution<double> R(std::log(chi.a() / Lambda * 2), std::log(2 * chi.b()));
        std::uniform_real_distribution<double> U(-1, 1);
        for (int i = 0; i < 50; ++i) {
          double r = std::exp(R(rng));
          Point p{};
          p[0] = U(rng);
          if (d == 1) {
            p[1] = (U(rng) < 0 ? -r : r);
          } else {
            double th = M_PI * U(rng);
            p[1] = r * std::cos(th);
            p[2] = r * std::sin(th);
          }
          Point q = p;
          for (int j = 0; j < d; ++j) q[1 + j] *= Lambda;
          double expect = chi.chi(p, dims) - chi.chi(q, dims);
          CHECK(std::abs(partition_integral(chi, Lambda, p, dims) - expect) < 1e-8);
        }
      }
    }
  }
}
