#include "scalext/extension.hpp"

#include <json.hpp>
#include <sstream>

namespace scalext {

namespace {

constexpr double kBand = 1e-9;
// longest log-radius span paired at once
constexpr double kMaxChunk = 4.0;
// log-radius margin past the support scale of φ before growth counts as divergence
constexpr double kGrowthMargin = 3.0;

// radial extent of the h-support of φ: [r_lo, r_hi]
std::pair<double, double> h_radii(const TestFunction& phi) {
  const int d = phi.dims().d;
  double lo = kInf, hi = 0.0;
  for (const auto& t : phi.terms()) {
    const BlockSupport s = t.h.support();
    const Box b = s.bounding_box();
    if (b.empty()) continue;
    double near = 0.0, far = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = std::clamp(0.0, b.iv[j].lo, b.iv[j].hi);
      near += c * c;
      const double f = std::max(std::abs(b.iv[j].lo), std::abs(b.iv[j].hi));
      far += f * f;
    }
    lo = std::min(lo, std::max(std::sqrt(near), s.rmin));
    hi = std::max(hi, std::min(std::sqrt(far), s.rmax));
  }
  return {lo, hi};
}

// ∫_{lo}^{hi} ψ(h e^u) du = χ(h e^{lo}) − χ(h e^{hi}), supported in a e^{-hi} ≤ |h| ≤ b e^{-lo}
Block shell_weight(const Cutoff& chi, int d, double lo, double hi) {
  const Block c = chi.chi_block(d);
  const Block cc = Block::radial_chi_complement(d, chi.a(), chi.b(), chi.profile());
  const double e1 = std::exp(lo), e2 = std::exp(hi);
  const Block c1 = scaled(c, e1), c2 = scaled(c, e2), cc1 = scaled(cc, e1), cc2 = scaled(cc, e2);
  BlockSupport sup = BlockSupport::whole(d);
  sup.rmin = chi.a() * std::exp(-hi);
  sup.rmax = chi.b() * std::exp(-lo);
  for (int j = 0; j < d; ++j) sup.box.iv[j] = {-sup.rmax, sup.rmax};
  // where both steps are near 1 the difference of complements avoids cancellation
  auto inner_plateau = [c2](std::span<const double> h) { return c2(h) >= 0.5; };
  return Block::callable(
      d,
      [=](std::span<const double> h) { return inner_plateau(h) ? cc2(h) - cc1(h) : c1(h) - c2(h); },
      [=](std::span<const double> h, int order) {
        return inner_plateau(h) ? cc2.jet(h, order) - cc1.jet(h, order) : c1.jet(h, order) - c2.jet(h, order);
      },
      sup, c2.scale(), "shell[" + std::to_string(lo) + "," + std::to_string(hi) + "]");
}

// `outer_radius` bounds the h-support of the original φ; beyond it I_mφ is O(|h|^{m+1})
double u_integral(const Distribution& t, const TestFunction& base, double rate, const Cutoff& chi,
                  double outer_radius, const ExtensionOptions& opt) {
  const Dims dm = t.dims();
  const auto [r_lo, r_hi] = h_radii(base);
  if (!(r_hi > 0.0) || r_lo > r_hi) return 0.0;
  auto chunk_value = [&](double lo, double hi) {
    return t.pair(multiply_h(base, shell_weight(chi, dm.d, lo, hi)), opt.quad);
  };
  // ψ(h e^u) meets supp φ only for a e^{-u} < r_hi and b e^{-u} > r_lo
  const double u0 = std::max(0.0, std::log(chi.a() / r_hi));
  if (r_lo > 0.0) {
    const double u1 = std::log(chi.b() / r_lo);
    if (!(u1 > u0)) return 0.0;
    return chunk_value(u0, u1);
  }
  // the shell contributions decay like e^{-rate·u}
  double umax = opt.max_u > 0.0 ? opt.max_u : std::min(690.0, u0 + 80.0 / rate + 10.0);
  // shells well inside supp φ, where the density must decay for the right degree
  const double u_check = std::max(u0, std::log(chi.b() / outer_radius)) + kGrowthMargin;
  double total = 0.0, lo = u0, chunk = 1.0, prev_density = 0.0;
  int quiet = 0, growing = 0;
  while (lo < umax) {
    const double hi = std::min(lo + chunk, umax);
    const double v = chunk_value(lo, hi);
    total += v;
    // per-unit-u density; it must eventually decay when s is the right degree
    const double density = std::abs(v) / (hi - lo);
    growing = (lo >= u_check && prev_density > 0.0 && density > 1.05 * prev_density) ? growing + 1 : 0;
    if (growing >= 3) throw QuadratureError("extension: shell contributions grow; is the degree s correct?");
    prev_density = density;
    quiet = (std::abs(v) <= opt.rel_stop * std::abs(total) || (total == 0.0 && v == 0.0)) ? quiet + 1 : 0;
    lo = hi;
    if (quiet >= 2) return total;
    chunk = std::min(1.5 * chunk, kMaxChunk);
  }
  throw QuadratureError("extension: the shell integral did not converge; is the degree s correct?");
}

double one_minus_chi_part(const Distribution& t, const Cutoff& chi, const TestFunction& phi, const QuadOptions& q) {
  const Block c = Block::radial_chi_complement(t.dims().d, chi.a(), chi.b(), chi.profile());
  return t.pair(multiply_h(phi, c), q);
}

void check_inputs(const Distribution& t, const TestFunction& phi) {
  if (!(phi.dims() == t.dims())) throw DomainError("extension: dimension mismatch");
  if (!phi.has_derivatives()) throw DomainError("extension: test function needs jets");
}

}  // namespace

int subtraction_order(double s, int d) {
  if (!std::isfinite(s)) throw DomainError("extension: s must be finite");
  const double x = s + d;
  if (x > kBand) return -1;
  const double k = -x;
  const double r = std::round(k);
  if (std::abs(k - r) <= kBand) return static_cast<int>(r);
  return static_cast<int>(std::floor(k));
}

bool integer_case(double s, int d) {
  const double x = s + d;
  return x <= kBand && std::abs(x - std::round(x)) <= kBand;
}

double extend_positive(const Distribution& t, double s, const Cutoff& chi, const TestFunction& phi,
                       const ExtensionOptions& opt) {
  check_inputs(t, phi);
  const int d = t.dims().d;
  if (subtraction_order(s, d) != -1) throw DomainError("extend_positive: needs s + d > 0");
  if (phi.is_zero()) return 0.0;
  return one_minus_chi_part(t, chi, phi, opt.quad) + u_integral(t, phi, s + d, chi, h_radii(phi).second, opt);
}

double extend_singular(const Distribution& t, double s, int m, const Cutoff& chi, const TestFunction& phi,
                       const ExtensionOptions& opt) {
  check_inputs(t, phi);
  const int d = t.dims().d;
  if (m < 0 || subtraction_order(s, d) != m) throw DomainError("extend_singular: m inconsistent with s");
  if (m + 1 > phi.max_order()) throw DomainError("extend_singular: test function order too low for I_m");
  if (phi.is_zero()) return 0.0;
  const TestFunction rem = taylor_remainder(phi, m);
  return one_minus_chi_part(t, chi, phi, opt.quad) +
         u_integral(t, rem, s + d + m + 1, chi, h_radii(phi).second, opt);
}

namespace {

class ExtensionImpl final : public DistributionImpl {
 public:
  ExtensionImpl(Distribution t, double s, Cutoff chi, ExtensionOptions opt)
      : t_(std::move(t)), s_(s), m_(subtraction_order(s, t_.dims().d)), chi_(std::move(chi)), opt_(opt) {}

  double pair(const TestFunction& phi, const QuadOptions& q) const override {
    ExtensionOptions o = opt_;
    o.quad = q;
    return m_ < 0 ? extend_positive(t_, s_, chi_, phi, o) : extend_singular(t_, s_, m_, chi_, phi, o);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "extension[" << t_.id() << ", s=" << s_ << ", m=" << m_ << ", " << chi_.id() << "]";
    return os.str();
  }

 private:
  Distribution t_;
  double s_;
  int m_;
  Cutoff chi_;
  ExtensionOptions opt_;
};

}  // namespace

Distribution extension_distribution(const Distribution& t, double s, const Cutoff& chi, const ExtensionOptions& opt) {
  auto impl = std::make_shared<ExtensionImpl>(t, s, chi, opt);
  std::string id = impl->describe();
  Distribution tbar(std::move(impl), t.domain(), t.singular_on_I(), id);
  tbar.meta_degree = s;
  return tbar;
}

ExtensionResult extend(const Distribution& t, double s, const Cutoff& chi, const std::optional<Cone>& cone_in,
                       const ExtendOptions& opt) {
  const Dims dm = t.dims();
  const Box box = t.domain().full_box();
  ExtensionResult r;
  r.s_in = s;
  r.m = subtraction_order(s, dm.d);
  r.integer_case = integer_case(s, dm.d);
  r.chi_used = chi.id();
  if (cone_in && !check_scaling_stable(*cone_in, box))
    throw DomainError("extend: input cone is not stable under scaling");

  Cone gamma = cone_in ? *cone_in : (t.meta_cone ? *t.meta_cone : full_cone(dm, box));
  r.landing = check_landing(gamma);
  if (r.landing)
    r.wf_bound = cone_union(gamma, conormal_I(dm, box));
  else
    r.wf_bound = cone_union(cone_union(gamma, xi_projection(gamma, chi.a(), chi.b())), conormal_I(dm, box));

  r.tbar = extension_distribution(t, s, chi, opt.ext);
  r.tbar.meta_cone = r.wf_bound;
  r.s_out = s;
  if (opt.estimate) {
    const auto probes = opt.probes.empty() ? default_probes(dm) : opt.probes;
    const auto grid = opt.grid.empty() ? default_lambda_grid() : opt.grid;
    r.report = estimate_degree(r.tbar, probes, grid, opt.scaling);
    r.s_out = r.report->s_hat;
    r.log_flag = r.report->log_flag;
  }
  return r;
}

std::string ExtensionResult::to_json() const {
  nlohmann::json j;
  j["tbar"] = tbar.id();
  j["s_in"] = s_in;
  j["s_out"] = s_out;
  j["m"] = m;
  j["log_flag"] = log_flag;
  j["integer_case"] = integer_case;
  j["landing"] = landing;
  j["chi"] = chi_used;
  j["wf_bound"] = nlohmann::json::parse(wf_bound.to_json());
  if (report) {
    j["fit_residual"] = report->residual;
    j["probes"] = report->probes;
  }
  return j.dump(2);
}

}  // namespace scalext
