#pragma once

#include <string>
#include <vector>

#include "scalext/distribution.hpp"
#include "scalext/extension.hpp"
#include "scalext/microlocal.hpp"

namespace scalext {

// Number of multi-indices α in d variables with |α| ≤ m, where m is the integer part of −s−d;
// 0 when s + d > 0 (unique extension).
long counterterm_rank(double s, int d);

// Σ_α t_α(x) ∂_h^α δ_I with t_α sampled at the x-grid points.
struct Counterterm {
  struct Term {
    MultiIndex alpha{};
    std::vector<double> coeff;  // one per grid point
  };
  Dims dims{};
  std::vector<Point> x_grid;  // x-coordinates in the first n slots
  std::vector<Term> terms;
  std::string to_csv() const;
};

struct ExtractionOptions {
  double h_radius = 0.05;    // inside the χ plateau, so only the I-supported part is seen
  double x_radius = 0.1;     // x-localization of each coefficient sample
  double tolerance = 1e-6;   // below this every coefficient counts as zero
  // order m + 1 probes against t̄ need long shell integrals when d > 1
  QuadOptions quad{1e-9, 0.0, 20'000'000};
};

// Probe bump_x(x − x0)/∫bump_x · h^β/β! · bump(h/r)
TestFunction coefficient_probe(Dims dims, const Point& x0, const MultiIndex& beta, const ExtractionOptions& opt);

struct Decomposition {
  bool equal = false;
  Counterterm counterterm;
  double max_coeff = 0.0;
  // largest pairing with the order m + 1 probes left unexplained by the fitted terms
  double residual = 0.0;
};

// Fits t1 − t2 = Σ_{|α|≤m} t_α ∂_h^α δ_I near the x-grid; x-grid entries use the first n slots.
Decomposition decompose_difference(const Distribution& t1, const Distribution& t2, int m,
                                   const std::vector<Point>& x_grid, const ExtractionOptions& opt = {});
Decomposition decompose_difference(const ExtensionResult& t1, const ExtensionResult& t2, int m,
                                   const std::vector<Point>& x_grid, const ExtractionOptions& opt = {});

// t + Σ terms, for synthetic tests of the decomposition
Distribution inject_counterterm(const Distribution& t, std::vector<DeltaTerm> terms);

struct CoefficientSmoothness {
  MultiIndex alpha{};
  Point x0{};
  Covector direction{};  // along x
  std::vector<double> amplitude;
  double decay_exponent = 0.0;
};

struct SmoothnessReport {
  bool smooth = true;
  double threshold = 3.0;
  std::vector<CoefficientSmoothness> samples;
};

struct SmoothnessOptions {
  ExtractionOptions extraction{};
  Window window{};
  std::vector<double> k_grid;   // default_k_grid when empty
  double threshold = 3.0;
  double floor = 1e-8;
  double support_tolerance = 1e-9;
};

// u must be supported on I; its coefficients t_α (|α| ≤ m) are smooth exactly when their
// windowed Fourier transforms along x decay rapidly at every grid point.
SmoothnessReport smooth_coefficient_check(const Distribution& u, int m, const std::vector<Point>& x_grid,
                                          const SmoothnessOptions& opt = {});

}  // namespace scalext
