#pragma once

#include <string>
#include <vector>

#include "scalext/cone.hpp"
#include "scalext/distribution.hpp"

namespace scalext {

inline constexpr double kDegree = M_PI / 180.0;

std::vector<double> default_k_grid();  // {8, 16, ..., 256}

// Bump of the given radius around a point, tapered by a Gaussian of width radius/taper.
struct Window {
  double radius = 0.2;
  double taper = 5.0;  // 0 disables the Gaussian factor
};

// Real and imaginary parts of window_at(p)·e^{-ik⟨·,w⟩} as separable test functions.
std::pair<TestFunction, TestFunction> oscillatory_probe(Dims dims, const Point& p, const Covector& w, double k,
                                                        const Window& win);

// Window along x only, oscillating as e^{-ik⟨x,w_x⟩}, times a fixed h-block.
std::pair<TestFunction, TestFunction> oscillatory_x_probe(Dims dims, const Point& x0, const Covector& w_x, double k,
                                                          const Window& win, const Block& h);

struct WfSample {
  Point point{};
  Covector direction{};             // unit
  std::vector<double> amplitude;    // |⟨t, window·e^{-ik⟨·,w⟩}⟩| per k
  double decay_exponent = 0.0;      // fitted N in amplitude ~ k^{-N}, capped at kRapidDecay
  bool ok = true;                   // false when a pairing failed
  std::string error;
};

inline constexpr double kRapidDecay = 50.0;

struct WfOptions {
  Window window{};
  std::vector<double> k_grid;       // default_k_grid when empty
  double threshold = 3.0;
  double floor = 1e-8;              // amplitudes below floor·reference count as vanished
  QuadOptions quad{};
  int threads = 1;
};

struct WfReport {
  Dims dims{};
  std::vector<double> k_grid;
  std::vector<WfSample> samples;
  double threshold = 3.0;
  Cone estimated_cone;  // slow samples only, each as a point × narrow cap

  bool slow(const WfSample& s) const { return s.ok && s.decay_exponent < threshold; }
  std::string to_csv() const;
};

// log-log slope fit over the upper half of the k grid, ignoring amplitudes below the floor
double fit_decay(const std::vector<double>& k, const std::vector<double>& amplitude, double reference,
                 double floor);

WfReport wf_estimate(const Distribution& t, const std::vector<Point>& points, const std::vector<Covector>& directions,
                     const WfOptions& opt = {});
// explicit (point, direction) pairs instead of the full product
WfReport wf_estimate_pairs(const Distribution& t, const std::vector<std::pair<Point, Covector>>& pairs,
                           const WfOptions& opt = {});

// every slow sample lies in `bound` up to the angular slack
bool wf_bound_check(const WfReport& report, const Cone& bound, double slack = 5.0 * kDegree);

struct WfAgreement {
  int samples = 0;      // samples with successful pairings
  int slow = 0;
  int slow_outside = 0; // slow samples outside the cone
  int agree = 0;        // slow exactly when inside the cone
  double consistent() const { return samples ? 1.0 - double(slow_outside) / samples : 0.0; }
  double agreement() const { return samples ? double(agree) / samples : 0.0; }
};
WfAgreement wf_compare(const WfReport& report, const Cone& cone, double slack = 5.0 * kDegree);

}  // namespace scalext
