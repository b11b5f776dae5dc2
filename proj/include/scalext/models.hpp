#pragma once

#include <string>
#include <vector>

#include "scalext/distribution.hpp"

namespace scalext {

struct ModelParams {
  double a = 0.0;           // exponent for power-type models
  MultiIndex alpha{};       // h multi-index for delta_derivative
  std::string g = "one";    // smooth(g): one | gauss | cos
};

// power_law | log_power | delta_derivative | one_sided | nonsmooth_factor | smooth
Distribution model(const std::string& name, const ModelParams& params, const ChartRegion& chart);
std::vector<std::string> model_names();

}  // namespace scalext
