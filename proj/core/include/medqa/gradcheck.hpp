#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "medqa/linalg.hpp"

namespace medqa {

/// Central-difference gradient of `f` at `params`:
/// (f(p + eps*e_i) - f(p - eps*e_i)) / (2*eps) for every coordinate i.
/// Throws std::invalid_argument for eps <= 0 and std::domain_error if f
/// returns a non-finite value.
Vector finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                            const Vector& params, double epsilon);

struct GradientReport {
  std::string parameter;
  double max_relative_error = 0.0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps coordinates
/// whose true gradient is ~0 from reporting noise as huge relative error.
double relative_error(double analytic, double numeric, double floor = 1e-6);

GradientReport compare_gradients(std::string parameter, std::span<const double> analytic,
                                 std::span<const double> numeric, double floor = 1e-6);

}  // namespace medqa
