#include "medqa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace medqa {

Vector finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                            const Vector& params, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("finite_diff_gradient: epsilon must be > 0");
  std::vector<double> probe(params.begin(), params.end());
  Vector grad(params.size());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + epsilon;
    const double plus = f(probe);
    probe[i] = saved - epsilon;
    const double minus = f(probe);
    probe[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw std::domain_error("finite_diff_gradient: non-finite function value at coordinate " +
                              std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * epsilon);
  }
  return grad;
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradientReport compare_gradients(std::string parameter, std::span<const double> analytic,
                                 std::span<const double> numeric, double floor) {
  require_size(numeric.size(), analytic.size(), "compare_gradients: numeric vs analytic");
  GradientReport report;
  report.parameter = std::move(parameter);
  report.analytic.assign(analytic.begin(), analytic.end());
  report.numeric.assign(numeric.begin(), numeric.end());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    report.max_relative_error =
        std::max(report.max_relative_error, relative_error(analytic[i], numeric[i], floor));
  }
  return report;
}

}  // namespace medqa
