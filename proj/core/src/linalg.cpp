#include "medqa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace medqa {

void Vector::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void require_size(std::size_t actual, std::size_t expected, const std::string& what) {
  if (actual != expected) {
    throw ShapeError(what + ": got " + std::to_string(actual) + ", expected " +
                     std::to_string(expected));
  }
}

Vector affine(const Matrix& weights, const Vector& x, const Vector& bias) {
  if (weights.cols() != x.size()) {
    throw ShapeError("affine: weights (" + std::to_string(weights.rows()) + "x" +
                     std::to_string(weights.cols()) + ") vs input (len " +
                     std::to_string(x.size()) + ")");
  }
  if (weights.rows() != bias.size()) {
    throw ShapeError("affine: weights (" + std::to_string(weights.rows()) + "x" +
                     std::to_string(weights.cols()) + ") vs bias (len " +
                     std::to_string(bias.size()) + ")");
  }
  Vector out(weights.rows());
  const auto w = weights.values();
  const std::size_t cols = weights.cols();
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    double acc = bias[r];
    const double* row = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
  return out;
}

double sigmoid(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector elementwise(Activation activation, const Vector& x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = activation == Activation::sigmoid ? sigmoid(x[i]) : std::tanh(x[i]);
  }
  return out;
}

Vector masked_softmax(const Vector& scores, const std::vector<bool>& mask) {
  if (mask.size() != scores.size()) {
    throw ShapeError("masked_softmax: scores (len " + std::to_string(scores.size()) +
                     ") vs mask (len " + std::to_string(mask.size()) + ")");
  }
  double max_score = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) {
      max_score = std::max(max_score, scores[i]);
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("masked_softmax: every position is masked");

  Vector out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) {
      out[i] = std::exp(scores[i] - max_score);
      total += out[i];
    }
  }
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] /= total;
  return out;
}

Vector concat(const Vector& a, const Vector& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return Vector(std::move(out));
}

double dot(const Vector& a, const Vector& b) {
  require_size(b.size(), a.size(), "dot: right operand vs left operand");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l1_distance(const Vector& a, const Vector& b) {
  require_size(b.size(), a.size(), "l1_distance: right operand vs left operand");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

double cosine(const Vector& a, const Vector& b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace medqa
