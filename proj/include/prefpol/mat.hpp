#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace prefpol {

// Dense row-major matrix of doubles. Scalars are 1x1.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}
  Mat(int r, int c, double fill)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) {
    return a[static_cast<std::size_t>(i) * cols + j];
  }
  double operator()(int i, int j) const {
    return a[static_cast<std::size_t>(i) * cols + j];
  }

  std::size_t size() const { return a.size(); }
  double* data() { return a.data(); }
  const double* data() const { return a.data(); }

  void zero() { std::fill(a.begin(), a.end(), 0.0); }

  bool same_shape(const Mat& o) const {
    return rows == o.rows && cols == o.cols;
  }

  bool all_finite() const {
    for (double v : a)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double sq_norm() const {
    double s = 0;
    for (double v : a) s += v * v;
    return s;
  }

  bool operator==(const Mat&) const = default;

  static Mat zeros_like(const Mat& m) { return Mat(m.rows, m.cols); }
  static Mat scalar(double v) {
    Mat m(1, 1);
    m.a[0] = v;
    return m;
  }
};

}  // namespace prefpol
