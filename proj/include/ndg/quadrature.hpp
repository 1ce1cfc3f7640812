#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ndg {

/// Points and weights on a reference domain, exact for polynomials of total
/// degree <= `degree`.
template <class PointT>
struct QuadratureRule {
  std::vector<PointT> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

using LineRule = QuadratureRule<double>;
using TriangleRule = QuadratureRule<Eigen::Vector2d>;

namespace detail {

/// n-point Gauss-Legendre rule on [0,1] (Newton iteration on P_n).
inline LineRule gauss_legendre(int n) {
  LineRule rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  rule.degree = 2 * n - 1;
  if (n == 1) {
    rule.points[0] = 0.5;
    rule.weights[0] = 1.0;
    return rule;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1,1] -> [0,1]
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.points[lo] = 0.5 * (1.0 - x);
    rule.points[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = 0.5 * w;
    rule.weights[hi] = 0.5 * w;
  }
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule on [0,1] with exactness >= degree (1 <= degree <= 21).
inline LineRule edge_rule(int degree) {
  if (degree < 1 || degree > 21) {
    throw std::invalid_argument("edge_rule: unsupported degree " + std::to_string(degree));
  }
  LineRule rule = detail::gauss_legendre((degree + 2) / 2);
  return rule;
}

/// Collapsed (Duffy) Gauss rule on the reference triangle (0,0),(1,0),(0,1).
/// All points are strictly interior and all weights positive.
inline TriangleRule triangle_rule(int degree) {
  if (degree < 1 || degree > 20) {
    throw std::invalid_argument("triangle_rule: unsupported degree " + std::to_string(degree));
  }
  // x = s, y = t(1 - s); the Jacobian (1 - s) raises the degree in s by one.
  const LineRule rs = detail::gauss_legendre((degree + 3) / 2);
  const LineRule rt = detail::gauss_legendre((degree + 2) / 2);
  TriangleRule rule;
  rule.degree = degree;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double s = rs.points[i];
    for (std::size_t j = 0; j < rt.size(); ++j) {
      rule.points.emplace_back(s, rt.points[j] * (1.0 - s));
      rule.weights.push_back(rs.weights[i] * rt.weights[j] * (1.0 - s));
    }
  }
  return rule;
}

}  // namespace ndg
