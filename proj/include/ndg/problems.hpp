#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "ndg/coefficient.hpp"
#include "ndg/errors.hpp"
#include "ndg/mesh.hpp"

namespace ndg {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;
using MatrixField = std::function<Eigen::Matrix2d(const Point&)>;

/// Model problem -A:D^2u = f in the domain, u = g on the boundary.
struct ProblemSpec {
  std::string name;
  Rect domain;
  CoefficientField A;
  ScalarField f;
  ScalarField u;
  VectorField grad_u;  // may be empty
  MatrixField hess_u;  // may be empty
  /// Dirichlet data; empty means g = 0.
  ScalarField g;
  double gamma = 100.0;
  std::vector<int> epsilons{1, 0};

  bool singular() const { return A.singular; }
  bool has_derivatives() const { return static_cast<bool>(grad_u) && static_cast<bool>(hess_u); }
  double boundary_value(const Point& x) const { return g ? g(x) : 0.0; }
};

namespace detail {

inline void guard(bool ok, const char* what) {
  if (!ok) throw NumericalError(std::string(what) + " evaluated on its singular set");
}

inline double sign(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

inline ProblemSpec holder() {
  ProblemSpec p;
  p.name = "holder";
  p.domain = {-0.5, -0.5, 0.5, 0.5};
  p.gamma = 100.0;
  p.A.eval = [](const Point& x) {
    const double q = std::sqrt(x.norm());
    Eigen::Matrix2d a;
    a << q + 1.0, -q, -q, 5.0 * q + 1.0;
    return a;
  };
  p.A.singular = true;

  constexpr double w = 2.0 * std::numbers::pi;
  p.u = [](const Point& x) {
    return std::sin(w * x.x()) * std::sin(w * x.y()) * std::exp(x.x() * std::cos(x.y()));
  };
  p.grad_u = [](const Point& x) {
    const double s1 = std::sin(w * x.x()), c1 = std::cos(w * x.x());
    const double s2 = std::sin(w * x.y()), c2 = std::cos(w * x.y());
    const double e = std::exp(x.x() * std::cos(x.y()));
    const double ex = std::cos(x.y()) * e;
    const double ey = -x.x() * std::sin(x.y()) * e;
    return Eigen::Vector2d(s2 * (w * c1 * e + s1 * ex), s1 * (w * c2 * e + s2 * ey));
  };
  p.hess_u = [](const Point& x) {
    const double s1 = std::sin(w * x.x()), c1 = std::cos(w * x.x());
    const double s2 = std::sin(w * x.y()), c2 = std::cos(w * x.y());
    const double sy = std::sin(x.y()), cy = std::cos(x.y());
    const double e = std::exp(x.x() * cy);
    const double ex = cy * e;
    const double ey = -x.x() * sy * e;
    const double exx = cy * cy * e;
    const double exy = -sy * (1.0 + x.x() * cy) * e;
    const double eyy = x.x() * (x.x() * sy * sy - cy) * e;
    Eigen::Matrix2d h;
    h(0, 0) = s2 * (-w * w * s1 * e + 2.0 * w * c1 * ex + s1 * exx);
    h(1, 1) = s1 * (-w * w * s2 * e + 2.0 * w * c2 * ey + s2 * eyy);
    h(0, 1) = w * c1 * (w * c2 * e + s2 * ey) + s1 * (w * c2 * ex + s2 * exy);
    h(1, 0) = h(0, 1);
    return h;
  };
  return p;
}

inline ProblemSpec uniform() {
  ProblemSpec p;
  p.name = "uniform";
  p.domain = {0.0, 0.0, 0.5, 0.5};
  p.gamma = 1000.0;
  p.A.eval = [](const Point& x) {
    const double r = x.norm();
    // -c / log r -> 0 as r -> 0
    const double l = r > 0.0 ? 1.0 / std::log(r) : 0.0;
    Eigen::Matrix2d a;
    a << -5.0 * l + 15.0, 1.0, 1.0, -l + 3.0;
    return a;
  };
  p.A.singular = true;

  p.u = [](const Point& x) { return std::pow(x.norm(), 1.75); };
  p.grad_u = [](const Point& x) -> Eigen::Vector2d {
    const double r = x.norm();
    if (r == 0.0) return Eigen::Vector2d::Zero();
    return Eigen::Vector2d(1.75 * std::pow(r, -0.25) * x);
  };
  p.hess_u = [](const Point& x) -> Eigen::Matrix2d {
    const double r = x.norm();
    guard(r > 0.0, "uniform: Hessian of |x|^{7/4}");
    const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    return 1.75 * std::pow(r, -0.25) * (id - 0.25 * (x * x.transpose()) / (r * r));
  };
  p.g = p.u;
  return p;
}

inline ProblemSpec degenerate() {
  ProblemSpec p;
  p.name = "degenerate";
  p.domain = {0.0, 0.0, 1.0, 1.0};
  p.gamma = 100.0;
  p.A.eval = [](const Point& x) {
    const double a = std::cbrt(x.x()), b = std::cbrt(x.y());
    Eigen::Matrix2d m;
    m << a * a, -a * b, -a * b, b * b;
    return Eigen::Matrix2d((16.0 / 9.0) * m);
  };
  p.A.singular = true;

  p.u = [](const Point& x) { return std::pow(x.x(), 4.0 / 3.0) - std::pow(x.y(), 4.0 / 3.0); };
  p.grad_u = [](const Point& x) {
    return Eigen::Vector2d(4.0 / 3.0 * std::cbrt(x.x()), -4.0 / 3.0 * std::cbrt(x.y()));
  };
  p.hess_u = [](const Point& x) -> Eigen::Matrix2d {
    guard(x.x() > 0.0 && x.y() > 0.0, "degenerate: Hessian of x^{4/3}");
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    h(0, 0) = 4.0 / 9.0 * std::pow(x.x(), -2.0 / 3.0);
    h(1, 1) = -4.0 / 9.0 * std::pow(x.y(), -2.0 / 3.0);
    return h;
  };
  p.g = p.u;
  return p;
}

// Factor t (1 - e^{1-|t|}) of the Cordes solution and its derivatives.
inline double cordes_a(double t) { return t * (1.0 - std::exp(1.0 - std::abs(t))); }
inline double cordes_da(double t) {
  const double e = std::exp(1.0 - std::abs(t));
  return 1.0 - e + std::abs(t) * e;
}
inline double cordes_dda(double t) {
  guard(t != 0.0, "cordes: second derivative");
  return sign(t) * std::exp(1.0 - std::abs(t)) * (2.0 - std::abs(t));
}

inline ProblemSpec cordes() {
  ProblemSpec p;
  p.name = "cordes";
  p.domain = {-1.0, -1.0, 1.0, 1.0};
  p.gamma = 10000.0;
  // x1 x2 / |x1 x2| read as sign(x1) sign(x2), which is 0 on the axes.
  p.A.eval = [](const Point& x) {
    const double s = sign(x.x()) * sign(x.y());
    Eigen::Matrix2d m;
    m << 2.0, s, s, 2.0;
    return Eigen::Matrix2d((16.0 / 9.0) * m);
  };
  p.A.singular = true;
  p.A.edge_sampling = EdgeSampling::on_edge;

  p.u = [](const Point& x) { return cordes_a(x.x()) * cordes_a(x.y()); };
  p.grad_u = [](const Point& x) {
    return Eigen::Vector2d(cordes_da(x.x()) * cordes_a(x.y()), cordes_a(x.x()) * cordes_da(x.y()));
  };
  p.hess_u = [](const Point& x) {
    Eigen::Matrix2d h;
    h(0, 0) = cordes_dda(x.x()) * cordes_a(x.y());
    h(1, 1) = cordes_a(x.x()) * cordes_dda(x.y());
    h(0, 1) = h(1, 0) = cordes_da(x.x()) * cordes_da(x.y());
    return h;
  };
  return p;
}

inline ProblemSpec poisson() {
  ProblemSpec p;
  p.name = "poisson";
  p.domain = {0.0, 0.0, 1.0, 1.0};
  p.gamma = 100.0;
  p.A = CoefficientField::constant_matrix(Eigen::Matrix2d::Identity());
  constexpr double pi = std::numbers::pi;
  p.u = [](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  p.grad_u = [](const Point& x) {
    return Eigen::Vector2d(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                           pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  p.hess_u = [](const Point& x) {
    Eigen::Matrix2d h;
    h(0, 0) = h(1, 1) = -pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y());
    h(0, 1) = h(1, 0) = pi * pi * std::cos(pi * x.x()) * std::cos(pi * x.y());
    return h;
  };
  p.f = [](const Point& x) {
    return 2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  return p;
}

/// f = -A : D^2 u, NaN when either side is undefined.
inline void attach_source(ProblemSpec& p) {
  p.f = [A = p.A, hess = p.hess_u](const Point& x) {
    const Eigen::Matrix2d a = A(x);
    const Eigen::Matrix2d h = hess(x);
    return -(a.cwiseProduct(h)).sum();
  };
}

}  // namespace detail

/// One term c * x^a * y^b of a bivariate polynomial.
struct Monomial {
  int a = 0;
  int b = 0;
  double c = 0.0;
};

/// Constant-coefficient problem with polynomial exact solution and matching
/// (generally nonzero) Dirichlet data.
inline ProblemSpec polynomial_problem(std::vector<Monomial> terms, const Eigen::Matrix2d& a0,
                                      std::string name = "polynomial") {
  auto pw = [](double x, int e) { return e < 0 ? 0.0 : std::pow(x, e); };
  ProblemSpec p;
  p.name = std::move(name);
  p.domain = {0.0, 0.0, 1.0, 1.0};
  p.gamma = 100.0;
  p.A = CoefficientField::constant_matrix(a0);
  p.u = [terms, pw](const Point& x) {
    double s = 0.0;
    for (const auto& m : terms) s += m.c * pw(x.x(), m.a) * pw(x.y(), m.b);
    return s;
  };
  p.grad_u = [terms, pw](const Point& x) {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (const auto& m : terms) {
      g.x() += m.c * m.a * pw(x.x(), m.a - 1) * pw(x.y(), m.b);
      g.y() += m.c * m.b * pw(x.x(), m.a) * pw(x.y(), m.b - 1);
    }
    return g;
  };
  p.hess_u = [terms, pw](const Point& x) {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (const auto& m : terms) {
      h(0, 0) += m.c * m.a * (m.a - 1) * pw(x.x(), m.a - 2) * pw(x.y(), m.b);
      h(0, 1) += m.c * m.a * m.b * pw(x.x(), m.a - 1) * pw(x.y(), m.b - 1);
      h(1, 1) += m.c * m.b * (m.b - 1) * pw(x.x(), m.a) * pw(x.y(), m.b - 2);
    }
    h(1, 0) = h(0, 1);
    return h;
  };
  p.g = p.u;
  detail::attach_source(p);
  return p;
}

/// Fixed polynomial of full degree k with every monomial of degree <= k present.
inline ProblemSpec manufactured_polynomial(int k, const Eigen::Matrix2d& a0) {
  if (k < 1 || k > 4) {
    throw std::invalid_argument("manufactured_polynomial: unsupported degree " + std::to_string(k));
  }
  std::vector<Monomial> terms;
  for (int d = 0; d <= k; ++d) {
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      const double sgn = (a + 2 * b) % 3 == 0 ? -1.0 : 1.0;
      terms.push_back({a, b, sgn * (1.0 + a + 2.0 * b) / (1.0 + d)});
    }
  }
  return polynomial_problem(std::move(terms), a0, "manufactured");
}

inline Eigen::Matrix2d default_manufactured_matrix() {
  Eigen::Matrix2d a0;
  a0 << 2.0, 1.0, 1.0, 3.0;
  return a0;
}

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"holder", "uniform", "degenerate", "cordes",
                                              "poisson"};
  return names;
}

inline ProblemSpec builtin(const std::string& name) {
  ProblemSpec p;
  if (name == "holder") {
    p = detail::holder();
  } else if (name == "uniform") {
    p = detail::uniform();
  } else if (name == "degenerate") {
    p = detail::degenerate();
    p.f = [](const Point&) { return 0.0; };
    return p;
  } else if (name == "cordes") {
    p = detail::cordes();
  } else if (name == "poisson") {
    return detail::poisson();
  } else {
    throw std::invalid_argument("unknown problem '" + name + "'");
  }
  detail::attach_source(p);
  return p;
}

}  // namespace ndg
