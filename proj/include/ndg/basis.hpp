#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ndg/mesh.hpp"

namespace ndg {

/// Per-point Hessians stored row-wise as (d_xx, d_xy, d_yy).
using HessianRows = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using GradientRows = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Lagrange basis of P_k on the reference triangle (0,0),(1,0),(0,1) with
/// equispaced lattice nodes. Functions are expanded in monomials x^a y^b and
/// differentiated in closed form.
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int k) : k_(k) {
    if (k < 1 || k > 4) {
      throw std::invalid_argument("ReferenceBasis: unsupported degree " + std::to_string(k));
    }
    for (int d = 0; d <= k; ++d) {
      for (int b = 0; b <= d; ++b) exponents_.emplace_back(d - b, b);
    }
    for (int j = 0; j <= k; ++j) {
      for (int i = 0; i + j <= k; ++i) {
        nodes_.emplace_back(static_cast<double>(i) / k, static_cast<double>(j) / k);
      }
    }
    const int n = dimension();
    Eigen::MatrixXd vandermonde(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) vandermonde(r, c) = monomial(c, nodes_[static_cast<std::size_t>(r)]);
    }
    // phi_i = sum_m coeffs(m, i) * mono_m
    coeffs_ = vandermonde.fullPivLu().inverse();
  }

  int degree() const { return k_; }
  int dimension() const { return (k_ + 1) * (k_ + 2) / 2; }
  const std::vector<Point>& nodes() const { return nodes_; }

  Eigen::VectorXd values(const Point& xi) const {
    Eigen::VectorXd m(dimension());
    for (int c = 0; c < dimension(); ++c) m(c) = monomial(c, xi);
    return coeffs_.transpose() * m;
  }

  GradientRows gradients(const Point& xi) const {
    Eigen::Matrix<double, Eigen::Dynamic, 2> m(dimension(), 2);
    for (int c = 0; c < dimension(); ++c) {
      const auto [a, b] = exponents_[static_cast<std::size_t>(c)];
      m(c, 0) = a * power(xi.x(), a - 1) * power(xi.y(), b);
      m(c, 1) = b * power(xi.x(), a) * power(xi.y(), b - 1);
    }
    return coeffs_.transpose() * m;
  }

  HessianRows hessians(const Point& xi) const {
    Eigen::Matrix<double, Eigen::Dynamic, 3> m(dimension(), 3);
    for (int c = 0; c < dimension(); ++c) {
      const auto [a, b] = exponents_[static_cast<std::size_t>(c)];
      m(c, 0) = a * (a - 1) * power(xi.x(), a - 2) * power(xi.y(), b);
      m(c, 1) = a * b * power(xi.x(), a - 1) * power(xi.y(), b - 1);
      m(c, 2) = b * (b - 1) * power(xi.x(), a) * power(xi.y(), b - 2);
    }
    return coeffs_.transpose() * m;
  }

 private:
  static double power(double x, int e) {
    if (e <= 0) return e == 0 ? 1.0 : 0.0;
    double r = x;
    for (int i = 1; i < e; ++i) r *= x;
    return r;
  }

  double monomial(int c, const Point& xi) const {
    const auto [a, b] = exponents_[static_cast<std::size_t>(c)];
    return power(xi.x(), a) * power(xi.y(), b);
  }

  int k_;
  std::vector<std::pair<int, int>> exponents_;
  std::vector<Point> nodes_;
  Eigen::MatrixXd coeffs_;
};

inline ReferenceBasis ref_basis(int k) { return ReferenceBasis(k); }

/// x = origin + jacobian * xi
struct AffineMap {
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Identity();
  Point origin = Point::Zero();
  double det = 1.0;
  Eigen::Matrix2d inverse = Eigen::Matrix2d::Identity();

  AffineMap() = default;
  AffineMap(const Eigen::Matrix2d& j, const Point& b) : jacobian(j), origin(b), det(j.determinant()) {
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
      throw std::invalid_argument("AffineMap: singular Jacobian");
    }
    inverse = j.inverse();
  }

  static AffineMap of_element(const Mesh& mesh, int t) {
    const auto& v = mesh.element(t).vertices;
    const Point& p0 = mesh.vertex(v[0]);
    Eigen::Matrix2d j;
    j.col(0) = mesh.vertex(v[1]) - p0;
    j.col(1) = mesh.vertex(v[2]) - p0;
    return AffineMap(j, p0);
  }

  Point to_physical(const Point& xi) const { return origin + jacobian * xi; }
  Point to_reference(const Point& x) const { return inverse * (x - origin); }
};

struct PhysicalDerivatives {
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
};

/// Chain rule for affine maps: grad = J^{-T} g, hess = J^{-T} H J^{-1}.
inline PhysicalDerivatives physical_derivatives(const AffineMap& map,
                                                const Eigen::Vector2d& ref_grad,
                                                const Eigen::Matrix2d& ref_hess) {
  if (!(std::abs(map.jacobian.determinant()) > 0.0)) {
    throw std::invalid_argument("physical_derivatives: singular Jacobian");
  }
  const Eigen::Matrix2d jit = map.inverse.transpose();
  return {jit * ref_grad, jit * ref_hess * map.inverse};
}

/// Row-wise push-forward of basis gradients.
inline GradientRows push_gradients(const AffineMap& map, const GradientRows& ref) {
  return ref * map.inverse;
}

/// Row-wise push-forward of basis Hessians (d_xx, d_xy, d_yy layout).
inline HessianRows push_hessians(const AffineMap& map, const HessianRows& ref) {
  const Eigen::Matrix2d& g = map.inverse;  // d xi_a / d x_i = g(a, i)
  HessianRows out(ref.rows(), 3);
  for (Eigen::Index r = 0; r < ref.rows(); ++r) {
    Eigen::Matrix2d h;
    h << ref(r, 0), ref(r, 1), ref(r, 1), ref(r, 2);
    const Eigen::Matrix2d p = g.transpose() * h * g;
    out(r, 0) = p(0, 0);
    out(r, 1) = p(0, 1);
    out(r, 2) = p(1, 1);
  }
  return out;
}

/// Element t owns the contiguous global range [t*dim, (t+1)*dim).
class DofMap {
 public:
  DofMap(std::size_t num_elements, int local_dim)
      : num_elements_(num_elements), local_dim_(local_dim) {}

  int local_dim() const { return local_dim_; }
  std::size_t num_elements() const { return num_elements_; }
  Eigen::Index size() const {
    return static_cast<Eigen::Index>(num_elements_) * local_dim_;
  }
  Eigen::Index offset(int element) const {
    return static_cast<Eigen::Index>(element) * local_dim_;
  }

 private:
  std::size_t num_elements_;
  int local_dim_;
};

/// Element-wise Lagrange interpolation of u into the DG space.
template <class F>
Eigen::VectorXd nodal_interpolate(F&& u, const Mesh& mesh, int k) {
  const ReferenceBasis basis(k);
  const DofMap dofs(mesh.num_elements(), basis.dimension());
  Eigen::VectorXd coeffs(dofs.size());
  for (int t = 0; t < static_cast<int>(mesh.num_elements()); ++t) {
    const AffineMap map = AffineMap::of_element(mesh, t);
    for (int i = 0; i < basis.dimension(); ++i) {
      coeffs(dofs.offset(t) + i) = u(map.to_physical(basis.nodes()[static_cast<std::size_t>(i)]));
    }
  }
  return coeffs;
}

}  // namespace ndg
