#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ndg/errors.hpp"
#include "ndg/mesh.hpp"

namespace ndg {

/// How A is sampled at quadrature points that lie on an edge.
enum class EdgeSampling {
  /// Nudge the point 1e-12 h towards the centroid of the element being
  /// integrated, so each side sees its own branch of a discontinuous A.
  one_sided,
  /// Evaluate A at the edge point itself.
  on_edge,
};

/// Matrix-valued coefficient A(x) of the operator -A : D^2 u.
struct CoefficientField {
  std::function<Eigen::Matrix2d(const Point&)> eval;
  bool symmetric = true;
  bool constant = false;
  /// A (or the exact solution) is non-smooth or discontinuous on a
  /// measure-zero set. Raises default quadrature and enables edge_sampling.
  bool singular = false;
  EdgeSampling edge_sampling = EdgeSampling::one_sided;

  static CoefficientField constant_matrix(const Eigen::Matrix2d& a0) {
    CoefficientField c;
    c.eval = [a0](const Point&) { return a0; };
    c.symmetric = (a0 - a0.transpose()).cwiseAbs().maxCoeff() == 0.0;
    c.constant = true;
    return c;
  }

  Eigen::Matrix2d operator()(const Point& x) const { return eval(x); }

  /// Evaluate A at x as seen from element `hint`.
  Eigen::Matrix2d at(const Point& x, const Mesh& mesh, int hint) const {
    Point p = x;
    if (singular && edge_sampling == EdgeSampling::one_sided) {
      const Point towards = mesh.centroid(hint) - x;
      const double dist = towards.norm();
      if (dist > 0.0) p += (1e-12 * mesh.diameter(hint) / dist) * towards;
    }
    const Eigen::Matrix2d a = eval(p);
    if (!a.allFinite()) {
      throw NumericalError("non-finite coefficient sample in element " + std::to_string(hint));
    }
    return a;
  }
};

}  // namespace ndg
