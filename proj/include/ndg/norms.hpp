#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ndg/assembly.hpp"
#include "ndg/basis.hpp"
#include "ndg/errors.hpp"
#include "ndg/mesh.hpp"
#include "ndg/parallel.hpp"
#include "ndg/problems.hpp"
#include "ndg/quadrature.hpp"

namespace ndg {

/// Errors of a discrete solution against the exact one.
struct ErrorReport {
  double h = 0.0;
  Eigen::Index ndof = 0;
  double p = 2.0;
  double lp = 0.0;        // ||e||_{L^p}
  double grad_lp = 0.0;   // ||grad_h e||_{L^p}
  double hess_lp = 0.0;   // ||D^2_h e||_{L^p}
  double w1h = 0.0;       // full broken W^{1,p}_h norm
  double w2h = 0.0;       // full broken W^{2,p}_h norm
  // Edge parts of the full norms, each already raised to 1/p.
  double w1_jump = 0.0;        // (sum gamma^p h^{1-p} ||[e]||^p)^{1/p}
  double w1_average = 0.0;     // (sum h ||{grad e}||^p)^{1/p}
  double w2_grad_jump = 0.0;   // (sum_{interior} h^{1-p} ||[grad e]||^p)^{1/p}
  double w2_jump = 0.0;        // (sum gamma^p h^{1-2p} ||[e]||^p)^{1/p}
};

/// Exact solution used as the reference in compute_errors.
struct ExactSolution {
  ScalarField u;
  VectorField grad;
  MatrixField hess;
};

namespace detail {

struct NormSums {
  double lp = 0, grad = 0, hess = 0, w1_jump = 0, w1_avg = 0, w2_grad_jump = 0, w2_jump = 0;
};

inline double pw(double x, double p) { return p == 2.0 ? x * x : std::pow(x, p); }

}  // namespace detail

/// Errors of the DG function `uh` (coefficients per the element DofMap)
/// against `exact`. Boundary jumps are u_h - u.
inline ErrorReport compute_errors(const Eigen::VectorXd& uh, const ExactSolution& exact,
                                  const Mesh& mesh, const SolveConfig& cfg, bool singular,
                                  double p = 2.0) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("compute_errors: exponent must satisfy 1 < p < inf");
  }
  if (!exact.u || !exact.grad || !exact.hess) {
    throw CapabilityError("compute_errors: exact solution derivatives are not available");
  }
  const ReferenceBasis basis(cfg.k);
  const int dim = basis.dimension();
  const DofMap dofs(mesh.num_elements(), dim);
  if (uh.size() != dofs.size()) {
    throw std::invalid_argument("compute_errors: coefficient vector size mismatch");
  }
  const TriangleRule vrule = triangle_rule(std::min(20, cfg.volume_degree(singular) + 2));
  const LineRule erule = edge_rule(std::min(21, cfg.edge_degree(singular) + 2));
  const double gamma = cfg.gamma;

  std::vector<Eigen::MatrixXd> ref_grads, ref_hess;
  Eigen::MatrixXd ref_vals(static_cast<Eigen::Index>(vrule.size()), dim);
  for (std::size_t q = 0; q < vrule.size(); ++q) {
    ref_vals.row(static_cast<Eigen::Index>(q)) = basis.values(vrule.points[q]).transpose();
    ref_grads.push_back(basis.gradients(vrule.points[q]));
    ref_hess.push_back(basis.hessians(vrule.points[q]));
  }

  std::vector<detail::NormSums> per_element(mesh.num_elements());
  std::vector<detail::NormSums> per_edge(mesh.num_edges());

  parallel_chunks<int>(mesh.num_elements(), [&](std::size_t begin, std::size_t end, int&) {
    for (std::size_t ti = begin; ti < end; ++ti) {
      const int t = static_cast<int>(ti);
      const AffineMap map = AffineMap::of_element(mesh, t);
      const auto c = uh.segment(dofs.offset(t), dim);
      auto& s = per_element[ti];
      for (std::size_t q = 0; q < vrule.size(); ++q) {
        const Point x = map.to_physical(vrule.points[q]);
        const double w = vrule.weights[q] * std::abs(map.det);
        const double val = ref_vals.row(static_cast<Eigen::Index>(q)).dot(c);
        const Eigen::Vector2d grad = push_gradients(map, ref_grads[q]).transpose() * c;
        const Eigen::Vector3d hr = push_hessians(map, ref_hess[q]).transpose() * c;
        Eigen::Matrix2d hess;
        hess << hr(0), hr(1), hr(1), hr(2);
        const double e0 = val - exact.u(x);
        const double e1 = (grad - exact.grad(x)).norm();
        const double e2 = (hess - exact.hess(x)).norm();
        if (!std::isfinite(e0) || !std::isfinite(e1) || !std::isfinite(e2)) {
          throw NumericalError("non-finite error sample in element " + std::to_string(t));
        }
        s.lp += w * detail::pw(std::abs(e0), p);
        s.grad += w * detail::pw(e1, p);
        s.hess += w * detail::pw(e2, p);
      }
    }
  });

  parallel_chunks<int>(mesh.num_edges(), [&](std::size_t begin, std::size_t end, int&) {
    for (std::size_t ei = begin; ei < end; ++ei) {
      const Edge& e = mesh.edge(static_cast<int>(ei));
      const detail::EdgePoints ep = detail::edge_points(mesh, e, erule);
      const int sides = e.is_interior() ? 2 : 1;
      const int el[2] = {e.plus, e.minus};
      detail::Trace tr[2];
      for (int sd = 0; sd < sides; ++sd) tr[sd] = detail::edge_trace(basis, mesh, el[sd], ep.x);
      const double h = e.length;
      auto& s = per_edge[ei];
      for (std::size_t q = 0; q < ep.x.size(); ++q) {
        const auto qi = static_cast<Eigen::Index>(q);
        const double w = ep.w[q];
        double val[2] = {0.0, 0.0};
        Eigen::Vector2d grad[2] = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
        for (int sd = 0; sd < sides; ++sd) {
          const auto c = uh.segment(dofs.offset(el[sd]), dim);
          val[sd] = tr[sd].values.row(qi).dot(c);
          grad[sd] = tr[sd].grads[q].transpose() * c;
        }
        const Eigen::Vector2d du = exact.grad(ep.x[q]);
        double jump = 0.0;
        Eigen::Vector2d avg;
        if (e.is_interior()) {
          jump = val[0] - val[1];
          avg = 0.5 * (grad[0] + grad[1]) - du;
          s.w2_grad_jump += w * std::pow(h, 1.0 - p) * detail::pw((grad[0] - grad[1]).norm(), p);
        } else {
          jump = val[0] - exact.u(ep.x[q]);
          avg = grad[0] - du;
        }
        if (!std::isfinite(jump) || !avg.allFinite()) {
          throw NumericalError("non-finite error sample on edge " + std::to_string(ei));
        }
        const double jp = detail::pw(std::abs(jump), p);
        s.w1_jump += w * std::pow(gamma, p) * std::pow(h, 1.0 - p) * jp;
        s.w2_jump += w * std::pow(gamma, p) * std::pow(h, 1.0 - 2.0 * p) * jp;
        s.w1_avg += w * h * detail::pw(avg.norm(), p);
      }
    }
  });

  detail::NormSums total;
  for (const auto& s : per_element) {
    total.lp += s.lp;
    total.grad += s.grad;
    total.hess += s.hess;
  }
  for (const auto& s : per_edge) {
    total.w1_jump += s.w1_jump;
    total.w1_avg += s.w1_avg;
    total.w2_grad_jump += s.w2_grad_jump;
    total.w2_jump += s.w2_jump;
  }

  const double inv = 1.0 / p;
  ErrorReport r;
  r.h = mesh.h_max();
  r.ndof = dofs.size();
  r.p = p;
  r.lp = std::pow(total.lp, inv);
  r.grad_lp = std::pow(total.grad, inv);
  r.hess_lp = std::pow(total.hess, inv);
  r.w1_jump = std::pow(total.w1_jump, inv);
  r.w1_average = std::pow(total.w1_avg, inv);
  r.w2_grad_jump = std::pow(total.w2_grad_jump, inv);
  r.w2_jump = std::pow(total.w2_jump, inv);
  r.w1h = r.grad_lp + r.w1_jump + r.w1_average;
  r.w2h = r.hess_lp + r.w2_grad_jump + r.w2_jump;
  return r;
}

inline ErrorReport compute_errors(const Eigen::VectorXd& uh, const ProblemSpec& problem,
                                  const Mesh& mesh, const SolveConfig& cfg, double p = 2.0) {
  if (!problem.has_derivatives()) {
    throw CapabilityError("compute_errors: problem '" + problem.name +
                          "' provides no exact derivatives");
  }
  return compute_errors(uh, ExactSolution{problem.u, problem.grad_u, problem.hess_u}, mesh, cfg,
                        problem.singular(), p);
}

/// Empirical orders of convergence; entry 0 and entries with a non-positive
/// error are undefined.
inline std::vector<std::optional<double>> eoc(const std::vector<double>& errors,
                                              const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2) {
    throw std::invalid_argument("eoc: need two or more matching errors and mesh sizes");
  }
  std::vector<std::optional<double>> rates(errors.size());
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(hs[i] > 0.0) || !(hs[i] < hs[i - 1])) {
      throw std::invalid_argument("eoc: mesh sizes must be positive and strictly decreasing");
    }
    if (errors[i] > 0.0 && errors[i - 1] > 0.0 && std::isfinite(errors[i]) &&
        std::isfinite(errors[i - 1])) {
      rates[i] = std::log(errors[i - 1] / errors[i]) / std::log(hs[i - 1] / hs[i]);
    }
  }
  return rates;
}

}  // namespace ndg
