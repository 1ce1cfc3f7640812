#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ndg/assembly.hpp"
#include "ndg/basis.hpp"
#include "ndg/mesh.hpp"
#include "ndg/norms.hpp"
#include "ndg/problems.hpp"
#include "ndg/quadrature.hpp"
#include "ndg/solver.hpp"
#include "ndg/study.hpp"

namespace ndg {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace validation {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
inline double triangle_monomial_integral(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

inline double max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) v = std::max(v, std::abs(it.value()));
  }
  return v;
}

inline double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
  return max_abs(SparseMatrix(a - b));
}

inline CheckResult mesh_invariants() {
  CheckResult r{"mesh invariants (counts, Euler, orientation, normals, adjacency)", true, ""};
  double worst_aspect = 0.0;
  for (int n = 1; n <= 8; ++n) {
    const Mesh m = build_uniform_mesh({-1.0, -1.0, 1.0, 1.0}, n);
    std::size_t boundary = 0;
    for (const auto& e : m.edges()) {
      if (!e.is_interior()) ++boundary;
      if (std::abs(e.normal.norm() - 1.0) > 1e-14) r.passed = false;
      if (e.is_interior()) {
        std::set<int> plus(m.element(e.plus).vertices.begin(), m.element(e.plus).vertices.end());
        std::set<int> minus(m.element(e.minus).vertices.begin(), m.element(e.minus).vertices.end());
        int shared = 0;
        for (int v : plus) shared += static_cast<int>(minus.count(v));
        if (shared != 2 || !plus.count(e.vertices[0]) || !plus.count(e.vertices[1])) r.passed = false;
        if (e.plus >= e.minus) r.passed = false;
      }
    }
    const auto V = static_cast<long>(m.num_vertices()), E = static_cast<long>(m.num_edges()),
               F = static_cast<long>(m.num_elements());
    if (F != 2L * n * n || static_cast<long>(boundary) != 4L * n || V - E + F != 1) r.passed = false;
    for (int t = 0; t < static_cast<int>(m.num_elements()); ++t) {
      if (!(m.area(t) > 0.0)) r.passed = false;
      worst_aspect = std::max(worst_aspect, aspect_ratio(m, t));
    }
  }
  r.detail = "n=1..8, worst circumradius/inradius " + sci(worst_aspect);
  return r;
}

inline CheckResult quadrature_monomials() {
  CheckResult r{"quadrature monomial exactness sweep", true, ""};
  double worst = 0.0;
  for (int d = 1; d <= 20; ++d) {
    const TriangleRule rule = triangle_rule(d);
    for (double w : rule.weights) r.passed = r.passed && w > 0.0;
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          s += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
        }
        const double exact = triangle_monomial_integral(a, b);
        worst = std::max(worst, std::abs(s - exact) / exact);
      }
    }
  }
  for (int d = 1; d <= 21; ++d) {
    const LineRule rule = edge_rule(d);
    for (double w : rule.weights) r.passed = r.passed && w > 0.0;
    for (int a = 0; a <= d; ++a) {
      double s = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * std::pow(rule.points[q], a);
      worst = std::max(worst, std::abs(s - 1.0 / (a + 1)) * (a + 1));
    }
  }
  r.passed = r.passed && worst <= 1e-13;
  r.detail = "max relative error " + sci(worst);
  return r;
}

inline CheckResult basis_identities() {
  CheckResult r{"basis partition of unity, derivative sums, Lagrange property", true, ""};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const ReferenceBasis basis(k);
    for (int i = 0; i < basis.dimension(); ++i) {
      const Eigen::VectorXd v = basis.values(basis.nodes()[static_cast<std::size_t>(i)]);
      for (int j = 0; j < basis.dimension(); ++j) {
        worst = std::max(worst, std::abs(v(j) - (i == j ? 1.0 : 0.0)));
      }
    }
    for (int s = 0; s < 50; ++s) {
      double x = u01(rng), y = u01(rng);
      if (x + y > 1.0) x = 1.0 - x, y = 1.0 - y;
      const Point p(x, y);
      worst = std::max(worst, std::abs(basis.values(p).sum() - 1.0));
      worst = std::max(worst, basis.gradients(p).colwise().sum().cwiseAbs().maxCoeff());
      worst = std::max(worst, basis.hessians(p).colwise().sum().cwiseAbs().maxCoeff());
    }
  }
  r.passed = worst <= 1e-10;
  r.detail = "k=1..4, max deviation " + sci(worst);
  return r;
}

/// Residual of the DG integration-by-parts identity for random piecewise
/// polynomial tau and v, relative to the largest term.
inline double ibp_identity_residual(int n, int k, unsigned seed) {
  const Mesh mesh = build_uniform_mesh({0.0, 0.0, 1.0, 1.0}, n);
  const ReferenceBasis basis(k);
  const DofMap dofs(mesh.num_elements(), basis.dimension());
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd tx(dofs.size()), ty(dofs.size()), v(dofs.size());
  for (Eigen::Index i = 0; i < dofs.size(); ++i) tx(i) = dist(rng), ty(i) = dist(rng), v(i) = dist(rng);

  const TriangleRule vrule = triangle_rule(2 * k);
  const LineRule erule = edge_rule(2 * k + 1);
  const int dim = basis.dimension();
  double vol_grad = 0.0, vol_div = 0.0, jump_term = 0.0, avg_term = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.num_elements()); ++t) {
    const AffineMap map = AffineMap::of_element(mesh, t);
    const detail::Trace tr = detail::tabulate(basis, map, vrule.points, false);
    const auto cx = tx.segment(dofs.offset(t), dim), cy = ty.segment(dofs.offset(t), dim),
               cv = v.segment(dofs.offset(t), dim);
    for (std::size_t q = 0; q < vrule.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = vrule.weights[q] * std::abs(map.det);
      const Eigen::Vector2d tau(tr.values.row(qi).dot(cx), tr.values.row(qi).dot(cy));
      const Eigen::Vector2d gv = tr.grads[q].transpose() * cv;
      const double div = tr.grads[q].col(0).dot(cx) + tr.grads[q].col(1).dot(cy);
      vol_grad += w * tau.dot(gv);
      vol_div += w * div * tr.values.row(qi).dot(cv);
    }
  }
  for (const auto& e : mesh.edges()) {
    const detail::EdgePoints ep = detail::edge_points(mesh, e, erule);
    const int sides = e.is_interior() ? 2 : 1;
    const int el[2] = {e.plus, e.minus};
    detail::Trace tr[2];
    for (int s = 0; s < sides; ++s) tr[s] = detail::edge_trace(basis, mesh, el[s], ep.x);
    for (std::size_t q = 0; q < ep.x.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      double tn[2] = {0, 0}, vv[2] = {0, 0};
      for (int s = 0; s < sides; ++s) {
        const Eigen::Index o = dofs.offset(el[s]);
        const Eigen::Vector2d tau(tr[s].values.row(qi).dot(tx.segment(o, dim)),
                                  tr[s].values.row(qi).dot(ty.segment(o, dim)));
        tn[s] = tau.dot(e.normal);
        vv[s] = tr[s].values.row(qi).dot(v.segment(o, dim));
      }
      if (e.is_interior()) {
        jump_term += ep.w[q] * (tn[0] - tn[1]) * 0.5 * (vv[0] + vv[1]);
        avg_term += ep.w[q] * 0.5 * (tn[0] + tn[1]) * (vv[0] - vv[1]);
      } else {
        avg_term += ep.w[q] * tn[0] * vv[0];
      }
    }
  }
  const double scale = std::max({std::abs(vol_grad), std::abs(vol_div), std::abs(jump_term),
                                 std::abs(avg_term), 1.0});
  return std::abs(vol_grad + vol_div - jump_term - avg_term) / scale;
}

inline CheckResult ibp_identity() {
  CheckResult r{"DG integration-by-parts identity", true, ""};
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    for (int n : {1, 3, 6}) worst = std::max(worst, ibp_identity_residual(n, k, 11u * k + n));
  }
  r.passed = worst <= 1e-12;
  r.detail = "k=1..3, max relative residual " + sci(worst);
  return r;
}

struct FormEquivalence {
  double nondiv_vs_ibp = 0.0;    // relative to max-abs entry
  double nondiv_vs_primal = 0.0;
};

inline FormEquivalence form_equivalence(const Eigen::Matrix2d& a0, int k, int n, int eps,
                                        double gamma = 10.0) {
  const Mesh mesh = build_uniform_mesh({0.0, 0.0, 1.0, 1.0}, n);
  SolveConfig cfg;
  cfg.k = k;
  cfg.epsilon = eps;
  cfg.gamma = gamma;
  const SparseSystem nd =
      assemble_nondiv(mesh, CoefficientField::constant_matrix(a0), nullptr, nullptr, cfg);
  const SparseMatrix ibp = assemble_div_constant(mesh, a0, cfg, DivForm::integrated_by_parts);
  const SparseMatrix primal = assemble_div_constant(mesh, a0, cfg, DivForm::primal);
  const double scale = max_abs(nd.matrix);
  return {max_abs_diff(nd.matrix, ibp) / scale, max_abs_diff(nd.matrix, primal) / scale};
}

inline Eigen::Matrix2d skewed_matrix() {
  Eigen::Matrix2d a;
  a << 2.0, 1.0, 1.0, 3.0;
  return a;
}

inline CheckResult form_equivalence_check(int max_n = 4) {
  CheckResult r{"form equivalence (non-divergence vs integrated-by-parts vs primal)", true, ""};
  double worst = 0.0;
  for (const Eigen::Matrix2d& a0 : {Eigen::Matrix2d(Eigen::Matrix2d::Identity()), skewed_matrix()}) {
    for (int eps : {1, 0, -1}) {
      for (int k = 1; k <= 3; ++k) {
        for (int n = 1; n <= max_n; n *= 2) {
          const FormEquivalence fe = form_equivalence(a0, k, n, eps);
          worst = std::max({worst, fe.nondiv_vs_ibp, fe.nondiv_vs_primal});
        }
      }
    }
  }
  r.passed = worst <= 1e-12;
  r.detail = "max relative difference " + sci(worst);
  return r;
}

inline double sip_asymmetry(const Eigen::Matrix2d& a0, int k, int n, double gamma = 10.0) {
  const Mesh mesh = build_uniform_mesh({0.0, 0.0, 1.0, 1.0}, n);
  SolveConfig cfg;
  cfg.k = k;
  cfg.epsilon = 1;
  cfg.gamma = gamma;
  const SparseMatrix m = assemble_div_constant(mesh, a0, cfg, DivForm::primal);
  const SparseMatrix mt = m.transpose();
  return max_abs_diff(m, mt) / max_abs(m);
}

inline CheckResult sip_symmetry() {
  CheckResult r{"SIP primal form symmetry", true, ""};
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    worst = std::max(worst, sip_asymmetry(Eigen::Matrix2d::Identity(), k, 4));
    worst = std::max(worst, sip_asymmetry(skewed_matrix(), k, 4));
  }
  r.passed = worst <= 1e-12;
  r.detail = "max relative asymmetry " + sci(worst);
  return r;
}

/// Jump part of the W^{1,2}_h norm for v = 1 on element 0 and 0 on element 1
/// of the two-triangle unit square (gamma = 1); the exact value is sqrt(3).
inline ErrorReport two_triangle_norm_example() {
  const Mesh mesh = build_uniform_mesh({0.0, 0.0, 1.0, 1.0}, 1);
  SolveConfig cfg;
  cfg.k = 1;
  cfg.gamma = 1.0;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
  v.head(3).setOnes();
  const ExactSolution zero{[](const Point&) { return 0.0; },
                           [](const Point&) { return Eigen::Vector2d::Zero().eval(); },
                           [](const Point&) { return Eigen::Matrix2d::Zero().eval(); }};
  return compute_errors(v, zero, mesh, cfg, false, 2.0);
}

inline CheckResult norm_hand_check() {
  CheckResult r{"norm hand check (two-triangle jump norm = sqrt(3))", true, ""};
  const ErrorReport e = two_triangle_norm_example();
  const double dev = std::abs(e.w1_jump - std::sqrt(3.0));
  r.passed = dev <= 1e-12 && e.grad_lp <= 1e-14 && e.w1_average <= 1e-14;
  r.detail = "jump part " + sci(e.w1_jump) + ", deviation " + sci(dev);
  return r;
}

/// Max |f + A:D^2u| over random interior points, relative to max(1, |f|).
inline double manufactured_consistency(const ProblemSpec& p, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(p.domain.x0, p.domain.x1), uy(p.domain.y0, p.domain.y1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Point x(ux(rng), uy(rng));
    if (!p.domain.contains_strictly(x) || x.x() == 0.0 || x.y() == 0.0) continue;
    const double f = p.f(x);
    const double lhs = -(p.A(x).cwiseProduct(p.hess_u(x))).sum();
    worst = std::max(worst, std::abs(f - lhs) / std::max(1.0, std::abs(f)));
  }
  return worst;
}

inline CheckResult manufactured_consistency_check() {
  CheckResult r{"manufactured consistency f = -A:D^2u (1000 samples per problem)", true, ""};
  double worst = 0.0;
  for (const auto& name : builtin_names()) {
    worst = std::max(worst, manufactured_consistency(builtin(name), 1000, 3u));
  }
  for (int k = 1; k <= 4; ++k) {
    worst = std::max(worst, manufactured_consistency(
                                manufactured_polynomial(k, default_manufactured_matrix()), 1000, 5u));
  }
  r.passed = worst <= 1e-9;
  r.detail = "max relative mismatch " + sci(worst);
  return r;
}

inline double polynomial_reproduction_error(int k, int n, const Eigen::Matrix2d& a0, int eps = 1) {
  const ProblemSpec p = manufactured_polynomial(k, a0);
  SolveConfig cfg;
  cfg.k = k;
  cfg.epsilon = eps;
  cfg.gamma = p.gamma;
  return run_level(p, cfg, n).errors.w2h;
}

inline CheckResult polynomial_reproduction() {
  CheckResult r{"polynomial reproduction with boundary lifting", true, ""};
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    for (int n : {2, 4}) worst = std::max(worst, polynomial_reproduction_error(k, n, skewed_matrix()));
  }
  r.passed = worst <= 1e-9;
  r.detail = "max broken W^{2,2} error " + sci(worst);
  return r;
}

/// Solves each built-in at a coarse level and recomputes ||b - Mx|| / ||b||
/// independently of the solver; returns the worst |reported - recomputed|
/// and the worst Galerkin residual entry relative to ||b||_inf.
inline std::pair<double, double> solver_residual_recheck(int n) {
  double worst_mismatch = 0.0, worst_galerkin = 0.0;
  for (const auto& name : builtin_names()) {
    const ProblemSpec p = builtin(name);
    const Mesh mesh = build_uniform_mesh(p.domain, n);
    for (int k = 1; k <= 3; ++k) {
      SolveConfig cfg;
      cfg.k = k;
      cfg.gamma = p.gamma;
      const SparseSystem sys = assemble_nondiv(mesh, p.A, p.f, p.g, cfg);
      const SolveReport rep = solve(sys);
      double r2 = 0.0, b2 = 0.0, rinf = 0.0;
      for (Eigen::Index row = 0; row < sys.matrix.outerSize(); ++row) {
        double acc = 0.0;
        for (SparseMatrix::InnerIterator it(sys.matrix, row); it; ++it) acc += it.value() * rep.x(it.col());
        const double ri = sys.rhs(row) - acc;
        r2 += ri * ri;
        b2 += sys.rhs(row) * sys.rhs(row);
        rinf = std::max(rinf, std::abs(ri));
      }
      const double recomputed = std::sqrt(r2) / std::sqrt(b2);
      worst_mismatch = std::max(worst_mismatch, std::abs(recomputed - rep.relative_residual));
      worst_galerkin = std::max(worst_galerkin, rinf / sys.rhs.cwiseAbs().maxCoeff());
    }
  }
  return {worst_mismatch, worst_galerkin};
}

inline CheckResult solver_residual() {
  CheckResult r{"solver residual re-verification and Galerkin consistency", true, ""};
  const auto [mismatch, galerkin] = solver_residual_recheck(4);
  r.passed = mismatch <= 1e-12 && galerkin <= 1e-10;
  r.detail = "residual mismatch " + sci(mismatch) + ", max Galerkin residual " + sci(galerkin);
  return r;
}

}  // namespace validation

/// Every property check run by the `validate` command.
inline std::vector<CheckResult> run_validation() {
  using Check = std::function<CheckResult()>;
  const std::vector<Check> checks{
      validation::mesh_invariants,  validation::quadrature_monomials,
      validation::basis_identities, validation::ibp_identity,
      [] { return validation::form_equivalence_check(); },
      validation::sip_symmetry,     validation::norm_hand_check,
      validation::manufactured_consistency_check,
      validation::polynomial_reproduction,
      validation::solver_residual,
  };
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    try {
      out.push_back(c());
    } catch (const std::exception& ex) {
      out.push_back({"check threw", false, ex.what()});
    }
  }
  return out;
}

}  // namespace ndg
