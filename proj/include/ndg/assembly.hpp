#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ndg/basis.hpp"
#include "ndg/coefficient.hpp"
#include "ndg/errors.hpp"
#include "ndg/mesh.hpp"
#include "ndg/parallel.hpp"
#include "ndg/quadrature.hpp"

namespace ndg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Discretization parameters shared by assembly and error evaluation.
struct SolveConfig {
  int k = 1;
  /// 1: symmetrically, 0: incompletely, -1: non-symmetrically induced.
  int epsilon = 1;
  /// Uniform edge penalty gamma_e.
  double gamma = 100.0;
  /// Volume quadrature exactness; 0 picks 2k+2, or max(2k+2, singular_quad_degree)
  /// for singular problems.
  int quad_degree = 0;
  int singular_quad_degree = 10;

  void validate() const {
    if (k < 1 || k > 4) throw std::invalid_argument("SolveConfig: k must be in [1,4]");
    if (epsilon < -1 || epsilon > 1) {
      throw std::invalid_argument("SolveConfig: epsilon must be 1, 0 or -1");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw std::invalid_argument("SolveConfig: gamma must be positive");
    }
    if (quad_degree < 0 || quad_degree > 20) {
      throw std::invalid_argument("SolveConfig: quadrature degree must be in [1,20]");
    }
  }

  int volume_degree(bool singular) const {
    if (quad_degree > 0) return quad_degree;
    return singular ? std::max(2 * k + 2, singular_quad_degree) : 2 * k + 2;
  }

  /// Edge exactness 2k+1, raised to the volume degree for singular problems
  /// (non-polynomial boundary data and coefficients on edges).
  int edge_degree(bool singular) const {
    const int base = 2 * k + 1;
    return std::min(21, singular ? std::max(base, volume_degree(true)) : base);
  }
};

struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  DofMap dofs{0, 1};
};

enum class DivForm { primal, integrated_by_parts };

namespace detail {

/// Basis data of one element at a set of physical points.
struct Trace {
  Eigen::MatrixXd values;  // q x dim
  std::vector<GradientRows> grads;
  std::vector<HessianRows> hess;
};

inline Trace tabulate(const ReferenceBasis& basis, const AffineMap& map,
                      const std::vector<Point>& ref_points, bool with_hessians) {
  Trace tr;
  const auto nq = static_cast<Eigen::Index>(ref_points.size());
  tr.values.resize(nq, basis.dimension());
  tr.grads.reserve(ref_points.size());
  if (with_hessians) tr.hess.reserve(ref_points.size());
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Point& xi = ref_points[static_cast<std::size_t>(q)];
    tr.values.row(q) = basis.values(xi).transpose();
    tr.grads.push_back(push_gradients(map, basis.gradients(xi)));
    if (with_hessians) tr.hess.push_back(push_hessians(map, basis.hessians(xi)));
  }
  return tr;
}

/// Quadrature points of edge e in physical coordinates, weights scaled by h_e.
struct EdgePoints {
  std::vector<Point> x;
  std::vector<double> w;
};

inline EdgePoints edge_points(const Mesh& mesh, const Edge& e, const LineRule& rule) {
  EdgePoints ep;
  const Point& a = mesh.vertex(e.vertices[0]);
  const Point& b = mesh.vertex(e.vertices[1]);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    ep.x.push_back(a + rule.points[q] * (b - a));
    ep.w.push_back(rule.weights[q] * e.length);
  }
  return ep;
}

inline Trace edge_trace(const ReferenceBasis& basis, const Mesh& mesh, int element,
                        const std::vector<Point>& x) {
  const AffineMap map = AffineMap::of_element(mesh, element);
  std::vector<Point> ref;
  ref.reserve(x.size());
  for (const auto& p : x) ref.push_back(map.to_reference(p));
  return tabulate(basis, map, ref, false);
}

inline double contract(const Eigen::Matrix2d& a, const HessianRows& h, Eigen::Index j) {
  return a(0, 0) * h(j, 0) + (a(0, 1) + a(1, 0)) * h(j, 1) + a(1, 1) * h(j, 2);
}

inline void scatter(Triplets& out, const DofMap& dofs, int row_el, int col_el,
                    const Eigen::MatrixXd& block) {
  const Eigen::Index r0 = dofs.offset(row_el), c0 = dofs.offset(col_el);
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      out.emplace_back(static_cast<int>(r0 + i), static_cast<int>(c0 + j), block(i, j));
    }
  }
}

/// Builds the matrix from per-chunk triplet lists: volume contributions in
/// element order, then edge contributions in edge order.
template <class VolumeFn, class EdgeFn>
SparseMatrix assemble_matrix(const Mesh& mesh, const DofMap& dofs, VolumeFn&& volume,
                             EdgeFn&& edge) {
  auto vol = parallel_chunks<Triplets>(mesh.num_elements(),
                                       [&](std::size_t begin, std::size_t end, Triplets& out) {
                                         for (std::size_t t = begin; t < end; ++t) {
                                           volume(static_cast<int>(t), out);
                                         }
                                       });
  auto edg = parallel_chunks<Triplets>(mesh.num_edges(),
                                       [&](std::size_t begin, std::size_t end, Triplets& out) {
                                         for (std::size_t e = begin; e < end; ++e) {
                                           edge(static_cast<int>(e), out);
                                         }
                                       });
  Triplets all;
  std::size_t total = 0;
  for (const auto& c : vol) total += c.size();
  for (const auto& c : edg) total += c.size();
  all.reserve(total);
  for (const auto& c : vol) all.insert(all.end(), c.begin(), c.end());
  for (const auto& c : edg) all.insert(all.end(), c.begin(), c.end());
  SparseMatrix m(dofs.size(), dofs.size());
  m.setFromTriplets(all.begin(), all.end());
  m.makeCompressed();
  return m;
}

inline std::vector<Point> mapped(const AffineMap& map, const std::vector<Point>& ref) {
  std::vector<Point> x;
  x.reserve(ref.size());
  for (const auto& p : ref) x.push_back(map.to_physical(p));
  return x;
}

}  // namespace detail

/// Assembles a_h^eps(phi_j, phi_i) for -A:D^2u = f:
///   -(A:D_h^2 w, v) + sum_{interior} <[A grad w . nu], {v}>
///   - eps sum_{all} <{A grad v . nu}, [w]> + sum_{all} <gamma/h_e [w], [v]>
/// and the load (f, v) plus the Dirichlet lifting of g on boundary edges.
inline SparseSystem assemble_nondiv(const Mesh& mesh, const CoefficientField& A,
                                    const std::function<double(const Point&)>& f,
                                    const std::function<double(const Point&)>& g,
                                    const SolveConfig& cfg) {
  cfg.validate();
  const ReferenceBasis basis(cfg.k);
  const int dim = basis.dimension();
  const DofMap dofs(mesh.num_elements(), dim);
  const TriangleRule vrule = triangle_rule(cfg.volume_degree(A.singular));
  const LineRule erule = edge_rule(cfg.edge_degree(A.singular));
  const double eps = cfg.epsilon;

  SparseSystem sys;
  sys.dofs = dofs;
  sys.rhs = Eigen::VectorXd::Zero(dofs.size());

  // Reference tabulation is shared; only the push-forward differs per element.
  std::vector<Eigen::MatrixXd> ref_grads, ref_hess;
  Eigen::MatrixXd ref_vals(static_cast<Eigen::Index>(vrule.size()), dim);
  for (std::size_t q = 0; q < vrule.size(); ++q) {
    ref_vals.row(static_cast<Eigen::Index>(q)) = basis.values(vrule.points[q]).transpose();
    ref_grads.push_back(basis.gradients(vrule.points[q]));
    ref_hess.push_back(basis.hessians(vrule.points[q]));
  }

  auto volume = [&](int t, Triplets& out) {
    const AffineMap map = AffineMap::of_element(mesh, t);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t q = 0; q < vrule.size(); ++q) {
      const Point x = map.to_physical(vrule.points[q]);
      const double w = vrule.weights[q] * std::abs(map.det);
      const Eigen::Matrix2d a = A.at(x, mesh, t);
      const HessianRows h = push_hessians(map, ref_hess[q]);
      const auto qi = static_cast<Eigen::Index>(q);
      for (Eigen::Index j = 0; j < dim; ++j) {
        const double ahj = detail::contract(a, h, j);
        block.col(j) -= w * ahj * ref_vals.row(qi).transpose();
      }
    }
    detail::scatter(out, dofs, t, t, block);
  };

  auto edge = [&](int eid, Triplets& out) {
    const Edge& e = mesh.edge(eid);
    const detail::EdgePoints ep = detail::edge_points(mesh, e, erule);
    const double pen = cfg.gamma / e.length;
    const int sides = e.is_interior() ? 2 : 1;
    const int el[2] = {e.plus, e.minus};
    const double sgn[2] = {1.0, -1.0};
    detail::Trace tr[2];
    Eigen::MatrixXd flux[2];  // (A_s grad phi_j^s) . nu at each point
    for (int s = 0; s < sides; ++s) {
      tr[s] = detail::edge_trace(basis, mesh, el[s], ep.x);
      flux[s].resize(static_cast<Eigen::Index>(ep.x.size()), dim);
      for (std::size_t q = 0; q < ep.x.size(); ++q) {
        const Eigen::Matrix2d a = A.at(ep.x[q], mesh, el[s]);
        const Eigen::Vector2d an = a.transpose() * e.normal;
        flux[s].row(static_cast<Eigen::Index>(q)) = (tr[s].grads[q] * an).transpose();
      }
    }
    for (int t = 0; t < sides; ++t) {
      for (int s = 0; s < sides; ++s) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t q = 0; q < ep.x.size(); ++q) {
          const auto qi = static_cast<Eigen::Index>(q);
          const double w = ep.w[q];
          const auto vt = tr[t].values.row(qi).transpose();
          const auto vs = tr[s].values.row(qi);
          const auto ft = flux[t].row(qi).transpose();
          const auto fs = flux[s].row(qi);
          if (e.is_interior()) {
            block.noalias() += (w * 0.5 * sgn[s]) * vt * fs;
            block.noalias() -= (w * eps * 0.5 * sgn[s]) * ft * vs;
          } else {
            block.noalias() -= (w * eps) * ft * vs;
          }
          block.noalias() += (w * pen * sgn[t] * sgn[s]) * vt * vs;
        }
        detail::scatter(out, dofs, el[t], el[s], block);
      }
    }
  };

  sys.matrix = detail::assemble_matrix(mesh, dofs, volume, edge);

  // Load vector: serial, element then boundary-edge order.
  for (int t = 0; t < static_cast<int>(mesh.num_elements()); ++t) {
    const AffineMap map = AffineMap::of_element(mesh, t);
    for (std::size_t q = 0; q < vrule.size(); ++q) {
      const Point x = map.to_physical(vrule.points[q]);
      const double fx = f ? f(x) : 0.0;
      if (!std::isfinite(fx)) {
        throw NumericalError("non-finite source sample in element " + std::to_string(t));
      }
      const double w = vrule.weights[q] * std::abs(map.det);
      sys.rhs.segment(dofs.offset(t), dim) +=
          (w * fx) * ref_vals.row(static_cast<Eigen::Index>(q)).transpose();
    }
  }
  if (g) {
    for (const auto& e : mesh.edges()) {
      if (e.is_interior()) continue;
      const detail::EdgePoints ep = detail::edge_points(mesh, e, erule);
      const detail::Trace tr = detail::edge_trace(basis, mesh, e.plus, ep.x);
      for (std::size_t q = 0; q < ep.x.size(); ++q) {
        const double gx = g(ep.x[q]);
        if (!std::isfinite(gx)) {
          throw NumericalError("non-finite boundary sample in element " + std::to_string(e.plus));
        }
        const Eigen::Matrix2d a = A.at(ep.x[q], mesh, e.plus);
        const Eigen::Vector2d an = a.transpose() * e.normal;
        const auto qi = static_cast<Eigen::Index>(q);
        sys.rhs.segment(dofs.offset(e.plus), dim) +=
            ep.w[q] * gx *
            (-eps * (tr.grads[q] * an) + (cfg.gamma / e.length) * tr.values.row(qi).transpose());
      }
    }
  }
  return sys;
}

/// Constant-coefficient divergence-form IP-DG matrix, either in primal form
///   (A0 grad w, grad v) - sum <{A0 grad w . nu}, [v]> - eps sum <{A0 grad v . nu}, [w]>
///   + sum <gamma/h_e [w], [v]>
/// or after DG integration by parts of the volume term.
inline SparseMatrix assemble_div_constant(const Mesh& mesh, const Eigen::Matrix2d& a0,
                                          const SolveConfig& cfg, DivForm form) {
  cfg.validate();
  if ((a0 - a0.transpose()).cwiseAbs().maxCoeff() > 1e-14 * a0.cwiseAbs().maxCoeff() ||
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(a0).eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("assemble_div_constant: A0 must be symmetric positive definite");
  }
  const ReferenceBasis basis(cfg.k);
  const int dim = basis.dimension();
  const DofMap dofs(mesh.num_elements(), dim);
  const TriangleRule vrule = triangle_rule(cfg.volume_degree(false));
  const LineRule erule = edge_rule(cfg.edge_degree(false));
  const double eps = cfg.epsilon;
  const bool primal = form == DivForm::primal;

  auto volume = [&](int t, Triplets& out) {
    const AffineMap map = AffineMap::of_element(mesh, t);
    const detail::Trace tr = detail::tabulate(basis, map, vrule.points, !primal);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t q = 0; q < vrule.size(); ++q) {
      const double w = vrule.weights[q] * std::abs(map.det);
      if (primal) {
        block.noalias() += w * tr.grads[q] * a0 * tr.grads[q].transpose();
      } else {
        const auto qi = static_cast<Eigen::Index>(q);
        for (Eigen::Index j = 0; j < dim; ++j) {
          block.col(j) -= w * detail::contract(a0, tr.hess[q], j) * tr.values.row(qi).transpose();
        }
      }
    }
    detail::scatter(out, dofs, t, t, block);
  };

  const Eigen::Matrix2d a0t = a0.transpose();
  auto edge = [&](int eid, Triplets& out) {
    const Edge& e = mesh.edge(eid);
    const detail::EdgePoints ep = detail::edge_points(mesh, e, erule);
    const double pen = cfg.gamma / e.length;
    const int sides = e.is_interior() ? 2 : 1;
    const int el[2] = {e.plus, e.minus};
    const double sgn[2] = {1.0, -1.0};
    // On boundary edges jump and average both reduce to the single trace.
    const double avg = e.is_interior() ? 0.5 : 1.0;
    const Eigen::Vector2d an = a0t * e.normal;
    detail::Trace tr[2];
    for (int s = 0; s < sides; ++s) tr[s] = detail::edge_trace(basis, mesh, el[s], ep.x);
    for (int t = 0; t < sides; ++t) {
      for (int s = 0; s < sides; ++s) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t q = 0; q < ep.x.size(); ++q) {
          const auto qi = static_cast<Eigen::Index>(q);
          const double w = ep.w[q];
          const Eigen::VectorXd vt = tr[t].values.row(qi).transpose();
          const Eigen::VectorXd vs = tr[s].values.row(qi).transpose();
          const Eigen::VectorXd ft = tr[t].grads[q] * an;
          const Eigen::VectorXd fs = tr[s].grads[q] * an;
          if (primal) {
            block.noalias() -= (w * avg * sgn[t]) * vt * fs.transpose();
          } else if (e.is_interior()) {
            block.noalias() += (w * 0.5 * sgn[s]) * vt * fs.transpose();
          }
          block.noalias() -= (w * eps * avg * sgn[s]) * ft * vs.transpose();
          block.noalias() += (w * pen * sgn[t] * sgn[s]) * vt * vs.transpose();
        }
        detail::scatter(out, dofs, el[t], el[s], block);
      }
    }
  };

  return detail::assemble_matrix(mesh, dofs, volume, edge);
}

/// MatrixMarket coordinate (general, real) dump.
inline void write_matrix_market(std::ostream& os, const SparseMatrix& m) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  os.precision(17);
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace ndg
