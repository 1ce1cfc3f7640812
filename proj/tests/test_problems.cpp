#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ndg/mesh.hpp"
#include "ndg/problems.hpp"

namespace {

using ndg::Point;

Point random_interior(const ndg::Rect& r, std::mt19937& rng) {
  std::uniform_real_distribution<double> ux(r.x0, r.x1), uy(r.y0, r.y1);
  return {ux(rng), uy(rng)};
}

// 4th-order central differences.
Eigen::Vector2d fd_grad(const ndg::ScalarField& u, const Point& x, double s) {
  Eigen::Vector2d g;
  for (int i = 0; i < 2; ++i) {
    Point e = Point::Zero();
    e(i) = s;
    g(i) = (-u(x + 2 * e) + 8 * u(x + e) - 8 * u(x - e) + u(x - 2 * e)) / (12 * s);
  }
  return g;
}

Eigen::Matrix2d fd_hess(const ndg::VectorField& g, const Point& x, double s) {
  Eigen::Matrix2d h;
  for (int i = 0; i < 2; ++i) {
    Point e = Point::Zero();
    e(i) = s;
    h.col(i) = (-g(x + 2 * e) + 8 * g(x + e) - 8 * g(x - e) + g(x - 2 * e)) / (12 * s);
  }
  return h;
}

TEST(Problems, CatalogueAndPenalties) {
  EXPECT_EQ(ndg::builtin_names().size(), 5u);
  EXPECT_EQ(ndg::builtin("holder").gamma, 100.0);
  EXPECT_EQ(ndg::builtin("uniform").gamma, 1000.0);
  EXPECT_EQ(ndg::builtin("degenerate").gamma, 100.0);
  EXPECT_EQ(ndg::builtin("cordes").gamma, 10000.0);
  EXPECT_EQ(ndg::builtin("poisson").gamma, 100.0);
  EXPECT_THROW(ndg::builtin("nope"), std::invalid_argument);
  for (const auto& name : ndg::builtin_names()) {
    const auto p = ndg::builtin(name);
    EXPECT_EQ(p.name, name);
    EXPECT_TRUE(p.has_derivatives());
    EXPECT_TRUE(static_cast<bool>(p.f));
  }
}

TEST(Problems, Domains) {
  const auto h = ndg::builtin("holder").domain;
  EXPECT_EQ(h.x0, -0.5);
  EXPECT_EQ(h.y1, 0.5);
  const auto u = ndg::builtin("uniform").domain;
  EXPECT_EQ(u.x1, 0.5);
  const auto c = ndg::builtin("cordes").domain;
  EXPECT_EQ(c.x0, -1.0);
  EXPECT_EQ(c.x1, 1.0);
}

TEST(Problems, HolderCoefficient) {
  const auto p = ndg::builtin("holder");
  EXPECT_EQ(p.A(Point(0, 0)), Eigen::Matrix2d::Identity());
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Point x = random_interior(p.domain, rng);
    const Eigen::Matrix2d a = p.A(x);
    EXPECT_EQ(a(0, 1), a(1, 0));
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-12);
  }
  // |x|^{1/2} in the off-diagonal.
  EXPECT_NEAR(p.A(Point(0.25, 0.0))(0, 1), -0.5, 1e-15);
}

TEST(Problems, DegenerateCoefficientIsSingular) {
  const auto p = ndg::builtin("degenerate");
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Point x = random_interior(p.domain, rng);
    const Eigen::Matrix2d a = p.A(x);
    EXPECT_NEAR(a.determinant(), 0.0, 1e-14);
    EXPECT_GE(a.trace(), 0.0);
    EXPECT_EQ(p.f(x), 0.0);
    // A : D^2 u really is zero.
    EXPECT_NEAR(a.cwiseProduct(p.hess_u(x)).sum(), 0.0, 1e-12);
  }
}

TEST(Problems, CordesCoefficientAndSolution) {
  const auto p = ndg::builtin("cordes");
  EXPECT_EQ(p.A.edge_sampling, ndg::EdgeSampling::on_edge);
  EXPECT_NEAR(p.u(Point(1.0, 0.37)), 0.0, 1e-15);
  EXPECT_NEAR(p.u(Point(-1.0, 0.37)), 0.0, 1e-15);
  EXPECT_NEAR(p.u(Point(0.2, -1.0)), 0.0, 1e-15);
  const double c = 16.0 / 9.0;
  EXPECT_NEAR(p.A(Point(0.3, 0.4))(0, 1), c, 1e-15);
  EXPECT_NEAR(p.A(Point(-0.3, 0.4))(0, 1), -c, 1e-15);
  EXPECT_NEAR(p.A(Point(0.3, 0.0))(0, 1), 0.0, 0.0);
  EXPECT_NEAR(p.A(Point(0.3, 0.4))(0, 0), 2 * c, 1e-15);
  // Constant, opposite sign on each quadrant element of a 2x2 mesh.
  const auto mesh = ndg::build_uniform_mesh(p.domain, 2);
  for (int t = 0; t < static_cast<int>(mesh.num_elements()); ++t) {
    const Point x = mesh.centroid(t);
    const double s = (x.x() > 0) == (x.y() > 0) ? 1.0 : -1.0;
    EXPECT_NEAR(p.A(x)(0, 1) / c, s, 1e-15);
  }
  EXPECT_THROW(p.hess_u(Point(0.0, 0.3)), ndg::NumericalError);
}

TEST(Problems, ZeroBoundaryDataWhereExpected) {
  for (const char* name : {"holder", "cordes", "poisson"}) {
    const auto p = ndg::builtin(name);
    const auto& d = p.domain;
    for (int i = 0; i <= 10; ++i) {
      const double s = i / 10.0;
      const double x = d.x0 + s * d.width(), y = d.y0 + s * d.height();
      EXPECT_NEAR(p.u(Point(x, d.y0)), 0.0, 1e-14) << name;
      EXPECT_NEAR(p.u(Point(x, d.y1)), 0.0, 1e-14) << name;
      EXPECT_NEAR(p.u(Point(d.x0, y)), 0.0, 1e-14) << name;
      EXPECT_NEAR(p.u(Point(d.x1, y)), 0.0, 1e-14) << name;
      EXPECT_EQ(p.boundary_value(Point(d.x0, y)), 0.0);
    }
  }
  // The remaining two carry their exact solution as boundary data.
  for (const char* name : {"uniform", "degenerate"}) {
    const auto p = ndg::builtin(name);
    const Point x(p.domain.x1, 0.5 * p.domain.y1);
    EXPECT_EQ(p.boundary_value(x), p.u(x));
    EXPECT_NE(p.boundary_value(x), 0.0);
  }
}

TEST(Problems, DerivativesMatchFiniteDifferences) {
  std::mt19937 rng(9);
  for (const auto& name : ndg::builtin_names()) {
    const auto p = ndg::builtin(name);
    for (int i = 0; i < 30; ++i) {
      Point x = random_interior(p.domain, rng);
      // keep the stencil off the singular axes
      if (std::abs(x.x()) < 0.05 || std::abs(x.y()) < 0.05) continue;
      const double s = 1e-3;
      const Eigen::Vector2d g = p.grad_u(x);
      const Eigen::Matrix2d h = p.hess_u(x);
      EXPECT_NEAR((fd_grad(p.u, x, s) - g).norm(), 0.0, 1e-8 * (1.0 + g.norm())) << name;
      EXPECT_NEAR((fd_hess(p.grad_u, x, s) - h).norm(), 0.0, 1e-7 * (1.0 + h.norm())) << name;
      EXPECT_NEAR(h(0, 1), h(1, 0), 0.0);
    }
  }
}

TEST(Problems, SourceIsMinusAColonHessian) {
  std::mt19937 rng(13);
  for (const auto& name : ndg::builtin_names()) {
    const auto p = ndg::builtin(name);
    for (int i = 0; i < 20; ++i) {
      const Point x = random_interior(p.domain, rng);
      if (x.x() == 0.0 || x.y() == 0.0) continue;
      EXPECT_NEAR(p.f(x), -p.A(x).cwiseProduct(p.hess_u(x)).sum(), 1e-9 * (1.0 + std::abs(p.f(x))))
          << name;
    }
  }
}

TEST(Problems, PolynomialHandOracle) {
  // u = x^2 + 2xy, A = I: f = -(2 + 0) = -2.
  const auto p = ndg::polynomial_problem({{2, 0, 1.0}, {1, 1, 2.0}}, Eigen::Matrix2d::Identity());
  EXPECT_NEAR(p.f(Point(0.3, 0.8)), -2.0, 1e-15);
  EXPECT_NEAR(p.u(Point(0.5, 0.5)), 0.75, 1e-15);
  EXPECT_NEAR(p.grad_u(Point(0.5, 0.25)).x(), 1.5, 1e-15);
  EXPECT_NEAR(p.grad_u(Point(0.5, 0.25)).y(), 1.0, 1e-15);
  Eigen::Matrix2d a0;
  a0 << 2, 1, 1, 3;
  const auto q = ndg::polynomial_problem({{2, 0, 1.0}, {1, 1, 2.0}}, a0);
  // -(2*2 + 2*(1*2)) = -8
  EXPECT_NEAR(q.f(Point(0.1, 0.9)), -8.0, 1e-14);
}

TEST(Problems, ManufacturedPolynomials) {
  const auto a0 = ndg::default_manufactured_matrix();
  const auto p1 = ndg::manufactured_polynomial(1, a0);
  EXPECT_EQ(p1.f(Point(0.4, 0.2)), 0.0);
  EXPECT_EQ(p1.name, "manufactured");
  for (int k = 1; k <= 4; ++k) {
    const auto p = ndg::manufactured_polynomial(k, a0);
    const Point x(0.31, 0.67);
    EXPECT_NEAR(p.boundary_value(x), p.u(x), 0.0);
    EXPECT_NEAR((fd_grad(p.u, x, 1e-3) - p.grad_u(x)).norm(), 0.0, 1e-9);
  }
  EXPECT_THROW(ndg::manufactured_polynomial(0, a0), std::invalid_argument);
  EXPECT_THROW(ndg::manufactured_polynomial(5, a0), std::invalid_argument);
}

TEST(Problems, SingularSetGuards) {
  EXPECT_THROW(ndg::builtin("uniform").hess_u(Point(0, 0)), ndg::NumericalError);
  EXPECT_THROW(ndg::builtin("degenerate").hess_u(Point(0, 0.5)), ndg::NumericalError);
  EXPECT_EQ(ndg::builtin("uniform").grad_u(Point(0, 0)), Eigen::Vector2d::Zero());
  EXPECT_TRUE(ndg::builtin("holder").singular());
  EXPECT_FALSE(ndg::builtin("poisson").singular());
}

}  // namespace
