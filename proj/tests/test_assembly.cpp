#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ndg/assembly.hpp"
#include "ndg/problems.hpp"
#include "ndg/solver.hpp"
#include "ndg/validation.hpp"

namespace {

using ndg::Point;
using ndg::SolveConfig;

const ndg::Rect kUnit{0.0, 0.0, 1.0, 1.0};

SolveConfig config(int k, int eps, double gamma) {
  SolveConfig c;
  c.k = k;
  c.epsilon = eps;
  c.gamma = gamma;
  return c;
}

ndg::CoefficientField constant(double a, double b, double c, double d) {
  Eigen::Matrix2d m;
  m << a, b, c, d;
  return ndg::CoefficientField::constant_matrix(m);
}

TEST(AssembleNondiv, ZeroDataGivesZeroSolution) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 4);
  const auto sys = ndg::assemble_nondiv(mesh, constant(2, 1, 1, 3), nullptr, nullptr, config(2, 1, 50));
  EXPECT_EQ(sys.rhs.norm(), 0.0);
  const auto rep = ndg::solve(sys);
  EXPECT_EQ(rep.x.norm(), 0.0);
}

TEST(AssembleNondiv, Dimensions) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 3);
  for (int k = 1; k <= 4; ++k) {
    const auto sys = ndg::assemble_nondiv(mesh, constant(1, 0, 0, 1), nullptr, nullptr, config(k, 0, 10));
    const Eigen::Index n = 18 * (k + 1) * (k + 2) / 2;
    EXPECT_EQ(sys.matrix.rows(), n);
    EXPECT_EQ(sys.matrix.cols(), n);
    EXPECT_EQ(sys.rhs.size(), n);
  }
}

// With A = 0 only the penalty term survives. For k = 1 the trace of a P1
// basis function on an edge is a hat, so each edge contributes
// gamma/h * h/6 * [[2,1],[1,2]] (signed by side) between the two vertex dofs.
TEST(AssembleNondiv, PenaltyOnlyMatchesEdgeMassOracle) {
  const double gamma = 10.0;
  for (int n : {1, 2, 3}) {
    const auto mesh = ndg::build_uniform_mesh({0.0, 0.0, 2.0, 1.0}, n);
    const auto sys = ndg::assemble_nondiv(mesh, constant(0, 0, 0, 0), nullptr, nullptr, config(1, 1, gamma));
    const Eigen::MatrixXd got(sys.matrix);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(got.rows(), got.cols());
    for (const auto& e : mesh.edges()) {
      const int sides = e.is_interior() ? 2 : 1;
      const int el[2] = {e.plus, e.minus};
      const double sgn[2] = {1.0, -1.0};
      for (int t = 0; t < sides; ++t) {
        for (int s = 0; s < sides; ++s) {
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              const int vi = mesh.element(el[t]).vertices[static_cast<std::size_t>(i)];
              const int vj = mesh.element(el[s]).vertices[static_cast<std::size_t>(j)];
              const bool on_i = vi == e.vertices[0] || vi == e.vertices[1];
              const bool on_j = vj == e.vertices[0] || vj == e.vertices[1];
              if (!on_i || !on_j) continue;
              oracle(3 * el[t] + i, 3 * el[s] + j) += sgn[t] * sgn[s] * gamma / 6.0 * (vi == vj ? 2.0 : 1.0);
            }
          }
        }
      }
    }
    EXPECT_NEAR((got - oracle).cwiseAbs().maxCoeff(), 0.0, 1e-12) << "n=" << n;
  }
  // Hand value: n = 1 unit square, element 0 vertex 0 touches the bottom
  // boundary edge and the interior diagonal: 2 * gamma/3.
  const auto mesh = ndg::build_uniform_mesh(kUnit, 1);
  const auto sys = ndg::assemble_nondiv(mesh, constant(0, 0, 0, 0), nullptr, nullptr, config(1, 1, gamma));
  EXPECT_NEAR(sys.matrix.coeff(0, 0), 2.0 * gamma / 3.0, 1e-13);
}

TEST(AssembleNondiv, EquivalentToDivergenceFormForConstantA) {
  const Eigen::Matrix2d a0 = ndg::validation::skewed_matrix();
  for (int k = 1; k <= 3; ++k) {
    for (int eps : {1, 0, -1}) {
      for (int n : {1, 2, 4}) {
        const auto d = ndg::validation::form_equivalence(a0, k, n, eps);
        EXPECT_LE(d.nondiv_vs_ibp, 1e-12) << k << " " << eps << " " << n;
        EXPECT_LE(d.nondiv_vs_primal, 1e-12) << k << " " << eps << " " << n;
      }
    }
  }
  EXPECT_LE(ndg::validation::form_equivalence(Eigen::Matrix2d::Identity(), 2, 3, 1).nondiv_vs_primal, 1e-12);
}

TEST(AssembleNondiv, IntegrationByPartsIdentity) {
  for (int k = 1; k <= 3; ++k) EXPECT_LE(ndg::validation::ibp_identity_residual(4, k, 17u + k), 1e-12);
}

TEST(AssembleNondiv, SymmetricInteriorPenaltyIsSpdForLargePenalty) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 4);
  for (int k = 1; k <= 3; ++k) {
    const auto sys =
        ndg::assemble_nondiv(mesh, constant(1, 0, 0, 1), nullptr, nullptr, config(k, 1, 100));
    const Eigen::MatrixXd m(sys.matrix);
    EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-11 * m.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << "k=" << k;
  }
}

TEST(AssembleNondiv, NonsymmetricVariantsAreNotSymmetric) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 2);
  for (int eps : {0, -1}) {
    const auto sys = ndg::assemble_nondiv(mesh, constant(1, 0, 0, 1), nullptr, nullptr, config(1, eps, 10));
    const Eigen::MatrixXd m(sys.matrix);
    EXPECT_GT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(AssembleNondiv, SparsityFollowsElementAdjacency) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 3);
  const auto sys = ndg::assemble_nondiv(mesh, constant(2, 1, 1, 3), nullptr, nullptr, config(1, 1, 10));
  const int ne = static_cast<int>(mesh.num_elements());
  Eigen::MatrixXi adjacent = Eigen::MatrixXi::Identity(ne, ne);
  for (const auto& e : mesh.edges()) {
    if (e.is_interior()) adjacent(e.plus, e.minus) = adjacent(e.minus, e.plus) = 1;
  }
  for (Eigen::Index r = 0; r < sys.matrix.outerSize(); ++r) {
    for (ndg::SparseMatrix::InnerIterator it(sys.matrix, r); it; ++it) {
      EXPECT_EQ(adjacent(static_cast<int>(it.row() / 3), static_cast<int>(it.col() / 3)), 1);
    }
  }
  // Block pattern: diagonal blocks plus two blocks per interior edge.
  int interior = 0;
  for (const auto& e : mesh.edges()) interior += e.is_interior();
  EXPECT_EQ(sys.matrix.nonZeros(), 9 * (ne + 2 * interior));
}

TEST(AssembleNondiv, ReproducesPolynomials) {
  const Eigen::Matrix2d a0 = ndg::default_manufactured_matrix();
  for (int k = 1; k <= 3; ++k) {
    for (int eps : {1, 0, -1}) {
      EXPECT_LE(ndg::validation::polynomial_reproduction_error(k, 4, a0, eps), 1e-9) << k << " " << eps;
    }
  }
}

TEST(AssembleNondiv, DeterministicAcrossRuns) {
  const auto p = ndg::builtin("holder");
  const auto mesh = ndg::build_uniform_mesh(p.domain, 4);
  const auto a = ndg::assemble_nondiv(mesh, p.A, p.f, p.g, config(2, 1, 100));
  const auto b = ndg::assemble_nondiv(mesh, p.A, p.f, p.g, config(2, 1, 100));
  EXPECT_EQ(ndg::validation::max_abs_diff(a.matrix, b.matrix), 0.0);
  EXPECT_EQ((a.rhs - b.rhs).norm(), 0.0);
}

TEST(AssembleNondiv, NonFiniteSamplesNameTheElement) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 2);
  auto bad_f = [](const Point& x) { return x.x() > 0.5 && x.y() > 0.5 ? std::nan("") : 1.0; };
  try {
    ndg::assemble_nondiv(mesh, constant(1, 0, 0, 1), bad_f, nullptr, config(1, 1, 10));
    FAIL() << "expected NumericalError";
  } catch (const ndg::NumericalError& ex) {
    EXPECT_NE(std::string(ex.what()).find("element 6"), std::string::npos) << ex.what();
  }
  ndg::CoefficientField bad_a;
  bad_a.eval = [](const Point& x) -> Eigen::Matrix2d {
    return x.x() < 0.5 && x.y() < 0.5 ? Eigen::Matrix2d(Eigen::Matrix2d::Constant(INFINITY)) : Eigen::Matrix2d(Eigen::Matrix2d::Identity());
  };
  EXPECT_THROW(ndg::assemble_nondiv(mesh, bad_a, nullptr, nullptr, config(1, 1, 10)), ndg::NumericalError);
  auto bad_g = [](const Point&) { return std::nan(""); };
  EXPECT_THROW(ndg::assemble_nondiv(mesh, constant(1, 0, 0, 1), nullptr, bad_g, config(1, 1, 10)),
               ndg::NumericalError);
}

TEST(AssembleNondiv, InvalidConfigurations) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 2);
  const auto a = constant(1, 0, 0, 1);
  EXPECT_THROW(ndg::assemble_nondiv(mesh, a, nullptr, nullptr, config(0, 1, 10)), std::invalid_argument);
  EXPECT_THROW(ndg::assemble_nondiv(mesh, a, nullptr, nullptr, config(5, 1, 10)), std::invalid_argument);
  EXPECT_THROW(ndg::assemble_nondiv(mesh, a, nullptr, nullptr, config(1, 2, 10)), std::invalid_argument);
  EXPECT_THROW(ndg::assemble_nondiv(mesh, a, nullptr, nullptr, config(1, 1, 0)), std::invalid_argument);
  EXPECT_THROW(ndg::assemble_nondiv(mesh, a, nullptr, nullptr, config(1, 1, -3)), std::invalid_argument);
  SolveConfig q = config(1, 1, 10);
  q.quad_degree = 25;
  EXPECT_THROW(ndg::assemble_nondiv(mesh, a, nullptr, nullptr, q), std::invalid_argument);
}

TEST(AssembleDivConstant, RejectsNonSpdMatrix) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 2);
  Eigen::Matrix2d indefinite;
  indefinite << 1, 0, 0, -1;
  Eigen::Matrix2d nonsym;
  nonsym << 2, 1, 0, 2;
  EXPECT_THROW(ndg::assemble_div_constant(mesh, indefinite, config(1, 1, 10), ndg::DivForm::primal),
               std::invalid_argument);
  EXPECT_THROW(ndg::assemble_div_constant(mesh, nonsym, config(1, 1, 10), ndg::DivForm::primal),
               std::invalid_argument);
}

TEST(SolveConfig, QuadratureDegrees) {
  SolveConfig c = config(2, 1, 10);
  EXPECT_EQ(c.volume_degree(false), 6);
  EXPECT_EQ(c.volume_degree(true), 10);
  EXPECT_EQ(c.edge_degree(false), 5);
  EXPECT_EQ(c.edge_degree(true), 10);
  c.quad_degree = 3;
  EXPECT_EQ(c.volume_degree(true), 3);
  c = config(4, 1, 10);
  EXPECT_EQ(c.volume_degree(true), 10);
  EXPECT_EQ(c.edge_degree(false), 9);
}

TEST(MatrixMarket, HeaderAndEntries) {
  const auto mesh = ndg::build_uniform_mesh(kUnit, 1);
  const auto sys = ndg::assemble_nondiv(mesh, constant(1, 0, 0, 1), nullptr, nullptr, config(1, 1, 10));
  std::ostringstream os;
  ndg::write_matrix_market(os, sys.matrix);
  std::istringstream is(os.str());
  std::string banner;
  std::getline(is, banner);
  EXPECT_EQ(banner, "%%MatrixMarket matrix coordinate real general");
  long rows = 0, cols = 0, nnz = 0;
  is >> rows >> cols >> nnz;
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(cols, 6);
  EXPECT_EQ(nnz, sys.matrix.nonZeros());
  long r = 0, c = 0;
  double v = 0.0;
  is >> r >> c >> v;
  EXPECT_EQ(r, 1);
  EXPECT_EQ(c, 1);
  EXPECT_DOUBLE_EQ(v, sys.matrix.coeff(0, 0));
}

}  // namespace
