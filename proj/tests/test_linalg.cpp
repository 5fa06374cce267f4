#include "zpf/linalg.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace zpf;

namespace {

Matrix random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

Matrix random_hermitian(int n, unsigned seed) {
  const Matrix m = random_matrix(n, n, seed);
  return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST(HermitianEig, IdentityAndDiagonal) {
  auto e = hermitian_eig(Matrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.values(i), 1.0, 1e-14);
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = -1.0;
  e = hermitian_eig(m);
  EXPECT_NEAR(e.values(0), -1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 2.0, 1e-14);
}

TEST(HermitianEig, RandomReconstruction) {
  const Matrix h = random_hermitian(8, 3);
  const auto e = hermitian_eig(h);
  const Matrix rec = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  EXPECT_LT((rec - h).norm() / h.norm(), 1e-10);
  EXPECT_LT((e.vectors.adjoint() * e.vectors - Matrix::Identity(8, 8)).norm(), 1e-10);
  EXPECT_LT((h * e.vectors - e.vectors * e.values.cast<cplx>().asDiagonal()).norm() / h.norm(),
            1e-10);
}

TEST(HermitianEig, RejectsNonHermitian) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  try {
    hermitian_eig(m);
    FAIL() << "expected rejection";
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("defect"), std::string::npos);
  }
}

TEST(PseudoInverse, IdentityDiagonalAndZero) {
  auto p = pseudo_inverse(Matrix::Identity(4, 4));
  EXPECT_EQ(p.rank, 4);
  EXPECT_LT((p.pinv - Matrix::Identity(4, 4)).norm(), 1e-14);

  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 4.0;
  p = pseudo_inverse(m);
  EXPECT_EQ(p.rank, 1);
  EXPECT_NEAR(p.pinv(0, 0).real(), 0.25, 1e-14);
  EXPECT_NEAR(std::abs(p.pinv(1, 1)), 0.0, 1e-14);

  p = pseudo_inverse(Matrix::Zero(3, 3));
  EXPECT_EQ(p.rank, 0);
  EXPECT_EQ(p.pinv.norm(), 0.0);
}

TEST(PseudoInverse, PenroseIdentitiesOnRankThree) {
  const Matrix x = random_matrix(6, 3, 11);
  const Matrix m = x * x.adjoint();
  const auto p = pseudo_inverse(m);
  EXPECT_EQ(p.rank, 3);
  EXPECT_LT((m * p.pinv * m - m).norm(), 1e-9 * m.norm());
  EXPECT_LT((p.pinv * m * p.pinv - p.pinv).norm(), 1e-9 * p.pinv.norm());
  // double application recovers m on its range
  const auto back = pseudo_inverse(p.pinv);
  EXPECT_LT((back.pinv - m).norm(), 1e-8 * m.norm());
}

TEST(GeneralEig, RotationAndTriangular) {
  Matrix r(2, 2);
  r << 0, 1, -1, 0;
  const Vector v = general_eig(r);
  std::vector<double> im = {v(0).imag(), v(1).imag()};
  std::sort(im.begin(), im.end());
  EXPECT_NEAR(im[0], -1.0, 1e-12);
  EXPECT_NEAR(im[1], 1.0, 1e-12);
  EXPECT_NEAR(std::abs(v(0).real()) + std::abs(v(1).real()), 0.0, 1e-12);

  Matrix t = random_matrix(4, 4, 5).triangularView<Eigen::Upper>();
  const Vector w = general_eig(t);
  for (int i = 0; i < 4; ++i) {
    double best = 1e9;
    for (int j = 0; j < 4; ++j) best = std::min(best, std::abs(w(j) - t(i, i)));
    EXPECT_LT(best, 1e-10);
  }
}

TEST(GeneralEig, ResidualOracle) {
  const Matrix m = random_matrix(6, 6, 17);
  const Vector v = general_eig(m);
  for (int i = 0; i < 6; ++i) {
    const Matrix shifted = m - v(i) * Matrix::Identity(6, 6);
    EXPECT_LT(min_singular_value(shifted), 1e-8 * m.norm());
  }
}

TEST(Gmres, SolvesRandomSystem) {
  const Matrix a = random_matrix(50, 50, 2) + 20.0 * Matrix::Identity(50, 50);
  const Vector b = random_matrix(50, 1, 9);
  const LinearMap op = [&](const Vector& x) { return Vector(a * x); };
  const auto res = gmres(op, b, 1e-13, 20, 500);
  EXPECT_TRUE(res.converged);
  EXPECT_LT((a * res.x - b).norm() / b.norm(), 1e-12);
}

TEST(Arnoldi, LeadingEigenvaluesOfDiagonal) {
  RealVector diag = RealVector::LinSpaced(60, 0.01, 0.6);
  diag(59) = 1.0;
  diag(58) = -0.9;
  const LinearMap op = [&](const Vector& x) { return Vector(diag.cast<cplx>().cwiseProduct(x)); };
  const auto r = arnoldi_eigs(op, 60, 2, Vector::Ones(60), 1e-12);
  EXPECT_NEAR(std::abs(r.values(0) - cplx(1.0)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(r.values(1) - cplx(-0.9)), 0.0, 1e-10);
}

TEST(OrthogonalComplement, CompletesIsometry) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(6, 2, 4));
  const Matrix q = qr.householderQ() * Matrix::Identity(6, 2);
  const Matrix c = orthogonal_complement(q);
  ASSERT_EQ(c.cols(), 4);
  EXPECT_LT((c.adjoint() * c - Matrix::Identity(4, 4)).norm(), 1e-12);
  EXPECT_LT((q.adjoint() * c).norm(), 1e-12);
}
