#include "zpf/models.hpp"
#include "zpf/mps.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace zpf;

namespace {

// Right fixed point by plain power iteration, independent of canonicalize.
Matrix power_fixed_point(const SiteTensor& a, int steps) {
  Matrix r = Matrix::Identity(a.D, a.D);
  for (int i = 0; i < steps; ++i) {
    r = right_step(a, a, r);
    r /= r.trace();
  }
  return r;
}

UniformMps random_state(int d, int D, unsigned seed) {
  return canonicalize(SiteTensor::random(d, D, seed));
}

}  // namespace

TEST(Canonicalize, ProductState) {
  SiteTensor a(2, 1);
  a.s[0](0, 0) = 0.6;
  a.s[1](0, 0) = 0.8;
  const auto mps = canonicalize(a);
  EXPECT_NEAR(std::abs(mps.gamma(0, 0) - cplx(1.0)), 0.0, 1e-14);
  EXPECT_EQ(mps.xi, 0.0);
}

TEST(Canonicalize, AkltGammaIsHalfIdentity) {
  const auto mps = aklt_state();
  const Matrix oracle = power_fixed_point(mps.A, 200);
  EXPECT_LT((mps.gamma - oracle).norm(), 1e-10);
  EXPECT_LT((mps.gamma - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-10);
  EXPECT_NEAR(mps.xi, 1.0 / std::log(3.0), 1e-10);
}

TEST(Canonicalize, RandomInvariants) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto mps = random_state(3, 2, seed);
    const auto r = canonical_residuals(mps);
    EXPECT_LT(r.left_canonical, 1e-10);
    EXPECT_LT(r.gamma_fixed_point, 1e-10);
    EXPECT_LT(r.gamma_hermitian, 1e-12);
    EXPECT_LT(r.gamma_trace, 1e-12);
    EXPECT_GT(r.gamma_min_eig, 0.0);
  }
}

TEST(Canonicalize, LargeBondUsesIterativePath) {
  const auto mps = random_state(2, 14, 4);
  const auto r = canonical_residuals(mps);
  EXPECT_LT(r.left_canonical, 1e-10);
  EXPECT_LT(r.gamma_fixed_point, 1e-10);
  EXPECT_GT(mps.xi, 0.0);
}

TEST(Canonicalize, RejectsCatState) {
  SiteTensor a(2, 2);
  a.s[0](0, 0) = 1.0;
  a.s[1](1, 1) = 1.0;
  try {
    canonicalize(a);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-injective"), std::string::npos);
  }
}

TEST(TransferSpectrum, Aklt) {
  const auto v = transfer_spectrum(aklt_state(), 4);
  EXPECT_NEAR(std::abs(v(0) - cplx(1.0)), 0.0, 1e-10);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(std::abs(v(i) - cplx(-1.0 / 3.0)), 0.0, 1e-10);
}

TEST(TransferSpectrum, ProductAndRandom) {
  const auto v1 = transfer_spectrum(neel_state(3), 1);
  EXPECT_NEAR(std::abs(v1(0) - cplx(1.0)), 0.0, 1e-12);
  const auto mps = random_state(2, 2, 8);
  const auto v = transfer_spectrum(mps, 4);
  EXPECT_NEAR(std::abs(v(0) - cplx(1.0)), 0.0, 1e-10);
  EXPECT_LT(std::abs(v(1)), 1.0);
  EXPECT_NEAR(mps.xi, -1.0 / std::log(std::abs(v(1))), 1e-8);
}

TEST(TransferSpectrum, GaugeInvariance) {
  SiteTensor a = SiteTensor::random(3, 3, 21);
  SiteTensor g = SiteTensor::random(1, 3, 22);
  const Matrix gm = g.s[0] + 3.0 * Matrix::Identity(3, 3);
  const Matrix gi = gm.inverse();
  SiteTensor b = a;
  for (auto& m : b.s) m = gm * m * gi;
  const auto va = transfer_spectrum(canonicalize(a), 9);
  const auto vb = transfer_spectrum(canonicalize(b), 9);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(std::abs(va(i)), std::abs(vb(i)), 1e-8);
}

TEST(TangentBasis, ModeCountsAndInvariants) {
  EXPECT_EQ(TangentBasis(aklt_state()).modes(), 8);
  EXPECT_EQ(TangentBasis(neel_state(2)).modes(), 1);
  const auto mps = random_state(3, 4, 5);
  const TangentBasis basis(mps);
  ASSERT_EQ(basis.modes(), 32);
  for (int mu = 0; mu < basis.modes(); ++mu) {
    const SiteTensor b = basis.tensor(mu);
    EXPECT_LT(left_step(mps.A, b, Matrix::Identity(4, 4)).norm(), 1e-10);
    for (int nu = 0; nu < basis.modes(); ++nu) {
      const SiteTensor c = basis.tensor(nu);
      cplx g = 0.0;
      for (int s = 0; s < 3; ++s) g += (c.s[s] * mps.gamma * b.s[s].adjoint()).trace();
      EXPECT_NEAR(std::abs(g - cplx(mu == nu ? 1.0 : 0.0)), 0.0, 1e-10);
    }
  }
}

TEST(TangentBasis, CoefficientsInvertCombine) {
  const auto mps = random_state(2, 3, 6);
  const TangentBasis basis(mps);
  Vector c = Vector::Random(basis.modes());
  const SiteTensor x = basis.combine(c);
  // combine(c) is paired against B_mu with the Gamma weight
  SiteTensor xg = x;
  for (auto& m : xg.s) m = m * mps.gamma;
  EXPECT_LT((basis.coefficients(xg) - c).norm(), 1e-10);
}

TEST(TangentBasis, DenseGramIsIdentity) {
  const auto mps = random_state(3, 4, 5);
  const TangentBasis basis(mps);
  const int N = 4;
  const int m = basis.modes();
  Matrix states(0, 0);
  std::vector<Vector> cols;
  for (int mu = 0; mu < m; ++mu) {
    const Derivative dv{1, mu};
    cols.push_back(finite_chain_embed(mps, basis, N, std::span(&dv, 1)));
  }
  // one more site to check orthogonality across sites
  const Derivative other{2, 3};
  const Vector far = finite_chain_embed(mps, basis, N, std::span(&other, 1));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b)
      EXPECT_NEAR(std::abs(cols[a].dot(cols[b]) - cplx(a == b ? 1.0 : 0.0)), 0.0, 1e-10);
    EXPECT_LT(std::abs(cols[a].dot(far)), 1e-10);
  }
}

TEST(GeometricSum, ZeroAndEigenvector) {
  const auto mps = aklt_state();
  EXPECT_EQ(geometric_sum(mps, Matrix::Zero(2, 2), Side::Left).norm(), 0.0);
  Eigen::ComplexEigenSolver<Matrix> es(transfer_superop(mps.A, mps.A));
  int pick = -1;
  for (int i = 0; i < 4; ++i)
    if (std::abs(es.eigenvalues()(i) - cplx(-1.0 / 3.0)) < 1e-10) pick = i;
  ASSERT_GE(pick, 0);
  const Matrix v = unvec(es.eigenvectors().col(pick), 2);
  const Matrix out = geometric_sum(mps, v, Side::Left, false);
  EXPECT_LT((out - 0.75 * v).norm(), 1e-12);
}

TEST(GeometricSum, PartialSumsAndResidual) {
  const auto mps = aklt_state();
  Matrix v = SiteTensor::random(1, 2, 3).s[0];
  v -= (v * mps.gamma).trace() * Matrix::Identity(2, 2);
  Matrix acc = Matrix::Zero(2, 2), term = v;
  for (int n = 0; n <= 40; ++n) {
    acc += term;
    term = left_step(mps.A, mps.A, term);
  }
  EXPECT_LT((geometric_sum(mps, v, Side::Left, false) - acc).norm(), 1e-8);

  const auto big = random_state(2, 21, 9);  // iterative solver path
  for (Side side : {Side::Left, Side::Right}) {
    Matrix w = SiteTensor::random(1, 21, 4).s[0];
    const Matrix x = geometric_sum(big, w, side, true);
    Matrix wc = w;
    Matrix tx;
    if (side == Side::Left) {
      wc -= (w * big.gamma).trace() * Matrix::Identity(21, 21);
      tx = left_step(big.A, big.A, x);
    } else {
      wc -= w.trace() * big.gamma;
      tx = right_step(big.A, big.A, x);
    }
    EXPECT_LT((x - tx - wc).norm(), 1e-10 * w.norm());
  }
}

TEST(GeometricSum, RejectsUncentered) {
  EXPECT_THROW(geometric_sum(aklt_state(), Matrix::Identity(2, 2), Side::Left, false), Error);
}

TEST(FiniteChain, ProductStateIsTensorPower) {
  SiteTensor a(2, 1);
  a.s[0](0, 0) = 0.6;
  a.s[1](0, 0) = 0.8;
  const auto mps = canonicalize(a);
  const TangentBasis basis(mps);
  const Vector psi = finite_chain_embed(mps, basis, 3, {});
  ASSERT_EQ(psi.size(), 8);
  const double amp[2] = {0.6, 0.8};
  for (int i = 0; i < 8; ++i) {
    const double want = amp[(i >> 2) & 1] * amp[(i >> 1) & 1] * amp[i & 1];
    EXPECT_NEAR(std::abs(psi(i)), want, 1e-14);
  }
}

TEST(FiniteChain, AkltClusteringAndNorm) {
  const auto mps = aklt_state();
  const TangentBasis basis(mps);
  const Derivative d2{2, 3}, d5{5, 3};
  const Vector a = finite_chain_embed(mps, basis, 8, std::span(&d2, 1));
  const Vector b = finite_chain_embed(mps, basis, 8, std::span(&d5, 1));
  EXPECT_LT(std::abs(a.dot(b)), 1e-3);
  EXPECT_NEAR(a.norm(), 1.0, 2e-2);
  EXPECT_NEAR(a.squaredNorm(), 1.0, 1e-12);  // exact with purified boundaries
  const Derivative dup[2] = {{3, 0}, {3, 1}};
  EXPECT_THROW(finite_chain_embed(mps, basis, 8, dup), Error);
}

TEST(FiniteChain, PairOverlapsApproachBosonic) {
  const auto mps = aklt_state();
  const TangentBasis basis(mps);
  const int x = 4;
  double worst = 0.0;
  for (int a = 0; a < 8; a += 3)
    for (int b = 0; b < 8; b += 2)
      for (int mu = 0; mu < 8; mu += 3)
        for (int nu = 0; nu < 8; nu += 2) {
          const Derivative bra[2] = {{1, a}, {1 + x, b}};
          const Derivative ket[2] = {{1, mu}, {1 + x, nu}};
          const cplx o = finite_chain_embed(mps, basis, 7, bra)
                             .dot(finite_chain_embed(mps, basis, 7, ket));
          const double want = (a == mu && b == nu) ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(o - want));
        }
  EXPECT_LT(worst, 10.0 * std::exp(-x / mps.xi));
}

TEST(TensorIo, RoundTrip) {
  const SiteTensor t = SiteTensor::random(3, 2, 77);
  std::stringstream ss;
  save_tensor(ss, t);
  const SiteTensor back = load_tensor(ss);
  EXPECT_EQ(back.d, 3);
  EXPECT_EQ(back.D, 2);
  EXPECT_LT((back - t).norm(), 1e-15 * t.norm());
}
