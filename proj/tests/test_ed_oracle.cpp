#include "zpf/boson.hpp"
#include "zpf/ed.hpp"
#include "zpf/gram.hpp"
#include "zpf/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace zpf;

TEST(Ed, AkltOpenChainIsFrustrationFree) {
  const auto r = ed_ground(blbq(1.0 / 3.0), 8, Boundary::Open);
  EXPECT_NEAR(r.energy, -14.0 / 3.0, 1e-8);
  EXPECT_NEAR(r.energy_density, -2.0 / 3.0, 1e-9);
  EXPECT_LT(r.residual, 1e-9);
}

TEST(Ed, KrylovMatchesDenseWhereFeasible) {
  struct Case {
    SpinModel model;
    int N;
    Boundary bc;
  };
  const std::vector<Case> cases{{blbq(0.0), 6, Boundary::Periodic},
                                {blbq(0.633), 6, Boundary::Open},
                                {blbq(-0.2), 5, Boundary::Periodic},
                                {heisenberg_staggered(0.2), 9, Boundary::Periodic},
                                {heisenberg_staggered(0.0), 8, Boundary::Open}};
  for (const auto& c : cases) {
    const auto r = ed_ground(c.model, c.N, c.bc);
    const Matrix H = ed_dense_hamiltonian(c.model, c.N, c.bc);
    const double dense = Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues()(0);
    EXPECT_TRUE(r.dense_checked);
    EXPECT_NEAR(r.energy, dense, 1e-10) << c.model.name << " N=" << c.N;
  }
}

TEST(Ed, TwoSiteSinglet) {
  // Rotated frame leaves the spectrum unchanged: the singlet sits at -3/4.
  EXPECT_NEAR(ed_ground(heisenberg_staggered(0.0), 2, Boundary::Open).energy, -0.75, 1e-12);
}

TEST(Ed, ApplyIsHermitian) {
  const auto model = blbq(0.3);
  const int N = 5;
  const int dim = 243;
  const SiteTensor u = SiteTensor::random(1, dim, 1), v = SiteTensor::random(1, dim, 2);
  const Vector a = u.s[0].col(0), b = v.s[0].col(0);
  for (auto bc : {Boundary::Open, Boundary::Periodic}) {
    const cplx lhs = a.dot(ed_apply(model, N, bc, b));
    const cplx rhs = ed_apply(model, N, bc, a).dot(b);
    EXPECT_LT(std::abs(lhs - rhs), 1e-11);
  }
}

TEST(Ed, ExcitedLevelAndExtrapolation) {
  const auto r = ed_ground(blbq(1.0 / 3.0), 6, Boundary::Periodic, true);
  const RealVector ev =
      Eigen::SelfAdjointEigenSolver<Matrix>(ed_dense_hamiltonian(blbq(1.0 / 3.0), 6,
                                                                 Boundary::Periodic))
          .eigenvalues();
  EXPECT_NEAR(r.excited, ev(1), 1e-9);
  // The AKLT ring energy is exactly -2N/3 at every size.
  EXPECT_NEAR(ed_extrapolate(blbq(1.0 / 3.0), {4, 5, 6}), -2.0 / 3.0, 1e-9);
}

TEST(Ed, BoundaryNames) {
  EXPECT_EQ(parse_boundary("open"), Boundary::Open);
  EXPECT_EQ(parse_boundary("periodic"), Boundary::Periodic);
  EXPECT_EQ(to_string(Boundary::Periodic), "periodic");
  EXPECT_THROW(parse_boundary("twisted"), Error);
}

TEST(Oracle, RandomSpinOneStateOnShortChain) {
  const auto mps = canonicalize(SiteTensor::random(3, 2, 44));
  const TangentBasis basis(mps);
  const auto model = blbq(0.25);
  auto bq = quadratic_coeffs(mps, basis, model, 4);
  const auto g = build_gram(mps, basis, 4);
  delta_from_prime(g, bq);
  const auto rep = finite_chain_oracle(mps, basis, model, g, bq, 8, 2);
  EXPECT_EQ(rep.max_x, 3);
  EXPECT_LT(rep.M_dev, 1e-10);
  EXPECT_LT(rep.G_dev, 1e-10);
  EXPECT_LT(rep.eps_dev, 1e-10);
  EXPECT_LT(rep.dprime_dev, 1e-10);
  EXPECT_LT(rep.recon_dev, 1e-6);
}

TEST(Oracle, SpinHalfNeelAndCorruption) {
  const auto mps = neel_state(2);
  const TangentBasis basis(mps);
  const auto model = heisenberg_staggered(0.2);
  auto bq = quadratic_coeffs(mps, basis, model, 4);
  const auto g = build_gram(mps, basis, 4);
  delta_from_prime(g, bq);
  EXPECT_TRUE(finite_chain_oracle(mps, basis, model, g, bq, 10, 3).pass(1e-12));
  for (auto& d : bq.delta_prime) d = -d;
  EXPECT_FALSE(finite_chain_oracle(mps, basis, model, g, bq, 10, 3).pass(1e-5));
}
