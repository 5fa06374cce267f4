#include "zpf/boson.hpp"
#include "zpf/zeropoint.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace zpf;
using namespace zpf::testing;

TEST(Bogoliubov, SingleModeOmega) {
  FourierBlocks f{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.25),
                  Matrix::Constant(1, 1, 0.25)};
  const auto r = bogoliubov_spectrum(f, f);
  ASSERT_EQ(r.omega.size(), 1);
  EXPECT_NEAR(r.omega(0), std::sqrt(0.75), 1e-12);
  EXPECT_LT(r.max_imag, 1e-14);
}

TEST(Bogoliubov, MatchesColpaOnRandomStableInstances) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 1 + trial % 4;
    const auto [A, S] = random_stable_block(m, rng);
    const FourierBlocks f{A, 0.5 * S, 0.5 * S.conjugate()};
    const auto r = bogoliubov_spectrum(f, f);
    const auto oracle = colpa(A, S);
    ASSERT_EQ(static_cast<int>(oracle.size()), m);
    for (int i = 0; i < m; ++i) EXPECT_NEAR(r.omega(i), oracle[i], 1e-8) << trial;
    EXPECT_LT(r.pairing_defect, 1e-8);
  }
}

TEST(Bogoliubov, DetectsInstability) {
  FourierBlocks f{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0),
                  Matrix::Constant(1, 1, 1.0)};
  EXPECT_GT(bogoliubov_spectrum(f, f).max_imag, 1.0);
}

TEST(ZeroPoint, NoPairingGivesZero) {
  std::mt19937 rng(8);
  const auto bq = scaled(random_quadratic(3, 2, rng), 0.0);
  EXPECT_LT(std::abs(zero_point_energy(bq, 64).efluct), 1e-13);
}

TEST(ZeroPoint, FourierMeanIsOnSiteBlock) {
  std::mt19937 rng(9);
  const auto bq = random_quadratic(2, 3, rng);
  const int N = 16;
  Matrix mean = Matrix::Zero(2, 2);
  for (int i = 0; i < N; ++i) mean += fourier_blocks(bq, 2 * std::numbers::pi * i / N).eps;
  EXPECT_LT((mean / N - bq.eps[0]).cwiseAbs().maxCoeff(), 1e-13);
  // Parseval: mean |eps_k|_F^2 = sum_x |eps^(x)|_F^2 over x = -L..L.
  double lhs = 0.0, rhs = bq.eps[0].squaredNorm();
  for (int i = 0; i < N; ++i) lhs += fourier_blocks(bq, 2 * std::numbers::pi * i / N).eps.squaredNorm();
  for (int x = 1; x <= bq.L; ++x) rhs += 2 * bq.eps[x].squaredNorm();
  EXPECT_NEAR(lhs / N, rhs, 1e-11);
}

TEST(ZeroPoint, GridSizeInvariance) {
  std::mt19937 rng(10);
  const auto bq = random_quadratic(2, 2, rng);
  EXPECT_NEAR(zero_point_energy(bq, 256).efluct, zero_point_energy(bq, 512).efluct, 1e-10);
}

TEST(ZeroPoint, PairingScalingIsMonotone) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto bq = random_quadratic(1 + trial % 3, 1 + trial % 2, rng);
    double prev = 0.0;
    for (double s : {0.25, 0.5, 0.75, 1.0}) {
      const auto d = zero_point_energy(scaled(bq, s), 128);
      ASSERT_FALSE(d.unstable);
      EXPECT_LE(d.efluct, prev + 1e-14) << trial << " s=" << s;
      prev = d.efluct;
    }
    EXPECT_LT(prev, 0.0);
  }
}

TEST(ZeroPoint, NeelSpinWaveQuadrature) {
  // Rotated Heisenberg chain in a staggered field at the Neel state:
  // omega_k = sqrt((1 + h)^2 - cos^2 k).
  const double h = 0.2;
  const auto model = heisenberg_staggered(h);
  const auto r = fluctuation_correction(neel_state(2), model, 8, 512);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = 2 * std::numbers::pi * (i + 0.5) / n;
    sum += 0.5 * (std::sqrt((1 + h) * (1 + h) - std::cos(k) * std::cos(k)) - (1 + h));
  }
  EXPECT_NEAR(r.disp.efluct, sum / n, 1e-10);
  EXPECT_NEAR(r.disp.E0, -0.35, 1e-14);
  EXPECT_FALSE(r.disp.unstable);
}

TEST(ZeroPoint, AkltHasNoCorrection) {
  const auto r = fluctuation_correction(aklt_state(), blbq(1.0 / 3.0), 0, 256);
  EXPECT_LT(std::abs(r.disp.efluct), 1e-10);
  for (const auto& d : r.bq.delta_prime) EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-12);
}
