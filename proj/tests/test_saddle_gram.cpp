#include "zpf/environment.hpp"
#include "zpf/gram.hpp"
#include "zpf/saddle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace zpf;

namespace {

double nearest(const RealVector& v, double x) {
  double best = 1e300;
  for (int i = 0; i < v.size(); ++i) best = std::min(best, std::abs(v(i) - x));
  return best;
}

}  // namespace

TEST(Saddle, FindsAkltAtProjectorPoint) {
  for (unsigned seed : {1u, 7u}) {
    SaddleOptions so;
    so.seed = seed;
    so.tol = 1e-10;
    const auto r = find_saddle(blbq(1.0 / 3.0), 2, so);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy_density, -2.0 / 3.0, 1e-7);
    EXPECT_LT(r.grad_norm, 1e-8);
  }
}

TEST(Saddle, ProductOptimumOfRotatedHeisenbergSpinOne) {
  SaddleOptions so;
  so.tol = 1e-10;
  const auto r = find_saddle(sublattice_rotate(blbq(0.0)), 1, so);
  EXPECT_NEAR(r.energy_density, -1.0, 1e-9);
}

TEST(Saddle, RefineNeverRaisesEnergy) {
  const auto model = heisenberg_staggered(0.2);
  const auto start = canonicalize(SiteTensor::random(2, 3, 12));
  SaddleOptions so;
  so.max_iter = 40;
  const auto r = refine_saddle(model, start, so);
  EXPECT_LE(r.energy_density, energy_density(start, model) + 1e-14);
}

TEST(Saddle, ReferenceEnergyIsCachedAndVariational) {
  const auto dir = std::filesystem::temp_directory_path() / "zpf_ref_cache_test";
  std::filesystem::remove_all(dir);
  ReferenceOptions ro;
  ro.cache_dir = dir.string();
  const auto model = heisenberg_staggered(0.2);
  const double e1 = reference_energy(model, 4, ro);
  const double e2 = reference_energy(model, 4, ro);
  EXPECT_EQ(e1, e2);
  // D = 4 lies above the exact density and below the Neel product value.
  EXPECT_LT(e1, -0.35);
  EXPECT_GT(e1, -0.4969);
  std::filesystem::remove_all(dir);
}

TEST(GramAnalytics, AkltFamiliesAndRecurrence) {
  const auto an = aklt_analytic_spectrum(6);
  ASSERT_EQ(an.families.size(), 6u);
  const double expect_plus[] = {4.0, 0.0, 4.0 / 3.0, 8.0 / 9.0, 28.0 / 27.0};
  const double expect_minus[] = {0.0, 4.0 / 3.0, 8.0 / 9.0, 28.0 / 27.0, 80.0 / 81.0};
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(an.families[i].e_plus, expect_plus[i], 1e-14);
    EXPECT_NEAR(an.families[i].e_minus, expect_minus[i], 1e-14);
    EXPECT_LT(an.families[i].residual_plus, 1e-8);
    EXPECT_LT(an.families[i].residual_minus, 1e-8);
  }
  for (int i = 0; i < an.jl_eigenvalues.size(); ++i) {
    const double v = an.jl_eigenvalues(i).real();
    EXPECT_LT(std::min(std::abs(v), std::abs(v - 4.0 / 3.0)), 1e-12);
  }
}

TEST(Gram, AkltNumericSpectrumMatchesFamiliesAtL12) {
  const auto mps = aklt_state();
  const auto g = build_gram(mps, TangentBasis(mps), 12);
  const auto an = aklt_analytic_spectrum(6);
  for (const auto& f : an.families) {
    EXPECT_LT(nearest(g.eig_red, f.e_plus), 1e-8) << "y=" << f.y;
    EXPECT_LT(nearest(g.eig_red, f.e_minus), 1e-8) << "y=" << f.y;
  }
  // Null vectors come from the y = 1, 2 starting positions.
  EXPECT_GT(g.null_red, 0);
  EXPECT_EQ(g.null_dim(), g.null_red * g.copies());
  EXPECT_GT(g.eig_red(g.eig_red.size() - 1), 3.9);
}

TEST(Gram, LargeSeparationApproachesOne) {
  const auto an = aklt_analytic_spectrum(12);
  EXPECT_NEAR(an.families.back().e_plus, 1.0, 1e-4);
  EXPECT_NEAR(an.families.back().e_minus, 1.0, 1e-4);
}

TEST(Gram, PseudoInverseAndProjector) {
  const auto mps = canonicalize(SiteTensor::random(3, 2, 3));
  const auto g = build_gram(mps, TangentBasis(mps), 4);
  const Matrix& G = g.Gt_red;
  // Roundoff in G G+ G grows with the condition number of the kept spectrum.
  const double top = g.eig_red.cwiseAbs().maxCoeff();
  double low = top;
  for (int i = 0; i < g.eig_red.size(); ++i)
    if (g.eig_red(i) > kRankTol * top) low = std::min(low, g.eig_red(i));
  EXPECT_LT((G * g.pinv_red * G - G).cwiseAbs().maxCoeff(), 1e-14 * top * top / low);
  EXPECT_LT((g.proj_red * g.proj_red - g.proj_red).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((g.proj_red - g.proj_red.adjoint()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GE(g.eig_red(0), -1e-8);
}

TEST(Gram, ExpandedMatrixIsDirectSumOfCopies) {
  const auto mps = canonicalize(SiteTensor::random(2, 2, 8));
  const auto g = build_gram(mps, TangentBasis(mps), 3);
  const Matrix full = g.expand(g.Gt_red);
  ASSERT_EQ(full.rows(), g.full_dim());
  const RealVector ev = Eigen::SelfAdjointEigenSolver<Matrix>(full).eigenvalues();
  int zeros = 0;
  for (int i = 0; i < ev.size(); ++i) zeros += std::abs(ev(i)) < 1e-9;
  EXPECT_EQ(zeros, g.null_dim());
}

TEST(Gram, DefaultWindow) {
  EXPECT_EQ(default_window(neel_state(3)), 8);
  const auto mps = aklt_state();
  const int L = default_window(mps);
  const double lam = 1.0 / 3.0;
  EXPECT_LT(std::pow(lam, 2 * L - 2), 1e-12);
  EXPECT_GE(std::pow(lam, 2 * (L - 1) - 2), 1e-12);
}
