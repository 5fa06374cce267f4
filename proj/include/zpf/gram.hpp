#pragma once

// Overlaps between the first and second tangent spaces and the anchored
// two-excitation Gram matrix.
//
// Pair states |d_mu^(0) d_nu^(x)> with x = 1..L are indexed (x, mu, nu). With
// B_mu = V e_r Gamma^{-1/2} e_c^T every overlap carries a factor
// delta(r_mu, r_alpha) from site 0, so the anchored Gram matrix is a direct
// sum of (d-1)D identical reduced blocks indexed (x, c_mu, nu), of size
// L * D * m. The reduced blocks are what gets assembled and diagonalized.

#include "zpf/mps.hpp"

namespace zpf {

struct GramData {
  int L = 0;
  int d = 0;
  int D = 0;
  int m = 0;
  /// Reduced first/second tangent overlaps, one per x = 1..L:
  /// rows c_kappa, columns c_mu * m + nu.
  std::vector<Matrix> M_red;
  Matrix G_red;       // reduced anchored Gram matrix
  Matrix Gt_red;      // covariant-corrected
  Matrix pinv_red;    // pseudo-inverse of Gt_red
  Matrix proj_red;    // pinv_red * Gt_red
  RealVector eig_red; // ascending eigenvalues of Gt_red
  int null_red = 0;   // zero eigenvalues of one reduced block

  int reduced_dim() const { return L * D * m; }
  int full_dim() const { return L * m * m; }
  int copies() const { return (d - 1) * D; }
  int null_dim() const { return null_red * copies(); }
  int reduced_index(int x, int c_mu, int nu) const { return ((x - 1) * D + c_mu) * m + nu; }

  /// M^(x) as an m x m^2 matrix, column mu * m + nu.
  Matrix M_full(int x) const;
  /// Block (x, y) of the full anchored G or Gtilde, m^2 x m^2.
  Matrix G_block(int x, int y, bool tilde = false) const;
  /// Full anchored matrix of dimension L m^2 (row (x-1) m^2 + mu m + nu).
  Matrix expand(const Matrix& reduced) const;
};

/// M^(x)_{kappa,(mu nu)} = <d_kappa^(0) Psi | d_mu^(0) d_nu^(x) Psi>.
Matrix overlap_M(const UniformMps& mps, const TangentBasis& basis, int x);

/// Builds M and G for x, y = 1..L (no covariant correction yet).
GramData gram_G(const UniformMps& mps, const TangentBasis& basis, int L);

/// Gtilde = G - M^dagger M; throws "non-PSD Gram" on eigenvalues < -1e-8.
void gram_tilde(GramData& g);

struct Projection {
  Matrix pinv;
  Matrix proj;
  int null_dim = 0;
  RealVector eigenvalues;
};

/// Pseudo-inverse of a Hermitian PSD matrix and the projector onto its range.
Projection pinv_project(const Matrix& gt, double rel_tol = kRankTol);

/// gram_G, gram_tilde and pinv_project in one call.
GramData build_gram(const UniformMps& mps, const TangentBasis& basis, int L,
                    double rel_tol = kRankTol);

/// Default window length: at least 8 and long enough that |lambda_2|^(2L-2)
/// is below 1e-2 times the rank cutoff.
int default_window(const UniformMps& mps);

/// Closed-form structure of the AKLT Gram matrix.
struct AkltFamily {
  int y = 0;
  double e_plus = 0.0;
  double e_minus = 0.0;
  double residual_plus = 0.0;   // recurrence residual of the + branch
  double residual_minus = 0.0;  // recurrence residual of the - branch
};

struct AkltGramAnalytics {
  double lambda = -1.0 / 3.0;
  Matrix L_mat;  // G^(11)
  Matrix J;      // G^(12)
  Matrix M1;     // M^(1)
  Vector jl_eigenvalues;  // spectrum of J - lambda L
  std::vector<AkltFamily> families;
};

/// Builds L, J, M^(1) for the AKLT state, checks that J - lambda L has
/// eigenvalues in {0, 1 - lambda}, and verifies each family (y, E) by
/// solving the second-order recurrence for the geometric tail.
AkltGramAnalytics aklt_analytic_spectrum(int y_max);

}  // namespace zpf
