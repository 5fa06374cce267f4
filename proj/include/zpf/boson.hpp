#pragma once

// Quadratic boson Hamiltonian of tensor fluctuations, extracted two ways:
// tangent-space contractions with exact environments, and an explicit
// pull-through expansion of the Hamiltonian action in the derivative basis.

#include "zpf/environment.hpp"
#include "zpf/gram.hpp"

#include <map>
#include <string>

namespace zpf {

struct BosonQuadratic {
  double E0 = 0.0;
  int L = 0;
  int m = 0;
  /// eps[x] = epsilon^(x) for x = 0..L; epsilon^(-x) = epsilon^(x)^dagger.
  std::vector<Matrix> eps;
  /// Index x - 1 for x = 1..L.
  std::vector<Matrix> delta_prime;
  std::vector<Matrix> delta;
  std::vector<Matrix> delta_bar;
  Vector gradient;  // h_mu
  std::vector<std::string> warnings;

  Matrix eps_at(int x) const;  // any sign of x, zero beyond L
};

/// Contraction route: E0, epsilon, Delta' (covariantly corrected with
/// overlap_M and the gradient). delta and delta_bar start as Delta' and its
/// conjugate; delta_from_prime applies the Gram pseudo-inverse.
BosonQuadratic quadratic_coeffs(const UniformMps& mps, const TangentBasis& basis,
                                const SpinModel& model, int L);

/// Delta = Gtilde^+ Delta' on the anchored pair index.
void delta_from_prime(const GramData& gram, BosonQuadratic& bq);

/// Stacks Delta'^(x)_{r D + c, nu} into a reduced-index matrix with one
/// column per row index r of the tangent basis, and back.
Matrix pairs_to_reduced(const GramData& gram, const std::vector<Matrix>& blocks);
std::vector<Matrix> reduced_to_pairs(const GramData& gram, const Matrix& reduced);

// ---------------------------------------------------------------------------
// Pull-through machinery

struct PullThrough {
  Vector x;       // tangent coefficients <B_mu, Z Gamma>
  Matrix pulled;  // sum_s A^s^dagger Z^s
};

/// Splits Z = M Y, with M acting on (left bond, physical) legs as a
/// (d D) x (d D) matrix with row index s * D + a, into sum_mu x_mu B_mu plus
/// A followed by the pulled bond matrix.
PullThrough pull_through_step(const UniformMps& mps, const TangentBasis& basis, const Matrix& M,
                              const SiteTensor& Y);

/// Same split for a bond-only matrix K: Z = K Y.
PullThrough pull_bond(const UniformMps& mps, const TangentBasis& basis, const Matrix& K,
                      const SiteTensor& Y);

struct OperatorExpansion {
  std::vector<Vector> x;  // x^(i) for i = 0, 1, ...
  double tail = 0.0;      // norm of the last bond matrix
  bool truncated = false; // horizon reached with tail > 1e-8
};

/// h |Psi> = <h> |Psi> + sum_{i >= 0} x_mu^(i) |d_mu^(i) Psi> for a
/// single-site operator h at site 0.
OperatorExpansion operator_expand(const UniformMps& mps, const TangentBasis& basis,
                                  const Matrix& h, int horizon);

/// Non-reference site tensors of a basis state; every tensor lies in the
/// tangent space (sum_s A^s^dagger X^s = 0).
using Config = std::map<int, SiteTensor>;

struct ExpansionTerm {
  Config sites;
  cplx scale = 1.0;
};

/// Exact action of physical operators ops[0], ops[1], ... on consecutive
/// sites start, start + 1, ... applied to |cfg>, written as a sum of
/// configurations by repeated pull-through. Bond matrices are followed until
/// their norm drops below `tol` or `horizon` sites past the last operator.
std::vector<ExpansionTerm> expand_action(const UniformMps& mps, const Config& cfg, int start,
                                         const std::vector<Matrix>& ops, int horizon,
                                         double tol = 1e-15);

/// <Psi with B_mu at j | cfg> for all mu, where j is the leftmost site of
/// cfg; zero for every other bra site by the tangent gauge.
Vector single_overlap(const UniformMps& mps, const TangentBasis& basis, const Config& cfg);

/// <d_mu^(j) d_nu^(j+x) Psi | cfg> for x = 1..L with j the leftmost site of
/// cfg (entry x - 1, m x m).
std::vector<Matrix> pair_overlap(const UniformMps& mps, const TangentBasis& basis,
                                 const Config& cfg, int L);

/// Overlap of two arbitrary configurations on the infinite chain.
cplx config_overlap(const UniformMps& mps, const Config& bra, const Config& ket);

/// Pull-through route for epsilon, Delta' and the gradient. `horizon`
/// bounds how far bond matrices travel; it is raised to cover the decay of
/// the transfer matrix to 1e-14 when smaller.
BosonQuadratic quadratic_coeffs_pullthrough(const UniformMps& mps, const TangentBasis& basis,
                                            const SpinModel& model, int L, int horizon = 0);

// ---------------------------------------------------------------------------
// Normal-ordered polynomials

struct Mode {
  int site = 0;
  int mode = 0;
  auto operator<=>(const Mode&) const = default;
};

struct Monomial {
  std::vector<Mode> create;
  std::vector<Mode> annihilate;
  cplx coef = 0.0;
};

/// Normal-ordered polynomial in a^dagger, a. Monomials are stored up to
/// degree 3 so that the action on states with at most one boson is exact;
/// truncated(2) keeps the quadratic part.
struct BosonPolynomial {
  std::vector<Monomial> terms;
  int horizon = 0;
  double tail = 0.0;

  BosonPolynomial truncated(int degree) const;
  /// Action on a single-occupancy basis state, as a map from occupied mode
  /// sets to amplitudes.
  std::map<std::vector<Mode>, cplx> apply(const std::vector<Mode>& state) const;
  /// Coefficient of a^dagger_P a_Q (zero when absent).
  cplx coefficient(const std::vector<Mode>& P, const std::vector<Mode>& Q) const;
};

/// Bosonic image of a centered single-site operator at site 0, covering
/// inputs with zero or one boson at sites 0..horizon.
BosonPolynomial boson_map_local(const UniformMps& mps, const TangentBasis& basis,
                                const Matrix& h, int horizon);

/// Configuration (tangent tensors) of a bosonic basis state.
Config config_of(const TangentBasis& basis, const std::vector<Mode>& state);

struct CrossCheckReport {
  std::vector<double> eps_dev;    // per x = 0..L
  std::vector<double> delta_dev;  // per x = 1..L
  double max_dev = 0.0;
  bool pass = false;
};

CrossCheckReport cross_check(const BosonQuadratic& a, const BosonQuadratic& b,
                             double tol = 1e-6);

}  // namespace zpf
