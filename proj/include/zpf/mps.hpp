#pragma once

// Translation-invariant matrix product states: canonical form, transfer
// operators, tangent-space basis and exact finite-chain embeddings.

#include "zpf/linalg.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace zpf {

/// Rank-3 tensor A^s_{ab}: one D x D matrix per physical index s.
struct SiteTensor {
  int d = 0;
  int D = 0;
  std::vector<Matrix> s;

  SiteTensor() = default;
  SiteTensor(int d_, int D_);

  static SiteTensor random(int d, int D, unsigned seed);

  /// (d*D) x D matrix with row index s*D + a.
  Matrix stacked() const;
  static SiteTensor from_stacked(const Matrix& m, int d);

  SiteTensor& operator+=(const SiteTensor& o);
  SiteTensor& operator-=(const SiteTensor& o);
  SiteTensor& operator*=(cplx c);
  double norm() const;
};

SiteTensor operator+(SiteTensor a, const SiteTensor& b);
SiteTensor operator-(SiteTensor a, const SiteTensor& b);
SiteTensor operator*(cplx c, SiteTensor a);

/// sum_s Tr(x^s^dagger y^s)
cplx inner(const SiteTensor& x, const SiteTensor& y);

/// Left environment step E -> sum_s bra^s^dagger E ket^s.
Matrix left_step(const SiteTensor& bra, const SiteTensor& ket, const Matrix& e);
/// Same with a physical operator: sum_{s,t} op(s,t) bra^s^dagger E ket^t.
Matrix left_step(const SiteTensor& bra, const SiteTensor& ket, const Matrix& e,
                 const Matrix& op);
/// Right environment step R -> sum_s ket^s R bra^s^dagger.
Matrix right_step(const SiteTensor& bra, const SiteTensor& ket, const Matrix& r);
Matrix right_step(const SiteTensor& bra, const SiteTensor& ket, const Matrix& r,
                  const Matrix& op);

/// Dense D^2 x D^2 matrix of left_step acting on column-major vec(E).
Matrix transfer_superop(const SiteTensor& bra, const SiteTensor& ket);

inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}
inline Matrix unvec(const Vector& v, int D) {
  return Eigen::Map<const Matrix>(v.data(), D, D);
}

/// Uniform MPS in left-canonical gauge with right fixed point Gamma.
struct UniformMps {
  SiteTensor A;
  Matrix gamma;
  double xi = 0.0;

  int d() const { return A.d; }
  int D() const { return A.D; }
};

/// Transfer map T(bra, ket) acting on bond-space operators.
class TransferMap {
 public:
  TransferMap(SiteTensor bra, SiteTensor ket)
      : bra_(std::move(bra)), ket_(std::move(ket)) {}
  Matrix apply_left(const Matrix& e) const { return left_step(bra_, ket_, e); }
  Matrix apply_right(const Matrix& r) const { return right_step(bra_, ket_, r); }
  Matrix dense() const { return transfer_superop(bra_, ket_); }
  const SiteTensor& bra() const { return bra_; }
  const SiteTensor& ket() const { return ket_; }

 private:
  SiteTensor bra_;
  SiteTensor ket_;
};

struct CanonicalizeOptions {
  bool compute_xi = true;
  /// Warm start for the left fixed point (large D only).
  const Matrix* left_guess = nullptr;
  /// Warm start for the right fixed point (large D only).
  const Matrix* right_guess = nullptr;
};

/// Brings a raw tensor to left-canonical form and computes Gamma and xi.
/// Throws "non-injective MPS" or "rank-deficient gauge".
UniformMps canonicalize(const SiteTensor& raw, const CanonicalizeOptions& opt = {});

/// Leading `count` eigenvalues of T(A, A), sorted by descending modulus.
Vector transfer_spectrum(const UniformMps& mps, int count);

/// Residuals of the UniformMps invariants; all should be ~1e-12.
struct CanonicalResiduals {
  double left_canonical = 0.0;
  double gamma_fixed_point = 0.0;
  double gamma_hermitian = 0.0;
  double gamma_trace = 0.0;
  double gamma_min_eig = 0.0;
};
CanonicalResiduals canonical_residuals(const UniformMps& mps);

enum class Side { Left, Right };

/// Regularized sum_{n>=0} T^n v for T = T(A, A). Left side acts as
/// E -> sum A^dagger E A (fixed point 1, functional Tr(. Gamma)); right side
/// as R -> sum A R A^dagger (fixed point Gamma, functional Tr). With
/// `center` the fixed-point component of v is removed first; otherwise a
/// non-centered v is an error. The result has zero fixed-point component.
Matrix geometric_sum(const UniformMps& mps, const Matrix& v, Side side,
                     bool center = true);

/// Orthonormal tangent directions B_mu = V e_mu Gamma^{-1/2} with
/// sum_s A^s^dagger B_mu^s = 0 and sum_s Tr(B_mu^s Gamma B_nu^s^dagger) = delta.
/// Mode mu = r * D + c with r in [0, (d-1) D) and c in [0, D).
class TangentBasis {
 public:
  TangentBasis() = default;
  explicit TangentBasis(const UniformMps& mps);

  int modes() const { return modes_; }
  int d() const { return d_; }
  int D() const { return D_; }
  int row_of(int mu) const { return mu / D_; }
  int col_of(int mu) const { return mu % D_; }

  const Matrix& complement() const { return V_; }
  const Matrix& gamma_inv_sqrt() const { return g_inv_sqrt_; }
  const Matrix& gamma_sqrt() const { return g_sqrt_; }

  /// B_mu; cached for small bases.
  SiteTensor tensor(int mu) const;

  /// c_mu = <B_mu, f> (unweighted Frobenius pairing).
  Vector coefficients(const SiteTensor& f) const;
  /// sum_mu c_mu B_mu.
  SiteTensor combine(const Vector& c) const;

 private:
  int d_ = 0;
  int D_ = 0;
  int modes_ = 0;
  Matrix V_;
  Matrix g_inv_sqrt_;
  Matrix g_sqrt_;
  std::vector<SiteTensor> cache_;
};

inline TangentBasis tangent_basis(const UniformMps& mps) { return TangentBasis(mps); }

/// A derivative B_mode placed on `site` of a finite embedding.
struct Derivative {
  int site = 0;
  int mode = 0;
};

/// Dense vector of an N-site window of the infinite chain. The window is
/// purified at both ends with D-dimensional ancillas carrying the exact left
/// (identity) and right (Gamma) environments, so inner products of embedded
/// states equal infinite-chain overlaps. Leg order: [ancilla, s_0..s_{N-1},
/// ancilla], last index fastest.
Vector finite_chain_embed(const UniformMps& mps, const TangentBasis& basis, int N,
                          std::span<const Derivative> derivs);

/// Same embedding with arbitrary site tensors replacing A at given sites.
struct Insertion {
  int site = 0;
  SiteTensor tensor;
};
Vector embed_window(const UniformMps& mps, int N, std::span<const Insertion> inserts);

/// Applies an operator acting on `count` consecutive legs starting at `leg`
/// of a tensor with leg dimensions `dims`.
Vector apply_on_legs(const Vector& psi, std::span<const int> dims, int leg, int count,
                     const Matrix& op);

/// Leg dimensions of a finite_chain_embed vector.
std::vector<int> embed_dims(const UniformMps& mps, int N);

void save_tensor(std::ostream& os, const SiteTensor& t);
SiteTensor load_tensor(std::istream& is);

}  // namespace zpf
