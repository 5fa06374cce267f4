#pragma once

// Exact infinite-chain matrix elements of a translation-invariant two-site
// Hamiltonian between states that differ from the uniform MPS on a finite
// window. Bonds are tracked with a three-state automaton: not yet applied,
// pending (left factor placed), finished.

#include "zpf/models.hpp"

#include <vector>

namespace zpf {

/// h = sum_k O_k (x) P_k.
struct BondMpo {
  std::vector<Matrix> O;
  std::vector<Matrix> P;
  int terms() const { return static_cast<int>(O.size()); }
};

/// Operator-Schmidt decomposition of a two-site operator.
BondMpo operator_svd(const Matrix& h, int d, double rel_tol = 1e-14);

/// Energy density <h> with identity left and Gamma right environments.
double energy_density(const UniformMps& mps, const SpinModel& model);

class HamiltonianEnv {
 public:
  struct Left {
    Matrix e0;               // no bond applied yet
    std::vector<Matrix> ek;  // O_k applied on the last site
    Matrix eF;               // every bond to the left summed
  };
  struct Right {
    Matrix rN;               // no bond on the right
    std::vector<Matrix> rk;  // P_k applied on the first site
    Matrix rH;               // every bond to the right summed
  };

  HamiltonianEnv(const UniformMps& mps, const SpinModel& model);

  double energy() const { return energy_; }
  const BondMpo& mpo() const { return mpo_; }
  const UniformMps& mps() const { return mps_; }
  /// h - energy * 1
  const Matrix& centered_density() const { return centered_; }

  Left left_boundary() const { return left0_; }
  Right right_boundary() const { return right0_; }
  Left step_left(const Left& e, const SiteTensor& bra, const SiteTensor& ket) const;
  Right step_right(const Right& r, const SiteTensor& bra, const SiteTensor& ket) const;

  /// Full contraction of the centered Hamiltonian across one boundary.
  cplx close(const Left& e, const Right& r) const;

  /// Psi with <X| H |ket> = inner(X, Psi) for an open bra site between the
  /// environments, ket tensor Y on that site.
  SiteTensor open_bra(const Left& e, const Right& r, const SiteTensor& ket) const;

  /// <bra window| H - E0 |ket window> on the infinite chain; both windows are
  /// lists of site tensors covering the same consecutive sites.
  cplx window_element(const std::vector<SiteTensor>& bra,
                      const std::vector<SiteTensor>& ket) const;

  /// Pieces for the exact ancilla embedding of the centered Hamiltonian.
  const Matrix& left_sum() const { return left0_.eF; }
  const Matrix& right_sum() const { return right0_.rH; }
  const std::vector<Matrix>& left_pending() const { return left0_.ek; }
  const std::vector<Matrix>& right_pending() const { return right0_.rk; }

 private:
  UniformMps mps_;
  double energy_ = 0.0;
  Matrix centered_;
  BondMpo mpo_;
  Left left0_;
  Right right0_;
};

/// Tangent gradient h_mu = <d_mu Psi | H | Psi> per site.
Vector gradient(const UniformMps& mps, const TangentBasis& basis, const SpinModel& model);

/// The same gradient as a tangent tensor Psi (before projecting onto B_mu).
SiteTensor gradient_tensor(const HamiltonianEnv& env);

/// Applies the centered infinite-chain Hamiltonian, restricted to states of
/// the ancilla embedding, to an embedded vector: bonds inside the window act
/// directly and the remaining bonds enter through ancilla operators.
Vector embedded_hamiltonian(const HamiltonianEnv& env, int N, const Vector& psi);

}  // namespace zpf
