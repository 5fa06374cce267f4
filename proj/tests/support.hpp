#pragma once

// Oracles and random problem generators shared by the unit and acceptance
// tests.

#include "zpf/boson.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace zpf::testing {

inline Matrix random_complex(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline double spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

// Colpa: H = K^dagger K by Cholesky; the eigenvalues of K sigma K^dagger
// are the +-omega pairs of the paraunitary problem. Empty when H is not
// positive definite.
inline std::vector<double> colpa(const Matrix& A, const Matrix& S) {
  const int m = static_cast<int>(A.rows());
  Matrix H(2 * m, 2 * m);
  H << A, S, S.conjugate(), A.transpose();
  const Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) return {};
  const Matrix K = llt.matrixU();
  Matrix sigma = Matrix::Identity(2 * m, 2 * m);
  sigma.bottomRightCorner(m, m) *= -1.0;
  const RealVector ev = Eigen::SelfAdjointEigenSolver<Matrix>(K * sigma * K.adjoint()).eigenvalues();
  std::vector<double> pos;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > 0) pos.push_back(ev(i));
  std::sort(pos.begin(), pos.end());
  return pos;
}

// Stable single-k problem: Hermitian A shifted above the pairing norm and a
// symmetric pairing block S.
struct StableBlock {
  Matrix A;
  Matrix S;
};

inline StableBlock random_stable_block(int m, std::mt19937& rng) {
  StableBlock b;
  b.A = random_complex(m, rng);
  b.A = 0.5 * (b.A + b.A.adjoint()).eval();
  b.S = 0.5 * random_complex(m, rng);
  b.S = 0.5 * (b.S + b.S.transpose()).eval();
  const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(b.A).eigenvalues()(0);
  b.A += (spectral_norm(b.S) - lo + 0.5) * Matrix::Identity(m, m);
  return b;
}

// Random stable quadratic problem with couplings up to distance L.
inline BosonQuadratic random_quadratic(int m, int L, std::mt19937& rng) {
  BosonQuadratic bq;
  bq.m = m;
  bq.L = L;
  double bound = 0.0;
  for (int x = 0; x <= L; ++x) {
    Matrix e = 0.2 * random_complex(m, rng);
    if (x == 0) e = 0.5 * (e + e.adjoint()).eval();
    bound += (x == 0 ? 1.0 : 2.0) * spectral_norm(e);
    bq.eps.push_back(e);
  }
  for (int x = 1; x <= L; ++x) {
    const Matrix d = 0.2 * random_complex(m, rng);
    bound += 2.0 * spectral_norm(d);
    bq.delta.push_back(d);
    bq.delta_bar.push_back(d.conjugate());
    bq.delta_prime.push_back(d);
  }
  bq.eps[0] += (bound + 0.3) * Matrix::Identity(m, m);
  return bq;
}

inline BosonQuadratic scaled(BosonQuadratic bq, double s) {
  for (auto& d : bq.delta) d *= s;
  for (auto& d : bq.delta_bar) d *= s;
  return bq;
}

}  // namespace zpf::testing
