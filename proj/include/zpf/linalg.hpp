#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zpf {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Raised for every numerical or contract failure inside the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative eigenvalue cutoff shared by every rank decision in the library.
inline constexpr double kRankTol = 1e-10;

/// Throws unless every entry is finite.
void require_finite(const Matrix& m, const std::string& what);

/// ||m - m^dagger||_F / max(1, ||m||_F).
double hermiticity_defect(const Matrix& m);

struct HermitianEig {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix; rejects inputs whose relative
/// Hermiticity defect exceeds `herm_tol`.
HermitianEig hermitian_eig(const Matrix& m, double herm_tol = 1e-12);

struct PseudoInverse {
  Matrix pinv;
  int rank = 0;
};

/// Moore-Penrose inverse of a Hermitian matrix. Eigenvalues with
/// |lambda| <= rel_tol * max|lambda| are treated as exact zeros.
PseudoInverse pseudo_inverse(const Matrix& m, double rel_tol = kRankTol);

/// Eigenvalues of a general square matrix (unordered).
Vector general_eig(const Matrix& m);

/// m^power for Hermitian PSD m, with eigenvalues below rel_tol * max dropped
/// (so negative powers give the pseudo-inverse root).
Matrix psd_power(const Matrix& m, double power, double rel_tol = kRankTol);

/// Columns of an orthonormal basis for the orthogonal complement of the
/// column space of an isometry `q` (q^dagger q = 1).
Matrix orthogonal_complement(const Matrix& q);

/// Smallest singular value.
double min_singular_value(const Matrix& m);

using LinearMap = std::function<Vector(const Vector&)>;

struct SolveResult {
  Vector x;
  double residual = 0.0;  // ||b - A x|| / ||b||
  int iterations = 0;
  bool converged = false;
};

/// Restarted GMRES for a matrix-free operator.
SolveResult gmres(const LinearMap& apply, const Vector& b, double tol,
                  int restart = 40, int max_iter = 2000,
                  const Vector* x0 = nullptr);

struct RitzPairs {
  Vector values;   // sorted by descending modulus
  Matrix vectors;  // matching columns
};

/// Leading `count` eigenpairs (by modulus) of a matrix-free operator on C^n,
/// computed with explicitly restarted Arnoldi. Only the first `converged`
/// pairs (all when negative) must meet `tol`; the rest are rough estimates.
RitzPairs arnoldi_eigs(const LinearMap& apply, int n, int count,
                       const Vector& start, double tol = 1e-13,
                       int krylov_dim = 40, int max_restarts = 200, int converged = -1);

}  // namespace zpf
