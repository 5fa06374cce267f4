#pragma once

// Exact diagonalization of finite chains built from a two-site density.
// Basis states are base-d integers with site 0 as the most significant digit.

#include "zpf/models.hpp"

#include <string>

namespace zpf {

enum class Boundary { Open, Periodic };

std::string to_string(Boundary bc);
Boundary parse_boundary(const std::string& s);

struct EdOptions {
  unsigned seed = 11;
  int restarts = 3;      // independent Krylov runs; the lowest result wins
  int krylov_dim = 40;   // basis size before a restart
  int max_cycles = 400;
  double tol = 1e-10;    // residual target
};

struct EdResult {
  int N = 0;
  Boundary bc = Boundary::Open;
  double energy = 0.0;
  double energy_density = 0.0;  // per bond: N periodic, N - 1 open
  double residual = 0.0;
  double excited = 0.0;         // first excited level (when requested)
  double excited_residual = 0.0;
  bool dense_checked = false;   // compared with full diagonalization
  double dense_energy = 0.0;
};

/// Hard cap on d^N for the matrix-free solver.
inline constexpr double kEdMaxDim = 2e6;

/// Matrix-free H v for the chain.
Vector ed_apply(const SpinModel& model, int N, Boundary bc, const Vector& v);

/// Dense Hamiltonian, only for d^N <= 4096.
Matrix ed_dense_hamiltonian(const SpinModel& model, int N, Boundary bc);

/// Ground state (and first excited level with `excited`) by restarted Lanczos
/// with full reorthogonalization. Whenever d^N <= 1000 the result is also
/// checked against dense diagonalization and an error is raised on a
/// mismatch above 1e-10.
EdResult ed_ground(const SpinModel& model, int N, Boundary bc, bool excited = false,
                   const EdOptions& opts = {});

/// Periodic energy density extrapolated from the three largest sizes with a
/// Shanks transform (gapped chains converge geometrically in N). Falls back
/// to the largest size when the sequence is not geometric.
double ed_extrapolate(const SpinModel& model, const std::vector<int>& sizes);

}  // namespace zpf
