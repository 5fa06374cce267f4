#pragma once

// Momentum-space Bogoliubov problem of the quadratic boson Hamiltonian and
// its zero-point energy.
//
// Fourier convention: a^dagger(i) = N^{-1/2} sum_k e^{-iki} a^dagger(k), so
// that a^dagger(i) a(i + x) picks up e^{ikx}.

#include "zpf/boson.hpp"

namespace zpf {

struct FourierBlocks {
  Matrix eps;        // sum_x epsilon^(x) e^{ikx}, x = -L..L
  Matrix delta;      // sum_{x>0} Delta^(x) e^{ikx}
  Matrix delta_bar;  // sum_{x>0} Deltabar^(x) e^{-ikx}
};

FourierBlocks fourier_blocks(const BosonQuadratic& bq, double k);

struct BogoliubovResult {
  RealVector omega;       // positive-norm branch, ascending real parts
  RealVector omega_imag;  // imaginary parts of the same eigenvalues
  double max_imag = 0.0;
  double pairing_defect = 0.0;  // |negative branch at k + positive branch at -k|
};

/// Bogoliubov matrix
///   K(k) = [[eps_k, S_k], [-Sbar_{-k}, -eps_{-k}^T]]
/// with S_k = delta_k + delta_{-k}^T and Sbar_k = deltabar_k + deltabar_{-k}^T
/// for H = sum_k a^dagger eps_k a + 1/2 sum_k (a^dagger(k) S_k a^dagger(-k) + h.c.-like).
/// The spectrum of K(k) is {omega_n(k)} together with {-omega_n(-k)}; the two
/// branches are told apart by the sign of the symplectic norm v^dagger sigma v.
/// Throws when the branches at k and -k disagree by more than 1e-6 (relative).
Matrix bogoliubov_matrix(const FourierBlocks& at_k, const FourierBlocks& at_minus_k);
BogoliubovResult bogoliubov_spectrum(const FourierBlocks& at_k, const FourierBlocks& at_minus_k);

struct Dispersion {
  RealVector kgrid;
  RealMatrix omega;       // N_k x m
  RealMatrix omega_imag;  // N_k x m
  double max_imag = 0.0;
  bool unstable = false;
  double efluct = 0.0;
  double E0 = 0.0;
  double e_total = 0.0;
  std::vector<std::string> warnings;
};

/// efluct = (1/N_k) sum_k 1/2 (sum_n omega_n(k) - Tr eps_k) on a uniform grid.
Dispersion zero_point_energy(const BosonQuadratic& bq, int N_k = 512);

/// Quadratic coefficients, Gram correction and zero-point energy in one call.
struct FluctuationResult {
  BosonQuadratic bq;
  GramData gram;
  Dispersion disp;
};
FluctuationResult fluctuation_correction(const UniformMps& mps, const SpinModel& model, int L = 0,
                                         int N_k = 512);

}  // namespace zpf
