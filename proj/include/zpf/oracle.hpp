#pragma once

// Dense finite-chain checks of the infinite-chain contractions. States with
// derivatives on a window of N sites are built as explicit vectors and every
// overlap or Hamiltonian element is recomputed by brute force.

#include "zpf/boson.hpp"

namespace zpf {

struct OracleReport {
  int N = 0;
  int anchor = 0;
  int max_x = 0;
  double M_dev = 0.0;       // max |M^(x) - dense|
  double G_dev = 0.0;       // max |G^(xy) - dense|
  double eps_dev = 0.0;     // max |eps^(x) - dense|
  double dprime_dev = 0.0;  // max |Delta'^(x) - dense (projected)|
  double recon_dev = 0.0;   // max |Gtilde Delta - Delta'| on the anchored index
  double max_dev() const;
  bool pass(double tol) const { return max_dev() < tol; }
};

/// Compares gram and bq against dense vectors of an N-site window with the
/// anchor `margin` sites from the left end and pairs reaching at most
/// `margin` sites from the right end. bq must come from quadratic_coeffs with
/// delta_from_prime applied using `gram`.
OracleReport finite_chain_oracle(const UniformMps& mps, const TangentBasis& basis,
                                 const SpinModel& model, const GramData& gram,
                                 const BosonQuadratic& bq, int N, int margin);

}  // namespace zpf
