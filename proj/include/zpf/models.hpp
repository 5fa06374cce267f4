#pragma once

// Spin-chain models with a single two-site density, and closed-form
// reference states.

#include "zpf/mps.hpp"

#include <map>
#include <string>

namespace zpf {

struct SpinOps {
  Matrix x, y, z;
};

/// Spin matrices in the basis m = s, s-1, ..., -s (index 0 is the top state).
SpinOps spin_matrices(int two_s_plus_one);

struct SpinModel {
  int d = 0;
  Matrix hdensity;  // d^2 x d^2, row index s1 * d + s2
  std::string name;
  std::map<std::string, double> params;
};

/// S.S + p (S.S)^2 on two spin-1 sites.
SpinModel blbq(double p);

/// Spin-1/2 Heisenberg chain in a staggered field h, returned in the frame
/// where every other site is rotated by pi about x. The rotated density is
/// SxSx - SySy - SzSz - (h/2)(Sz + Sz'), so the Neel state is uniform.
SpinModel heisenberg_staggered(double h);

/// Rotates the second site of the density by exp(-i pi Sx).
SpinModel sublattice_rotate(const SpinModel& model);

/// Builds a model from a name and parameter map ("blbq" with p, "heis_stag"
/// with h, optionally "rotated" = 1 for blbq).
SpinModel make_model(const std::string& name, const std::map<std::string, double>& params);

/// Exact AKLT ground state (d = 3, D = 2), canonical.
UniformMps aklt_state();

/// D = 1 product of top states |m = s> (the Neel state in the rotated frame).
UniformMps neel_state(int d);

/// Embeds a D-dimensional tensor into a larger bond dimension, filling the
/// new entries with noise of the given scale.
SiteTensor pad_tensor(const SiteTensor& a, int D_new, double noise, unsigned seed);

}  // namespace zpf
