#pragma once

// Variational search for translation-invariant saddle points on the MPS
// manifold and large-bond-dimension reference energies.

#include "zpf/environment.hpp"

#include <optional>
#include <string>

namespace zpf {

struct SaddleOptions {
  unsigned seed = 7;
  int max_iter = 20000;
  double tol = 1e-8;  // on max_mu |h_mu|
  /// Starting tensor; random complex Gaussian when empty.
  std::optional<SiteTensor> init;
  /// Bond dimensions visited before D, each seeding the next by padding.
  std::vector<int> growth;
  double pad_noise = 1e-3;
  /// Optimization at intermediate growth stages stops at this tolerance.
  double stage_tol = 1e-6;
  int stage_max_iter = 4000;
};

struct SaddleReport {
  UniformMps mps;
  double energy_density = 0.0;
  double grad_norm = 0.0;  // max_mu |h_mu|
  int iterations = 0;
  bool converged = false;
};

/// Tangent-space gradient descent with backtracking. Each step moves along
/// -sum_mu h_mu B_mu (preconditioned by the inverse right environment) and
/// re-canonicalizes; accepted steps never raise the energy.
SaddleReport find_saddle(const SpinModel& model, int D, const SaddleOptions& opts = {});

/// Runs find_saddle from an already canonical state.
SaddleReport refine_saddle(const SpinModel& model, const UniformMps& start,
                           const SaddleOptions& opts);

struct ReferenceOptions {
  double tol = 1e-6;
  int max_iter = 6000;
  unsigned seed = 7;
  std::string cache_dir;  // empty disables the disk cache
};

/// Energy density at a large bond dimension, reached through a doubling
/// schedule of bond dimensions. Results are cached on disk when requested.
double reference_energy(const SpinModel& model, int D_ref, const ReferenceOptions& opts = {});

/// Cache key of a reference computation.
std::string reference_key(const SpinModel& model, int D_ref, double tol);

}  // namespace zpf
