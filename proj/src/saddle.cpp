#include "zpf/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace zpf {

namespace {

struct Probe {
  UniformMps mps;
  double energy = 0.0;
  SiteTensor descent;  // preconditioned steepest-descent direction
  double grad_inf = 0.0;
  double slope = 0.0;  // dE/deta along `descent` at eta = 0
};

// Energy, gradient coefficients h = V^dagger Psi Gamma^{-1/2} and the
// descent direction -V V^dagger Psi (Gamma + delta)^{-1}.
Probe probe(const UniformMps& mps, const SpinModel& model) {
  Probe p;
  p.mps = mps;
  const HamiltonianEnv env(mps, model);
  p.energy = env.energy();
  const int d = mps.d();
  const int D = mps.D();
  const Matrix psi = gradient_tensor(env).stacked();
  const Matrix v = orthogonal_complement(mps.A.stacked());
  const Matrix vpsi = v.adjoint() * psi;
  const Matrix h = vpsi * psd_power(mps.gamma, -0.5);
  p.grad_inf = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
  const double delta = std::clamp(h.norm(), 1e-12, 1e-4);
  const Matrix reg = mps.gamma + delta * Matrix::Identity(D, D);
  const Matrix x = -(v * vpsi) * reg.inverse();
  p.descent = SiteTensor::from_stacked(x, d);
  // dE = 2 Re <X, Psi>
  p.slope = 2.0 * std::real((x.adjoint() * psi).trace());
  return p;
}

UniformMps move(const UniformMps& mps, const SiteTensor& dir, double eta) {
  SiteTensor a = mps.A;
  for (int s = 0; s < a.d; ++s) a.s[s] += eta * dir.s[s];
  CanonicalizeOptions copt;
  copt.compute_xi = false;
  copt.right_guess = &mps.gamma;
  return canonicalize(a, copt);
}

double with_xi(UniformMps& mps) {
  if (mps.D() == 1) return mps.xi = 0.0;
  const auto spec = transfer_spectrum(mps, 2);
  const double r = std::abs(spec(1));
  mps.xi = r > 0.0 ? -1.0 / std::log(r) : 0.0;
  return mps.xi;
}

SaddleReport descend(const SpinModel& model, UniformMps start, double tol, int max_iter) {
  Probe cur = probe(start, model);
  double eta = 0.5;
  SaddleReport rep;
  int it = 0;
  SiteTensor prev_a, prev_dir;
  bool have_prev = false;
  for (; it < max_iter && cur.grad_inf >= tol; ++it) {
    // Barzilai-Borwein guess from the last accepted step, then backtrack.
    if (have_prev) {
      const SiteTensor s = cur.mps.A - prev_a;
      const SiteTensor y = prev_dir - cur.descent;  // gradient difference
      const double sy = std::real(inner(s, y));
      const double ss = std::real(inner(s, s));
      if (sy > 0.0 && std::isfinite(ss / sy)) eta = std::clamp(ss / sy, 1e-4, 50.0);
    }
    bool accepted = false;
    for (int trial = 0; trial < 40; ++trial) {
      UniformMps next;
      try {
        next = move(cur.mps, cur.descent, eta);
      } catch (const Error&) {
        eta *= 0.5;
        continue;
      }
      const double e = energy_density(next, model);
      if (e <= cur.energy + 1e-4 * eta * cur.slope + 1e-13) {
        prev_a = cur.mps.A;
        prev_dir = cur.descent;
        have_prev = true;
        cur = probe(next, model);
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;
  }
  rep.mps = cur.mps;
  with_xi(rep.mps);
  rep.energy_density = cur.energy;
  rep.grad_norm = cur.grad_inf;
  rep.iterations = it;
  rep.converged = cur.grad_inf < tol;
  return rep;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

SaddleReport refine_saddle(const SpinModel& model, const UniformMps& start,
                           const SaddleOptions& opts) {
  if (start.d() != model.d) throw Error("find_saddle: physical dimension mismatch");
  return descend(model, start, opts.tol, opts.max_iter);
}

SaddleReport find_saddle(const SpinModel& model, int D, const SaddleOptions& opts) {
  if (D < 1) throw Error("find_saddle: bond dimension must be positive");
  std::vector<int> stages;
  for (int g : opts.growth)
    if (g >= 1 && g < D && (stages.empty() || g > stages.back())) stages.push_back(g);
  stages.push_back(D);

  SiteTensor a;
  if (opts.init) {
    a = *opts.init;
    if (a.d != model.d) throw Error("find_saddle: initial tensor has wrong d");
  } else {
    a = SiteTensor::random(model.d, stages.front(), opts.seed);
  }
  SaddleReport rep;
  int total = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (a.D < stages[i]) a = pad_tensor(a, stages[i], opts.pad_noise, opts.seed + 101 * i);
    const bool last = i + 1 == stages.size();
    rep = descend(model, canonicalize(a), last ? opts.tol : opts.stage_tol,
                  last ? opts.max_iter : opts.stage_max_iter);
    total += rep.iterations;
    a = rep.mps.A;
  }
  rep.iterations = total;
  return rep;
}

std::string reference_key(const SpinModel& model, int D_ref, double tol) {
  std::ostringstream os;
  os << std::setprecision(17) << model.name;
  for (const auto& [k, v] : model.params) os << ';' << k << '=' << v;
  os << ";D=" << D_ref << ";tol=" << tol;
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(os.str());
  return hex.str();
}

double reference_energy(const SpinModel& model, int D_ref, const ReferenceOptions& opts) {
  namespace fs = std::filesystem;
  fs::path file;
  if (!opts.cache_dir.empty()) {
    file = fs::path(opts.cache_dir) / ("ref_" + reference_key(model, D_ref, opts.tol) + ".txt");
    std::ifstream in(file);
    if (in) {
      try {
        load_tensor(in);
        double e = 0.0;
        if (in >> e) return e;
      } catch (const Error&) {
      }
    }
  }
  SaddleOptions so;
  so.seed = opts.seed;
  so.tol = opts.tol;
  so.max_iter = opts.max_iter;
  so.stage_tol = std::max(opts.tol, 1e-5);
  so.stage_max_iter = opts.max_iter / 2;
  for (int g = 2; g < D_ref; g *= 2) so.growth.push_back(g);
  const auto rep = find_saddle(model, D_ref, so);

  if (!file.empty()) {
    fs::create_directories(file.parent_path());
    const fs::path tmp = file.string() + ".tmp" + std::to_string(fnv1a(file.string()) % 100000);
    {
      std::ofstream out(tmp);
      save_tensor(out, rep.mps.A);
      out << std::setprecision(17) << rep.energy_density << '\n';
    }
    std::error_code ec;
    if (!fs::exists(file)) fs::rename(tmp, file, ec);
    fs::remove(tmp, ec);
  }
  return rep.energy_density;
}

}  // namespace zpf
