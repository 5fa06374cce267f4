#include "zpf/zeropoint.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace zpf {

FourierBlocks fourier_blocks(const BosonQuadratic& bq, double k) {
  const int m = bq.m;
  FourierBlocks f{bq.eps[0], Matrix::Zero(m, m), Matrix::Zero(m, m)};
  for (int x = 1; x <= bq.L; ++x) {
    const cplx ph = std::polar(1.0, k * x);
    f.eps += ph * bq.eps[x] + std::conj(ph) * bq.eps[x].adjoint();
    f.delta += ph * bq.delta[x - 1];
    f.delta_bar += std::conj(ph) * bq.delta_bar[x - 1];
  }
  return f;
}

Matrix bogoliubov_matrix(const FourierBlocks& at_k, const FourierBlocks& at_minus_k) {
  const int m = static_cast<int>(at_k.eps.rows());
  const Matrix s = at_k.delta + at_minus_k.delta.transpose();
  const Matrix sbar_mk = at_minus_k.delta_bar + at_k.delta_bar.transpose();
  Matrix K(2 * m, 2 * m);
  K.topLeftCorner(m, m) = at_k.eps;
  K.topRightCorner(m, m) = s;
  K.bottomLeftCorner(m, m) = -sbar_mk;
  K.bottomRightCorner(m, m) = -at_minus_k.eps.transpose();
  return K;
}

namespace {

struct Branches {
  std::vector<cplx> plus;   // positive symplectic norm: omega(k)
  std::vector<cplx> minus;  // negated negative-norm eigenvalues: omega(-k)
  bool separated = false;
  double scale = 1.0;
};

bool by_real(cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); }

// Eigenvalues of K split by the sign of v^dagger sigma v. When the norms do
// not separate cleanly (complex or zero frequencies) the split falls back to
// the sign of the real part.
Branches branches(const Matrix& K) {
  const int m = static_cast<int>(K.rows()) / 2;
  const Eigen::ComplexEigenSolver<Matrix> es(K);
  if (es.info() != Eigen::Success) throw Error("Bogoliubov eigensolver failed");
  Branches b;
  b.scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  std::vector<cplx> plus, minus;
  for (int i = 0; i < 2 * m; ++i) {
    const Vector v = es.eigenvectors().col(i);
    const double norm = (v.head(m).squaredNorm() - v.tail(m).squaredNorm()) / v.squaredNorm();
    if (norm > 1e-8)
      plus.push_back(es.eigenvalues()(i));
    else if (norm < -1e-8)
      minus.push_back(-es.eigenvalues()(i));
  }
  b.separated = static_cast<int>(plus.size()) == m && static_cast<int>(minus.size()) == m;
  if (!b.separated) {
    std::vector<cplx> all(es.eigenvalues().data(), es.eigenvalues().data() + 2 * m);
    std::sort(all.begin(), all.end(), by_real);
    plus.assign(all.begin() + m, all.end());
    minus.clear();
    for (int i = m - 1; i >= 0; --i) minus.push_back(-all[i]);
  }
  std::sort(plus.begin(), plus.end(), by_real);
  std::sort(minus.begin(), minus.end(), by_real);
  b.plus = std::move(plus);
  b.minus = std::move(minus);
  return b;
}

}  // namespace

BogoliubovResult bogoliubov_spectrum(const FourierBlocks& at_k, const FourierBlocks& at_minus_k) {
  const Branches here = branches(bogoliubov_matrix(at_k, at_minus_k));
  const Branches there = branches(bogoliubov_matrix(at_minus_k, at_k));
  const int m = static_cast<int>(here.plus.size());
  BogoliubovResult r;
  r.omega.resize(m);
  r.omega_imag.resize(m);
  for (int i = 0; i < m; ++i) {
    r.omega(i) = here.plus[i].real();
    r.omega_imag(i) = here.plus[i].imag();
    r.max_imag = std::max({r.max_imag, std::abs(here.plus[i].imag()), std::abs(here.minus[i].imag())});
    // The negative branch at k must reproduce the positive branch at -k.
    r.pairing_defect = std::max(r.pairing_defect, std::abs(here.minus[i] - there.plus[i]));
  }
  if (here.separated && there.separated && r.pairing_defect > 1e-6 * here.scale) {
    std::ostringstream os;
    os << "Bogoliubov spectrum is not +-paired (defect " << r.pairing_defect << ")";
    throw Error(os.str());
  }
  return r;
}

Dispersion zero_point_energy(const BosonQuadratic& bq, int N_k) {
  if (N_k < 1) throw Error("zero_point_energy: N_k must be positive");
  Dispersion out;
  out.E0 = bq.E0;
  out.kgrid.resize(N_k);
  out.omega.resize(N_k, bq.m);
  out.omega_imag.resize(N_k, bq.m);
  double acc = 0.0;
  for (int i = 0; i < N_k; ++i) {
    const double k = 2.0 * std::numbers::pi * i / N_k;
    const auto fk = fourier_blocks(bq, k);
    const auto fmk = fourier_blocks(bq, -k);
    const auto r = bogoliubov_spectrum(fk, fmk);
    out.kgrid(i) = k;
    out.omega.row(i) = r.omega.transpose();
    out.omega_imag.row(i) = r.omega_imag.transpose();
    out.max_imag = std::max(out.max_imag, r.max_imag);
    acc += 0.5 * (r.omega.sum() - fk.eps.trace().real());
  }
  out.efluct = acc / N_k;
  out.e_total = out.E0 + out.efluct;
  if (out.max_imag > 1e-6) {
    out.unstable = true;
    std::ostringstream os;
    os << "complex Bogoliubov frequencies (max imaginary part " << out.max_imag << ")";
    out.warnings.push_back(os.str());
  }
  return out;
}

FluctuationResult fluctuation_correction(const UniformMps& mps, const SpinModel& model, int L,
                                         int N_k) {
  FluctuationResult r;
  if (L <= 0) L = default_window(mps);
  const TangentBasis basis(mps);
  r.bq = quadratic_coeffs(mps, basis, model, L);
  if (L >= 2 && basis.modes() > 0) {
    r.gram = build_gram(mps, basis, L);
    delta_from_prime(r.gram, r.bq);
  }
  r.disp = zero_point_energy(r.bq, N_k);
  r.disp.warnings.insert(r.disp.warnings.begin(), r.bq.warnings.begin(), r.bq.warnings.end());
  return r;
}

}  // namespace zpf
