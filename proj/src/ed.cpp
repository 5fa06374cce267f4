#include "zpf/ed.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace zpf {

namespace {

struct Entry {
  int row;
  cplx val;
};

// Nonzero entries of the density grouped by column.
std::vector<std::vector<Entry>> columns(const Matrix& h) {
  std::vector<std::vector<Entry>> out(h.cols());
  for (int c = 0; c < h.cols(); ++c)
    for (int r = 0; r < h.rows(); ++r)
      if (std::abs(h(r, c)) > 0.0) out[c].push_back({r, h(r, c)});
  return out;
}

long long checked_dim(int d, int N) {
  if (N < 2) throw Error("ed: need at least two sites");
  const double dim = std::pow(static_cast<double>(d), N);
  if (dim > kEdMaxDim) {
    std::ostringstream os;
    os << "ed: Hilbert space dimension " << dim << " exceeds the cap " << kEdMaxDim;
    throw Error(os.str());
  }
  return static_cast<long long>(std::llround(dim));
}

std::vector<std::pair<int, int>> bonds(int N, Boundary bc) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i + 1 < N; ++i) out.emplace_back(i, i + 1);
  if (bc == Boundary::Periodic && N > 2) out.emplace_back(N - 1, 0);
  return out;
}

struct Eigenpair {
  double value = 0.0;
  Vector vec;
  double residual = 0.0;
};

void orthogonalize(Vector& w, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) w -= b.dot(w) * b;
}

// Restarted Lanczos for the lowest eigenpair orthogonal to `deflate`.
Eigenpair lanczos(const LinearMap& apply, long long dim, const std::vector<Vector>& deflate,
                  unsigned seed, const EdOptions& opts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector x(dim);
  for (long long i = 0; i < dim; ++i) x(i) = cplx(g(rng), g(rng));
  orthogonalize(x, deflate);
  x.normalize();

  Eigenpair best;
  const int kmax = static_cast<int>(std::min<long long>(opts.krylov_dim, dim - deflate.size()));
  for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
    std::vector<Vector> V{x};
    std::vector<double> alpha, beta;
    for (int j = 0; j < kmax; ++j) {
      Vector w = apply(V[j]);
      alpha.push_back(V[j].dot(w).real());
      orthogonalize(w, V);
      orthogonalize(w, deflate);
      const double b = w.norm();
      if (j + 1 == kmax || b < 1e-13) break;
      beta.push_back(b);
      V.push_back(w / b);
    }
    const int k = static_cast<int>(alpha.size());
    RealMatrix T = RealMatrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(T);
    const RealVector y = es.eigenvectors().col(0);
    x = Vector::Zero(dim);
    for (int i = 0; i < k; ++i) x += y(i) * V[i];
    orthogonalize(x, deflate);
    x.normalize();
    const Vector hx = apply(x);
    const double theta = x.dot(hx).real();
    best.value = theta;
    best.vec = x;
    best.residual = (hx - theta * x).norm();
    if (best.residual < opts.tol) break;
  }
  return best;
}

Eigenpair lowest(const LinearMap& apply, long long dim, const std::vector<Vector>& deflate,
                 const EdOptions& opts) {
  Eigenpair best;
  bool have = false;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    auto e = lanczos(apply, dim, deflate, opts.seed + 7919u * r, opts);
    if (!have || e.value < best.value) best = std::move(e);
    have = true;
  }
  return best;
}

}  // namespace

std::string to_string(Boundary bc) { return bc == Boundary::Open ? "open" : "periodic"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "open") return Boundary::Open;
  if (s == "periodic") return Boundary::Periodic;
  throw Error("unknown boundary condition '" + s + "'");
}

Vector ed_apply(const SpinModel& model, int N, Boundary bc, const Vector& v) {
  const int d = model.d;
  const long long dim = checked_dim(d, N);
  if (v.size() != dim) throw Error("ed_apply: vector has wrong length");
  const auto cols = columns(model.hdensity);
  std::vector<long long> stride(N);
  stride[N - 1] = 1;
  for (int i = N - 2; i >= 0; --i) stride[i] = stride[i + 1] * d;

  Vector out = Vector::Zero(dim);
  for (const auto& [i, j] : bonds(N, bc)) {
    const long long si = stride[i];
    const long long sj = stride[j];
    for (long long idx = 0; idx < dim; ++idx) {
      const cplx amp = v(idx);
      if (amp == cplx(0.0)) continue;
      const int a = static_cast<int>((idx / si) % d);
      const int b = static_cast<int>((idx / sj) % d);
      const long long base = idx - a * si - b * sj;
      for (const auto& e : cols[a * d + b])
        out(base + (e.row / d) * si + (e.row % d) * sj) += e.val * amp;
    }
  }
  return out;
}

Matrix ed_dense_hamiltonian(const SpinModel& model, int N, Boundary bc) {
  const long long dim = checked_dim(model.d, N);
  if (dim > 4096) throw Error("ed_dense_hamiltonian: dimension too large for a dense matrix");
  Matrix h(dim, dim);
  Vector e = Vector::Zero(dim);
  for (long long c = 0; c < dim; ++c) {
    e(c) = 1.0;
    h.col(c) = ed_apply(model, N, bc, e);
    e(c) = 0.0;
  }
  return h;
}

EdResult ed_ground(const SpinModel& model, int N, Boundary bc, bool excited,
                   const EdOptions& opts) {
  const long long dim = checked_dim(model.d, N);
  const LinearMap apply = [&](const Vector& v) { return ed_apply(model, N, bc, v); };
  EdResult r;
  r.N = N;
  r.bc = bc;
  const auto g = lowest(apply, dim, {}, opts);
  r.energy = g.value;
  r.residual = g.residual;
  const int nb = static_cast<int>(bonds(N, bc).size());
  r.energy_density = r.energy / nb;
  if (excited) {
    const auto x = lowest(apply, dim, {g.vec}, opts);
    r.excited = x.value;
    r.excited_residual = x.residual;
  }
  if (r.residual > 1e-9) {
    std::ostringstream os;
    os << "ed: Lanczos did not converge (residual " << r.residual << ")";
    throw Error(os.str());
  }
  if (dim <= 1000) {
    const auto eig = hermitian_eig(ed_dense_hamiltonian(model, N, bc), 1e-10);
    r.dense_checked = true;
    r.dense_energy = eig.values(0);
    if (std::abs(r.dense_energy - r.energy) > 1e-10) {
      std::ostringstream os;
      os << "ed: Lanczos energy " << r.energy << " disagrees with dense " << r.dense_energy;
      throw Error(os.str());
    }
  }
  return r;
}

double ed_extrapolate(const SpinModel& model, const std::vector<int>& sizes) {
  if (sizes.empty()) throw Error("ed_extrapolate: no sizes given");
  std::vector<int> s = sizes;
  std::sort(s.begin(), s.end());
  std::vector<double> e;
  for (std::size_t i = s.size() < 3 ? 0 : s.size() - 3; i < s.size(); ++i)
    e.push_back(ed_ground(model, s[i], Boundary::Periodic).energy_density);
  if (e.size() < 3) return e.back();
  const double d1 = e[1] - e[0];
  const double d2 = e[2] - e[1];
  const double den = d2 - d1;
  // geometric convergence requires same-sign, shrinking differences
  if (d1 * d2 <= 0.0 || std::abs(d2) >= std::abs(d1) || den == 0.0) return e[2];
  return e[2] - d2 * d2 / den;
}

}  // namespace zpf
