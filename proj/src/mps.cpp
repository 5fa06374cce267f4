#include "zpf/mps.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace zpf {

namespace {

// Dense eigen-solves are used below this transfer-space dimension.
constexpr int kDenseTransfer = 16;
constexpr int kDenseGeometric = 64;
constexpr int kDenseSpectrum = 400;

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// vec(sum_s A^s R A^s^dagger) as a matrix on column-major vec(R).
Matrix right_superop(const SiteTensor& a) {
  const int D = a.D;
  Matrix out = Matrix::Zero(D * D, D * D);
  for (const auto& m : a.s) out += kron(m.conjugate(), m);
  return out;
}

struct FixedPoint {
  Matrix vec;
  cplx value;
  cplx second{0.0, 0.0};
};

FixedPoint dominant(const std::function<Matrix(const Matrix&)>& op, const Matrix& dense,
                    int D, const Matrix* guess) {
  const int n = D * D;
  FixedPoint out;
  if (n <= kDenseTransfer) {
    Eigen::ComplexEigenSolver<Matrix> es(dense);
    if (es.info() != Eigen::Success) throw Error("canonicalize: eigensolver failed");
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return std::abs(es.eigenvalues()(x)) > std::abs(es.eigenvalues()(y));
    });
    out.value = es.eigenvalues()(order[0]);
    out.second = n > 1 ? es.eigenvalues()(order[1]) : cplx(0.0);
    out.vec = unvec(es.eigenvectors().col(order[0]), D);
    return out;
  }
  Vector start = guess ? vec(*guess) : vec(Matrix::Identity(D, D));
  const LinearMap apply = [&](const Vector& v) { return vec(op(unvec(v, D))); };
  const auto ritz = arnoldi_eigs(apply, n, 2, start, 1e-13, 30, 400, 1);
  out.value = ritz.values(0);
  out.second = ritz.values.size() > 1 ? ritz.values(1) : cplx(0.0);
  out.vec = unvec(ritz.vectors.col(0), D);
  return out;
}

// Fix the phase of a fixed point so it is Hermitian with unit trace.
Matrix hermitian_normalized(Matrix m) {
  const cplx tr = m.trace();
  if (std::abs(tr) < 1e-300) throw Error("non-injective MPS");
  m /= tr;
  return 0.5 * (m + m.adjoint());
}

}  // namespace

SiteTensor::SiteTensor(int d_, int D_) : d(d_), D(D_), s(d_, Matrix::Zero(D_, D_)) {}

SiteTensor SiteTensor::random(int d, int D, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  SiteTensor t(d, D);
  for (auto& m : t.s)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double re = g(rng);
        const double im = g(rng);
        m(i, j) = cplx(re, im);
      }
  return t;
}

Matrix SiteTensor::stacked() const {
  Matrix out(d * D, D);
  for (int k = 0; k < d; ++k) out.block(k * D, 0, D, D) = s[k];
  return out;
}

SiteTensor SiteTensor::from_stacked(const Matrix& m, int d) {
  const int D = static_cast<int>(m.cols());
  if (m.rows() != d * D) throw Error("from_stacked: shape mismatch");
  SiteTensor t(d, D);
  for (int k = 0; k < d; ++k) t.s[k] = m.block(k * D, 0, D, D);
  return t;
}

SiteTensor& SiteTensor::operator+=(const SiteTensor& o) {
  for (int k = 0; k < d; ++k) s[k] += o.s[k];
  return *this;
}

SiteTensor& SiteTensor::operator-=(const SiteTensor& o) {
  for (int k = 0; k < d; ++k) s[k] -= o.s[k];
  return *this;
}

SiteTensor& SiteTensor::operator*=(cplx c) {
  for (auto& m : s) m *= c;
  return *this;
}

double SiteTensor::norm() const {
  double acc = 0.0;
  for (const auto& m : s) acc += m.squaredNorm();
  return std::sqrt(acc);
}

SiteTensor operator+(SiteTensor a, const SiteTensor& b) { return a += b; }
SiteTensor operator-(SiteTensor a, const SiteTensor& b) { return a -= b; }
SiteTensor operator*(cplx c, SiteTensor a) { return a *= c; }

cplx inner(const SiteTensor& x, const SiteTensor& y) {
  cplx acc = 0.0;
  for (int k = 0; k < x.d; ++k) acc += x.s[k].cwiseProduct(y.s[k].conjugate()).sum();
  return std::conj(acc);
}

Matrix left_step(const SiteTensor& bra, const SiteTensor& ket, const Matrix& e) {
  Matrix out = Matrix::Zero(bra.D, ket.D);
  for (int k = 0; k < bra.d; ++k) out.noalias() += bra.s[k].adjoint() * (e * ket.s[k]);
  return out;
}

Matrix left_step(const SiteTensor& bra, const SiteTensor& ket, const Matrix& e,
                 const Matrix& op) {
  Matrix out = Matrix::Zero(bra.D, ket.D);
  for (int t = 0; t < ket.d; ++t) {
    const Matrix et = e * ket.s[t];
    for (int k = 0; k < bra.d; ++k) {
      const cplx w = op(k, t);
      if (w != cplx(0.0)) out.noalias() += w * (bra.s[k].adjoint() * et);
    }
  }
  return out;
}

Matrix right_step(const SiteTensor& bra, const SiteTensor& ket, const Matrix& r) {
  Matrix out = Matrix::Zero(ket.D, bra.D);
  for (int k = 0; k < bra.d; ++k) out.noalias() += ket.s[k] * (r * bra.s[k].adjoint());
  return out;
}

Matrix right_step(const SiteTensor& bra, const SiteTensor& ket, const Matrix& r,
                  const Matrix& op) {
  Matrix out = Matrix::Zero(ket.D, bra.D);
  for (int k = 0; k < bra.d; ++k) {
    const Matrix rk = r * bra.s[k].adjoint();
    for (int t = 0; t < ket.d; ++t) {
      const cplx w = op(k, t);
      if (w != cplx(0.0)) out.noalias() += w * (ket.s[t] * rk);
    }
  }
  return out;
}

Matrix transfer_superop(const SiteTensor& bra, const SiteTensor& ket) {
  // vec(X^dagger E Y) = (Y^T kron X^dagger) vec(E)
  Matrix out = Matrix::Zero(bra.D * ket.D, bra.D * ket.D);
  for (int k = 0; k < bra.d; ++k) out += kron(ket.s[k].transpose(), bra.s[k].adjoint());
  return out;
}

UniformMps canonicalize(const SiteTensor& raw, const CanonicalizeOptions& opt) {
  const int d = raw.d;
  const int D = raw.D;
  if (d < 1 || D < 1 || static_cast<int>(raw.s.size()) != d)
    throw Error("canonicalize: malformed tensor");
  for (const auto& m : raw.s) require_finite(m, "canonicalize");

  SiteTensor a = raw;
  double ratio = 0.0;
  // Two passes: the second polishes round-off left by the first gauge transform.
  for (int pass = 0; pass < 2; ++pass) {
    const auto op = [&](const Matrix& e) { return left_step(a, a, e); };
    const Matrix dense = D * D <= kDenseTransfer ? transfer_superop(a, a) : Matrix();
    const auto fp = dominant(op, dense, D, pass == 0 ? opt.left_guess : nullptr);
    if (std::abs(fp.value) < 1e-300) throw Error("non-injective MPS");
    if (pass == 0) ratio = std::abs(fp.second) / std::abs(fp.value);
    if (D > 1 && std::abs(fp.second) / std::abs(fp.value) > 1.0 - 1e-8)
      throw Error("non-injective MPS");
    const Matrix e = hermitian_normalized(fp.vec);
    const auto eig = hermitian_eig(e, 1e-8);
    const double top = eig.values.maxCoeff();
    if (top <= 0.0 || eig.values.minCoeff() < 1e-12 * top)
      throw Error("rank-deficient gauge");
    const RealVector sq = eig.values.cwiseSqrt();
    const Matrix x = eig.vectors * sq.asDiagonal() * eig.vectors.adjoint();
    const Matrix xinv = eig.vectors * sq.cwiseInverse().asDiagonal() * eig.vectors.adjoint();
    const double scale = 1.0 / std::sqrt(std::abs(fp.value));
    for (auto& m : a.s) m = scale * (x * m * xinv);
    Matrix id_check = left_step(a, a, Matrix::Identity(D, D));
    if ((id_check - Matrix::Identity(D, D)).norm() < 1e-14) break;
  }

  UniformMps out;
  out.A = a;
  const auto rop = [&](const Matrix& r) { return right_step(a, a, r); };
  const Matrix rdense = D * D <= kDenseTransfer ? right_superop(a) : Matrix();
  const Matrix eye = Matrix::Identity(D, D);
  const auto rfp = dominant(rop, rdense, D, opt.right_guess ? opt.right_guess : &eye);
  out.gamma = hermitian_normalized(rfp.vec);
  out.xi = 0.0;
  if (opt.compute_xi && D > 1 && ratio > 0.0) out.xi = -1.0 / std::log(ratio);
  return out;
}

Vector transfer_spectrum(const UniformMps& mps, int count) {
  const int D = mps.D();
  const int n = D * D;
  if (count < 1 || count > n) throw Error("transfer_spectrum: count out of range");
  Vector vals;
  if (n <= kDenseSpectrum) {
    vals = general_eig(transfer_superop(mps.A, mps.A));
  } else {
    const LinearMap apply = [&](const Vector& v) {
      return vec(left_step(mps.A, mps.A, unvec(v, D)));
    };
    vals = arnoldi_eigs(apply, n, count, vec(Matrix::Identity(D, D)), 1e-12,
                        std::max(40, 3 * count), 400)
               .values;
  }
  std::vector<cplx> v(vals.data(), vals.data() + vals.size());
  std::stable_sort(v.begin(), v.end(),
                   [](cplx x, cplx y) { return std::abs(x) > std::abs(y); });
  Vector out(count);
  for (int i = 0; i < count; ++i) out(i) = v[i];
  return out;
}

CanonicalResiduals canonical_residuals(const UniformMps& mps) {
  const int D = mps.D();
  CanonicalResiduals r;
  const Matrix eye = Matrix::Identity(D, D);
  r.left_canonical = (left_step(mps.A, mps.A, eye) - eye).norm();
  r.gamma_fixed_point = (right_step(mps.A, mps.A, mps.gamma) - mps.gamma).norm();
  r.gamma_hermitian = (mps.gamma - mps.gamma.adjoint()).norm();
  r.gamma_trace = std::abs(mps.gamma.trace() - cplx(1.0));
  r.gamma_min_eig = hermitian_eig(mps.gamma, 1e-8).values.minCoeff();
  return r;
}

Matrix geometric_sum(const UniformMps& mps, const Matrix& v, Side side, bool center) {
  const int D = mps.D();
  const Matrix& g = mps.gamma;
  const Matrix eye = Matrix::Identity(D, D);
  // fixed point |f) and functional (l| of the chosen side
  const Matrix& fix = side == Side::Left ? eye : g;
  const auto functional = [&](const Matrix& x) {
    return side == Side::Left ? (x * g).trace() : x.trace();
  };
  const auto step = [&](const Matrix& x) {
    return side == Side::Left ? left_step(mps.A, mps.A, x) : right_step(mps.A, mps.A, x);
  };

  Matrix vc = v;
  const cplx overlap = functional(v);
  if (center) {
    vc -= overlap * fix;
  } else if (std::abs(overlap) > 1e-10 * std::max(1.0, v.norm())) {
    std::ostringstream os;
    os << "geometric_sum: input not centered (overlap " << std::abs(overlap) << ")";
    throw Error(os.str());
  }
  if (vc.norm() == 0.0) return Matrix::Zero(D, D);

  const auto apply = [&](const Matrix& x) -> Matrix {
    return x - step(x) + functional(x) * fix;
  };
  Matrix x;
  if (D * D <= kDenseGeometric) {
    Matrix t = side == Side::Left ? transfer_superop(mps.A, mps.A) : right_superop(mps.A);
    Matrix sys = Matrix::Identity(D * D, D * D) - t;
    const Vector fvec = vec(fix);
    // functional as a row acting on column-major vec
    const Vector lrow = side == Side::Left ? vec(Matrix(g.transpose())) : vec(eye);
    sys += fvec * lrow.transpose();
    x = unvec(sys.partialPivLu().solve(vec(vc)), D);
  } else {
    const LinearMap lin = [&](const Vector& u) { return vec(apply(unvec(u, D))); };
    const auto sol = gmres(lin, vec(vc), 1e-13, 60, 6000);
    x = unvec(sol.x, D);
  }
  const double res = (apply(x) - vc).norm();
  if (res > 1e-10 * std::max(1.0, v.norm())) {
    std::ostringstream os;
    os << "geometric_sum: solve did not converge (residual " << res << ")";
    throw Error(os.str());
  }
  return x;
}

TangentBasis::TangentBasis(const UniformMps& mps)
    : d_(mps.d()), D_(mps.D()), modes_(mps.D() * mps.D() * (mps.d() - 1)) {
  V_ = orthogonal_complement(mps.A.stacked());
  g_inv_sqrt_ = psd_power(mps.gamma, -0.5);
  g_sqrt_ = psd_power(mps.gamma, 0.5);
  if (D_ <= 16) {
    cache_.reserve(modes_);
    for (int mu = 0; mu < modes_; ++mu) {
      const Matrix st = V_.col(row_of(mu)) * g_inv_sqrt_.row(col_of(mu));
      cache_.push_back(SiteTensor::from_stacked(st, d_));
    }
  }
}

SiteTensor TangentBasis::tensor(int mu) const {
  if (mu < 0 || mu >= modes_) throw Error("TangentBasis: mode out of range");
  if (!cache_.empty()) return cache_[mu];
  const Matrix st = V_.col(row_of(mu)) * g_inv_sqrt_.row(col_of(mu));
  return SiteTensor::from_stacked(st, d_);
}

Vector TangentBasis::coefficients(const SiteTensor& f) const {
  const Matrix c = V_.adjoint() * f.stacked() * g_inv_sqrt_;
  Vector out(modes_);
  for (int mu = 0; mu < modes_; ++mu) out(mu) = c(row_of(mu), col_of(mu));
  return out;
}

SiteTensor TangentBasis::combine(const Vector& c) const {
  if (c.size() != modes_) throw Error("TangentBasis::combine: length mismatch");
  Matrix cm((d_ - 1) * D_, D_);
  for (int mu = 0; mu < modes_; ++mu) cm(row_of(mu), col_of(mu)) = c(mu);
  return SiteTensor::from_stacked(V_ * cm * g_inv_sqrt_, d_);
}

std::vector<int> embed_dims(const UniformMps& mps, int N) {
  std::vector<int> dims;
  dims.push_back(mps.D());
  for (int i = 0; i < N; ++i) dims.push_back(mps.d());
  dims.push_back(mps.D());
  return dims;
}

Vector embed_window(const UniformMps& mps, int N, std::span<const Insertion> inserts) {
  const int d = mps.d();
  const int D = mps.D();
  if (N < 1) throw Error("finite_chain_embed: N must be positive");
  double states = std::pow(static_cast<double>(d), N);
  if (states > 59049.0 || states * D * D > 8.5e6)
    throw Error("finite_chain_embed: chain too large for a dense vector");
  std::vector<const SiteTensor*> site(N, &mps.A);
  std::set<int> seen;
  for (const auto& ins : inserts) {
    if (ins.site < 0 || ins.site >= N) throw Error("finite_chain_embed: site out of range");
    if (!seen.insert(ins.site).second)
      throw Error("finite_chain_embed: duplicate derivative site");
    site[ins.site] = &ins.tensor;
  }
  // rows: (a, s_0, ..., s_j), columns: current right bond
  Matrix w = Matrix::Identity(D, D);
  for (int j = 0; j < N; ++j) {
    Matrix next(w.rows() * d, D);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (int s = 0; s < d; ++s) next.row(r * d + s) = w.row(r) * site[j]->s[s];
    w = std::move(next);
  }
  const Matrix g_sqrt = psd_power(mps.gamma, 0.5);
  w = w * g_sqrt;
  Vector out(w.size());
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (int b = 0; b < D; ++b) out(r * D + b) = w(r, b);
  return out;
}

Vector finite_chain_embed(const UniformMps& mps, const TangentBasis& basis, int N,
                          std::span<const Derivative> derivs) {
  std::vector<Insertion> ins;
  ins.reserve(derivs.size());
  for (const auto& dv : derivs) ins.push_back({dv.site, basis.tensor(dv.mode)});
  return embed_window(mps, N, ins);
}

Vector apply_on_legs(const Vector& psi, std::span<const int> dims, int leg, int count,
                     const Matrix& op) {
  long left = 1, mid = 1, right = 1;
  for (int i = 0; i < static_cast<int>(dims.size()); ++i) {
    if (i < leg) left *= dims[i];
    else if (i < leg + count) mid *= dims[i];
    else right *= dims[i];
  }
  if (left * mid * right != psi.size()) throw Error("apply_on_legs: dimension mismatch");
  if (op.rows() != mid || op.cols() != mid) throw Error("apply_on_legs: operator shape");
  Vector out(psi.size());
  for (long l = 0; l < left; ++l) {
    // block (mid x right), row-major in psi
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        in(psi.data() + l * mid * right, mid, right);
    Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> res(
        out.data() + l * mid * right, mid, right);
    res.noalias() = op * in;
  }
  return out;
}

void save_tensor(std::ostream& os, const SiteTensor& t) {
  os << t.d << ' ' << t.D << '\n';
  os << std::setprecision(17);
  for (int s = 0; s < t.d; ++s)
    for (int a = 0; a < t.D; ++a)
      for (int b = 0; b < t.D; ++b)
        os << t.s[s](a, b).real() << ' ' << t.s[s](a, b).imag() << '\n';
}

SiteTensor load_tensor(std::istream& is) {
  int d = 0, D = 0;
  if (!(is >> d >> D) || d < 1 || D < 1) throw Error("load_tensor: bad header");
  SiteTensor t(d, D);
  for (int s = 0; s < d; ++s)
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) {
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im)) throw Error("load_tensor: truncated data");
        t.s[s](a, b) = cplx(re, im);
      }
  return t;
}

}  // namespace zpf
