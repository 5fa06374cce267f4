#include "zpf/gram.hpp"

#include "zpf/models.hpp"

#include <cmath>
#include <sstream>

namespace zpf {

namespace {

// Gamma^{-1/2} e_a e_b^T Gamma^{-1/2}: environment after site 0 with bra
// derivative column a and ket derivative column b (same row index).
Matrix anchor_env(const TangentBasis& basis, int a, int b) {
  const Matrix& g = basis.gamma_inv_sqrt();
  return g.col(a) * g.row(b);
}

// Row vector over beta of Tr(left_step(A, B_beta, w) Gamma).
Vector close_ket_derivative(const UniformMps& mps, const TangentBasis& basis, const Matrix& w) {
  SiteTensor f(mps.d(), mps.D());
  const Matrix wa = w.adjoint();
  for (int s = 0; s < mps.d(); ++s) f.s[s] = wa * mps.A.s[s] * mps.gamma;
  return basis.coefficients(f).conjugate();
}

std::vector<Matrix> propagate(const UniformMps& mps, const Matrix& e0, int steps) {
  std::vector<Matrix> out{e0};
  for (int i = 0; i < steps; ++i) out.push_back(left_step(mps.A, mps.A, out.back()));
  return out;
}

}  // namespace

Matrix GramData::M_full(int x) const {
  if (x < 1 || x > L) throw Error("GramData::M_full: x out of range");
  const Matrix& red = M_red[x - 1];
  Matrix out = Matrix::Zero(m, m * m);
  for (int kappa = 0; kappa < m; ++kappa)
    for (int mu = 0; mu < m; ++mu) {
      if (kappa / D != mu / D) continue;
      for (int nu = 0; nu < m; ++nu) out(kappa, mu * m + nu) = red(kappa % D, (mu % D) * m + nu);
    }
  return out;
}

Matrix GramData::G_block(int x, int y, bool tilde) const {
  const Matrix& red = tilde ? Gt_red : G_red;
  Matrix out = Matrix::Zero(m * m, m * m);
  for (int mu = 0; mu < m; ++mu)
    for (int al = 0; al < m; ++al) {
      if (mu / D != al / D) continue;
      for (int nu = 0; nu < m; ++nu)
        for (int be = 0; be < m; ++be)
          out(mu * m + nu, al * m + be) =
              red(reduced_index(x, mu % D, nu), reduced_index(y, al % D, be));
    }
  return out;
}

Matrix GramData::expand(const Matrix& reduced) const {
  const int n = full_dim();
  Matrix out = Matrix::Zero(n, n);
  const int mm = m * m;
  for (int x = 1; x <= L; ++x)
    for (int y = 1; y <= L; ++y)
      for (int mu = 0; mu < m; ++mu)
        for (int al = 0; al < m; ++al) {
          if (mu / D != al / D) continue;
          for (int nu = 0; nu < m; ++nu)
            for (int be = 0; be < m; ++be)
              out((x - 1) * mm + mu * m + nu, (y - 1) * mm + al * m + be) =
                  reduced(reduced_index(x, mu % D, nu), reduced_index(y, al % D, be));
        }
  return out;
}

Matrix overlap_M(const UniformMps& mps, const TangentBasis& basis, int x) {
  if (x < 1) throw Error("overlap_M: x must be positive");
  GramData g;
  g.L = x;
  g.d = mps.d();
  g.D = mps.D();
  g.m = basis.modes();
  const int D = g.D;
  g.M_red.assign(x, Matrix::Zero(D, D * g.m));
  for (int ck = 0; ck < D; ++ck)
    for (int cm = 0; cm < D; ++cm) {
      const auto w = propagate(mps, anchor_env(basis, ck, cm), x - 1);
      g.M_red[x - 1].row(ck).segment(cm * g.m, g.m) =
          close_ket_derivative(mps, basis, w.back()).transpose();
    }
  return g.M_full(x);
}

GramData gram_G(const UniformMps& mps, const TangentBasis& basis, int L) {
  if (L < 2) throw Error("gram_G: window must have L >= 2");
  GramData g;
  g.L = L;
  g.d = mps.d();
  g.D = mps.D();
  g.m = basis.modes();
  const int D = g.D;
  const int m = g.m;
  g.M_red.assign(L, Matrix::Zero(D, D * m));
  g.G_red = Matrix::Zero(g.reduced_dim(), g.reduced_dim());

  std::vector<SiteTensor> b(m);
  for (int nu = 0; nu < m; ++nu) b[nu] = basis.tensor(nu);

  for (int ca = 0; ca < D; ++ca)
    for (int cb = 0; cb < D; ++cb) {
      // w[k] is the environment after sites 0..k with the bra derivative in
      // column ca and the ket derivative in column cb at site 0.
      const auto w = propagate(mps, anchor_env(basis, ca, cb), L - 1);
      for (int x = 1; x <= L; ++x) {
        g.M_red[x - 1].row(ca).segment(cb * m, m) =
            close_ket_derivative(mps, basis, w[x - 1]).transpose();
        // diagonal x = y: bra B_nu, ket B_beta at site x
        for (int be = 0; be < m; ++be) {
          SiteTensor f(g.d, D);
          for (int s = 0; s < g.d; ++s) f.s[s] = w[x - 1] * b[be].s[s] * mps.gamma;
          const Vector col = basis.coefficients(f);
          for (int nu = 0; nu < m; ++nu)
            g.G_red(g.reduced_index(x, ca, nu), g.reduced_index(x, cb, be)) = col(nu);
        }
        // y > x: bra B_nu at x, ket B_beta at y
        for (int nu = 0; nu < m; ++nu) {
          Matrix u = left_step(b[nu], mps.A, w[x - 1]);
          for (int y = x + 1; y <= L; ++y) {
            const Vector row = close_ket_derivative(mps, basis, u);
            for (int be = 0; be < m; ++be)
              g.G_red(g.reduced_index(x, ca, nu), g.reduced_index(y, cb, be)) = row(be);
            if (y < L) u = left_step(mps.A, mps.A, u);
          }
        }
      }
    }
  // lower triangle by Hermiticity
  const int n = g.reduced_dim();
  for (int x = 1; x <= L; ++x)
    for (int y = x + 1; y <= L; ++y) {
      const int r0 = g.reduced_index(x, 0, 0), c0 = g.reduced_index(y, 0, 0);
      g.G_red.block(c0, r0, D * m, D * m) = g.G_red.block(r0, c0, D * m, D * m).adjoint();
    }
  (void)n;
  return g;
}

void gram_tilde(GramData& g) {
  const int D = g.D;
  const int m = g.m;
  // reduced covariant term: rows/cols (x, c, nu), summed over c_kappa
  Matrix mstack(D, g.reduced_dim());
  for (int x = 1; x <= g.L; ++x) mstack.block(0, (x - 1) * D * m, D, D * m) = g.M_red[x - 1];
  g.Gt_red = g.G_red - mstack.adjoint() * mstack;
  g.Gt_red = 0.5 * (g.Gt_red + g.Gt_red.adjoint()).eval();
  const auto eig = hermitian_eig(g.Gt_red, 1e-10);
  if (eig.values.size() && eig.values(0) < -1e-8) {
    std::ostringstream os;
    os << "non-PSD Gram (minimum eigenvalue " << eig.values(0) << ")";
    throw Error(os.str());
  }
  g.eig_red = eig.values;
}

Projection pinv_project(const Matrix& gt, double rel_tol) {
  const auto eig = hermitian_eig(gt, 1e-10);
  Projection p;
  p.eigenvalues = eig.values;
  const double top = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  RealVector inv = RealVector::Zero(eig.values.size());
  RealVector keep = RealVector::Zero(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (top > 0.0 && std::abs(eig.values(i)) > rel_tol * top) {
      inv(i) = 1.0 / eig.values(i);
      keep(i) = 1.0;
    } else {
      ++p.null_dim;
    }
  }
  p.pinv = eig.vectors * inv.asDiagonal() * eig.vectors.adjoint();
  p.proj = eig.vectors * keep.asDiagonal() * eig.vectors.adjoint();
  return p;
}

GramData build_gram(const UniformMps& mps, const TangentBasis& basis, int L, double rel_tol) {
  GramData g = gram_G(mps, basis, L);
  gram_tilde(g);
  auto p = pinv_project(g.Gt_red, rel_tol);
  g.pinv_red = std::move(p.pinv);
  g.proj_red = std::move(p.proj);
  g.null_red = p.null_dim;
  return g;
}

int default_window(const UniformMps& mps) {
  // Truncation leaves spurious Gram eigenvalues of order |lambda_2|^(2L-2);
  // they must sit well below the rank cutoff or the pseudo-inverse amplifies them.
  const double need = 1.0 - 0.5 * std::log(1e-2 * kRankTol) * mps.xi;
  return std::max(8, static_cast<int>(std::ceil(need)));
}

namespace {

// Solves for the geometric tail of a family starting at y and returns the
// largest recurrence residual over j = y-2 .. y+30, relative to |v|.
double recurrence_residual(const Matrix& Lm, const Matrix& J, double lam, int y, double E,
                           const Vector& v) {
  const int n = static_cast<int>(v.size());
  const Matrix I = Matrix::Identity(n, n);
  const Matrix P = J - lam * Lm + lam * I;
  const Matrix Q = J + J.adjoint() + (1.0 + lam) * (I - Lm);
  const Matrix R = J.adjoint() - lam * Lm + lam * I;
  const auto A = [&](int j) { return Matrix(std::pow(lam, j) * P + (E - 1.0) * I); };
  const auto B = [&](int j) { return Matrix(std::pow(lam, j) * Q + (1.0 + lam) * (E - 1.0) * I); };
  const auto C = [&](int j) { return Matrix(std::pow(lam, j - 1) * R + lam * (E - 1.0) * I); };

  constexpr int kTerms = 20;
  // alpha_s = K_s alpha_{s-1} for s >= 2, so every alpha_s with s >= 1 is a
  // fixed matrix times alpha_1.
  std::vector<Matrix> chain(kTerms + 1);
  chain[1] = I;
  const double ly = std::pow(lam, y);
  for (int s = 2; s <= kTerms; ++s) {
    const double den = (E - 1.0) * (std::pow(lam, s) - 1.0) * (std::pow(lam, s) - lam);
    const Matrix k = -ly * (std::pow(lam, 2 * s - 2) * P - std::pow(lam, s - 1) * Q + R / lam) / den;
    chain[s] = k * chain[s - 1];
  }
  // tail v_{y+t} = alpha_0 + T_t alpha_1
  const auto tail = [&](int t) {
    Matrix out = Matrix::Zero(n, n);
    for (int s = 1; s <= kTerms; ++s) out += std::pow(lam, s * t) * chain[s];
    return out;
  };
  // unknowns [alpha_0; alpha_1]
  Matrix sys = Matrix::Zero(3 * n, 2 * n);
  Vector rhs = Vector::Zero(3 * n);
  sys.block(0, 0, n, n) = P - Q + R / lam;
  // j = y - 1: A v_{y+1} - B v_y = 0
  sys.block(n, 0, n, n) = A(y - 1);
  sys.block(n, n, n, n) = A(y - 1) * tail(1);
  rhs.segment(n, n) = B(y - 1) * v;
  // j = y: A v_{y+2} - B v_{y+1} + C v_y = 0
  sys.block(2 * n, 0, n, n) = A(y) - B(y);
  sys.block(2 * n, n, n, n) = A(y) * tail(2) - B(y) * tail(1);
  rhs.segment(2 * n, n) = -C(y) * v;
  const Vector sol = sys.completeOrthogonalDecomposition().solve(rhs);
  const Vector a0 = sol.head(n), a1 = sol.tail(n);

  const auto vec_at = [&](int j) -> Vector {
    if (j < y) return Vector::Zero(n);
    if (j == y) return v;
    return a0 + tail(j - y) * a1;
  };
  double worst = 0.0;
  for (int j = y - 2; j <= y + 30; ++j) {
    const Vector r = A(j) * vec_at(j + 2) - B(j) * vec_at(j + 1) + C(j) * vec_at(j);
    // scale out the lambda^j growth of the coefficients at negative j
    worst = std::max(worst, r.norm() / (v.norm() * std::max(1.0, std::pow(std::abs(lam), j - 1))));
  }
  return worst;
}

}  // namespace

AkltGramAnalytics aklt_analytic_spectrum(int y_max) {
  if (y_max < 3) throw Error("aklt_analytic_spectrum: y_max must be at least 3");
  const UniformMps mps = aklt_state();
  const TangentBasis basis(mps);
  const GramData g = gram_G(mps, basis, 2);
  AkltGramAnalytics out;
  const double lam = out.lambda;
  out.L_mat = g.G_block(1, 1);
  out.J = g.G_block(1, 2);
  out.M1 = g.M_full(1);

  const Matrix jl = out.J - lam * out.L_mat;
  Eigen::ComplexEigenSolver<Matrix> es(jl);
  if (es.info() != Eigen::Success) throw Error("aklt_analytic_spectrum: eigensolver failed");
  out.jl_eigenvalues = es.eigenvalues();
  std::vector<int> zero_idx, top_idx;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx e = es.eigenvalues()(i);
    if (std::abs(e) < 1e-9) {
      zero_idx.push_back(static_cast<int>(i));
    } else if (std::abs(e - cplx(1.0 - lam)) < 1e-9) {
      top_idx.push_back(static_cast<int>(i));
    } else {
      std::ostringstream os;
      os << "aklt_analytic_spectrum: J - lambda L has eigenvalue " << e
         << " outside {0, 1 - lambda}";
      throw Error(os.str());
    }
  }

  for (int y = 1; y <= y_max; ++y) {
    AkltFamily f;
    f.y = y;
    f.e_plus = 1.0 - std::pow(lam, y - 2);
    f.e_minus = 1.0 - std::pow(lam, y - 1);
    for (int branch = 0; branch < 2; ++branch) {
      const auto& idx = branch == 0 ? top_idx : zero_idx;
      const double E = branch == 0 ? f.e_plus : f.e_minus;
      double worst = 0.0;
      for (int i : idx)
        worst = std::max(worst, recurrence_residual(out.L_mat, out.J, lam, y, E,
                                                    es.eigenvectors().col(i)));
      (branch == 0 ? f.residual_plus : f.residual_minus) = worst;
      if (worst > 1e-8) {
        std::ostringstream os;
        os << "aklt_analytic_spectrum: recurrence residual " << worst << " at y = " << y
           << ", branch " << (branch == 0 ? '+' : '-');
        throw Error(os.str());
      }
    }
    out.families.push_back(f);
  }
  return out;
}

}  // namespace zpf
