#include "zpf/boson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace zpf {

namespace {

// |lambda_2| of the transfer matrix, 0 for product states.
double second_eigenvalue(const UniformMps& mps) {
  if (mps.D() == 1) return 0.0;
  return std::abs(transfer_spectrum(mps, 2)(1));
}

// Distance after which a centered bond matrix has decayed below 1e-14.
int decay_horizon(const UniformMps& mps) {
  const double r = second_eigenvalue(mps);
  if (r <= 1e-300) return 4;
  if (r >= 1.0 - 1e-12) throw Error("decay_horizon: transfer matrix is not gapped");
  return static_cast<int>(std::ceil(std::log(1e-14) / std::log(r))) + 4;
}

SiteTensor apply_physical(const Matrix& op, const Matrix* bond, const SiteTensor& y) {
  SiteTensor z(y.d, y.D);
  for (int t = 0; t < y.d; ++t) {
    const Matrix ky = bond ? Matrix(*bond * y.s[t]) : y.s[t];
    for (int s = 0; s < y.d; ++s) {
      const cplx w = op(s, t);
      if (w != cplx(0.0)) z.s[s] += w * ky;
    }
  }
  return z;
}

SiteTensor apply_bond(const Matrix& bond, const SiteTensor& y) {
  SiteTensor z(y.d, y.D);
  for (int s = 0; s < y.d; ++s) z.s[s] = bond * y.s[s];
  return z;
}

// Z = X + A W with W = A^dagger Z and X in the tangent space.
Matrix split(const SiteTensor& a, SiteTensor& z) {
  Matrix w = Matrix::Zero(a.D, a.D);
  for (int s = 0; s < a.d; ++s) w.noalias() += a.s[s].adjoint() * z.s[s];
  for (int s = 0; s < a.d; ++s) z.s[s].noalias() -= a.s[s] * w;
  return w;
}

const SiteTensor& site_of(const UniformMps& mps, const Config& cfg, int j) {
  const auto it = cfg.find(j);
  return it == cfg.end() ? mps.A : it->second;
}

// Right environments R[j] of the sites strictly right of j (bra A, ket cfg),
// for j from the leftmost to the rightmost configured site.
std::map<int, Matrix> right_envs(const UniformMps& mps, const Config& cfg) {
  std::map<int, Matrix> out;
  if (cfg.empty()) return out;
  const int lo = cfg.begin()->first;
  const int hi = cfg.rbegin()->first;
  Matrix r = mps.gamma;
  out[hi] = r;
  for (int j = hi; j > lo; --j) {
    r = right_step(mps.A, site_of(mps, cfg, j), r);
    out[j - 1] = r;
  }
  return out;
}

void check_window(int L) {
  if (L < 1) throw Error("boson: window L must be positive");
}

}  // namespace

Matrix BosonQuadratic::eps_at(int x) const {
  const int ax = std::abs(x);
  if (ax > L) return Matrix::Zero(m, m);
  return x >= 0 ? eps[ax] : Matrix(eps[ax].adjoint());
}

BosonQuadratic quadratic_coeffs(const UniformMps& mps, const TangentBasis& basis,
                                const SpinModel& model, int L) {
  check_window(L);
  const HamiltonianEnv env(mps, model);
  const int m = basis.modes();
  BosonQuadratic bq;
  bq.E0 = env.energy();
  bq.L = L;
  bq.m = m;
  bq.gradient = basis.coefficients(gradient_tensor(env));
  const double gmax = m ? bq.gradient.cwiseAbs().maxCoeff() : 0.0;
  if (gmax >= 1e-6) {
    std::ostringstream os;
    os << "reference is not a converged saddle (max gradient " << gmax << ")";
    bq.warnings.push_back(os.str());
  }

  const auto left0 = env.left_boundary();
  const auto right0 = env.right_boundary();
  const SiteTensor& a = mps.A;

  // epsilon^(-x)(:, nu) = <B_mu at x | H | B_nu at 0>
  bq.eps.assign(L + 1, Matrix::Zero(m, m));
  for (int nu = 0; nu < m; ++nu) {
    const SiteTensor b = basis.tensor(nu);
    bq.eps[0].col(nu) = basis.coefficients(env.open_bra(left0, right0, b));
    auto e = env.step_left(left0, a, b);
    for (int x = 1; x <= L; ++x) {
      bq.eps[x].col(nu) = basis.coefficients(env.open_bra(e, right0, a));
      if (x < L) e = env.step_left(e, a, a);
    }
  }
  for (int x = 1; x <= L; ++x) bq.eps[x] = bq.eps[x].adjoint().eval();
  for (int mu = 0; mu < m; ++mu)
    if (std::abs(bq.eps[0](mu, mu).imag()) > 1e-8)
      throw Error("non-Hermitian contraction in epsilon^(0)");

  // Delta'^(x)(mu, :) = <B_mu at 0, B_nu at x | H | Psi>
  bq.delta_prime.assign(L, Matrix::Zero(m, m));
  for (int mu = 0; mu < m; ++mu) {
    auto e = env.step_left(left0, basis.tensor(mu), a);
    for (int x = 1; x <= L; ++x) {
      bq.delta_prime[x - 1].row(mu) = basis.coefficients(env.open_bra(e, right0, a)).transpose();
      if (x < L) e = env.step_left(e, a, a);
    }
  }
  // Project out the first tangent space: Delta' -= M^dagger h.
  for (int x = 1; x <= L; ++x) {
    const Matrix M = overlap_M(mps, basis, x);
    const Vector corr = M.adjoint() * bq.gradient;
    for (int mu = 0; mu < m; ++mu)
      for (int nu = 0; nu < m; ++nu) bq.delta_prime[x - 1](mu, nu) -= corr(mu * m + nu);
  }
  bq.delta = bq.delta_prime;
  bq.delta_bar.clear();
  for (const auto& dp : bq.delta_prime) bq.delta_bar.push_back(dp.conjugate());
  return bq;
}

Matrix pairs_to_reduced(const GramData& gram, const std::vector<Matrix>& blocks) {
  if (static_cast<int>(blocks.size()) != gram.L) throw Error("pairs_to_reduced: window mismatch");
  const int D = gram.D;
  const int rows = (gram.d - 1) * D;
  Matrix out = Matrix::Zero(gram.reduced_dim(), rows);
  for (int x = 1; x <= gram.L; ++x)
    for (int mu = 0; mu < gram.m; ++mu)
      for (int nu = 0; nu < gram.m; ++nu)
        out(gram.reduced_index(x, mu % D, nu), mu / D) = blocks[x - 1](mu, nu);
  return out;
}

std::vector<Matrix> reduced_to_pairs(const GramData& gram, const Matrix& reduced) {
  const int D = gram.D;
  std::vector<Matrix> out(gram.L, Matrix::Zero(gram.m, gram.m));
  for (int x = 1; x <= gram.L; ++x)
    for (int mu = 0; mu < gram.m; ++mu)
      for (int nu = 0; nu < gram.m; ++nu)
        out[x - 1](mu, nu) = reduced(gram.reduced_index(x, mu % D, nu), mu / D);
  return out;
}

void delta_from_prime(const GramData& gram, BosonQuadratic& bq) {
  if (gram.L != bq.L || gram.m != bq.m) throw Error("delta_from_prime: Gram window mismatch");
  bq.delta = reduced_to_pairs(gram, gram.pinv_red * pairs_to_reduced(gram, bq.delta_prime));
}

PullThrough pull_through_step(const UniformMps& mps, const TangentBasis& basis, const Matrix& M,
                              const SiteTensor& Y) {
  const int d = mps.d();
  const int D = mps.D();
  if (M.rows() != d * D || M.cols() != d * D) throw Error("pull_through_step: M has wrong shape");
  SiteTensor z = SiteTensor::from_stacked(M * Y.stacked(), d);
  PullThrough out;
  for (int s = 0; s < d; ++s) z.s[s] = z.s[s] * mps.gamma;
  out.x = basis.coefficients(z);
  out.pulled = mps.A.stacked().adjoint() * (M * Y.stacked());
  return out;
}

PullThrough pull_bond(const UniformMps& mps, const TangentBasis& basis, const Matrix& K,
                      const SiteTensor& Y) {
  SiteTensor z = apply_bond(K, Y);
  PullThrough out;
  out.pulled = mps.A.stacked().adjoint() * z.stacked();
  for (int s = 0; s < z.d; ++s) z.s[s] = z.s[s] * mps.gamma;
  out.x = basis.coefficients(z);
  return out;
}

OperatorExpansion operator_expand(const UniformMps& mps, const TangentBasis& basis,
                                  const Matrix& h, int horizon) {
  const int d = mps.d();
  const int D = mps.D();
  if (h.rows() != d || h.cols() != d) throw Error("operator_expand: operator has wrong shape");
  OperatorExpansion out;
  Matrix M = Matrix::Zero(d * D, d * D);
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t) M.block(s * D, t * D, D, D) = h(s, t) * Matrix::Identity(D, D);
  auto step = pull_through_step(mps, basis, M, mps.A);
  out.x.push_back(step.x);
  Matrix w = step.pulled;
  w -= (w * mps.gamma).trace() * Matrix::Identity(D, D);
  for (int i = 1; i <= horizon; ++i) {
    if (out.x.back().norm() < 1e-12 && w.norm() < 1e-12) break;
    step = pull_bond(mps, basis, w, mps.A);
    out.x.push_back(step.x);
    w = step.pulled;
  }
  out.tail = w.norm();
  out.truncated = out.tail > 1e-8;
  return out;
}

std::vector<ExpansionTerm> expand_action(const UniformMps& mps, const Config& cfg, int start,
                                         const std::vector<Matrix>& ops, int horizon,
                                         double tol) {
  const int D = mps.D();
  const Matrix eye = Matrix::Identity(D, D);
  const SiteTensor& a = mps.A;
  std::vector<ExpansionTerm> out;

  struct Branch {
    Config cfg;
    cplx scale;
    bool has_bond;
    Matrix bond;
  };
  std::vector<Branch> live{{cfg, 1.0, false, Matrix()}};
  const int n = static_cast<int>(ops.size());
  for (int i = 0; i < n; ++i) {
    const int j = start + i;
    std::vector<Branch> next;
    for (auto& br : live) {
      SiteTensor z = apply_physical(ops[i], br.has_bond ? &br.bond : nullptr,
                                    site_of(mps, br.cfg, j));
      const Matrix w = split(a, z);
      if (z.norm() > 0.0) {
        Branch t{br.cfg, br.scale, false, Matrix()};
        t.cfg[j] = z;
        next.push_back(std::move(t));
      }
      if (w.norm() > 0.0) {
        Branch b{std::move(br.cfg), br.scale, true, w};
        b.cfg.erase(j);
        next.push_back(std::move(b));
      }
    }
    live = std::move(next);
  }

  const int last = start + n - 1;
  for (auto& br : live) {
    if (!br.has_bond) {
      out.push_back({std::move(br.cfg), br.scale});
      continue;
    }
    Config c = std::move(br.cfg);
    Matrix w = std::move(br.bond);
    for (int j = last + 1;; ++j) {
      const cplx tau = (w * mps.gamma).trace();
      if (tau != cplx(0.0)) out.push_back({c, br.scale * tau});
      w -= tau * eye;
      const bool beyond = c.empty() || j > c.rbegin()->first;
      if (w.norm() < tol || (beyond && j > last + horizon)) break;
      SiteTensor z = apply_bond(w, site_of(mps, c, j));
      w = split(a, z);
      if (z.norm() > 0.0) {
        ExpansionTerm t{c, br.scale};
        t.sites[j] = std::move(z);
        out.push_back(std::move(t));
      }
      c.erase(j);
    }
  }
  return out;
}

Vector single_overlap(const UniformMps& mps, const TangentBasis& basis, const Config& cfg) {
  if (cfg.empty()) return Vector::Zero(basis.modes());
  const auto renv = right_envs(mps, cfg);
  const int j0 = cfg.begin()->first;
  SiteTensor f = cfg.begin()->second;
  for (auto& s : f.s) s = s * renv.at(j0);
  return basis.coefficients(f);
}

std::vector<Matrix> pair_overlap(const UniformMps& mps, const TangentBasis& basis,
                                 const Config& cfg, int L) {
  const int m = basis.modes();
  std::vector<Matrix> out(L, Matrix::Zero(m, m));
  if (cfg.empty()) return out;
  const auto renv = right_envs(mps, cfg);
  const int j0 = cfg.begin()->first;
  const int hi = cfg.rbegin()->first;
  const Matrix eye = Matrix::Identity(mps.D(), mps.D());
  for (int mu = 0; mu < m; ++mu) {
    Matrix e = left_step(basis.tensor(mu), cfg.begin()->second, eye);
    for (int x = 1; x <= L; ++x) {
      const int j = j0 + x;
      const SiteTensor& y = site_of(mps, cfg, j);
      const Matrix& r = j < hi ? renv.at(j) : mps.gamma;
      SiteTensor f(y.d, y.D);
      for (int s = 0; s < y.d; ++s) f.s[s] = e * y.s[s] * r;
      out[x - 1].row(mu) = basis.coefficients(f).transpose();
      if (x < L) e = left_step(mps.A, y, e);
    }
  }
  return out;
}

cplx config_overlap(const UniformMps& mps, const Config& bra, const Config& ket) {
  if (bra.empty() && ket.empty()) return 1.0;
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  for (const Config* c : {&bra, &ket})
    if (!c->empty()) {
      lo = std::min(lo, c->begin()->first);
      hi = std::max(hi, c->rbegin()->first);
    }
  Matrix e = Matrix::Identity(mps.D(), mps.D());
  for (int j = lo; j <= hi; ++j) e = left_step(site_of(mps, bra, j), site_of(mps, ket, j), e);
  return (e * mps.gamma).trace();
}

BosonQuadratic quadratic_coeffs_pullthrough(const UniformMps& mps, const TangentBasis& basis,
                                            const SpinModel& model, int L, int horizon) {
  check_window(L);
  const int m = basis.modes();
  const int hz = std::max(horizon, decay_horizon(mps));
  const double e0 = energy_density(mps, model);
  const int d = mps.d();
  const auto mpo = operator_svd(model.hdensity - e0 * Matrix::Identity(d * d, d * d), d);

  BosonQuadratic bq;
  bq.E0 = e0;
  bq.L = L;
  bq.m = m;
  bq.eps.assign(L + 1, Matrix::Zero(m, m));
  bq.delta_prime.assign(L, Matrix::Zero(m, m));
  bq.gradient = Vector::Zero(m);

  // Hamiltonian on the vacuum: bond 0 only, every term shifted to its
  // leftmost site by translation invariance.
  cplx vacuum = 0.0;
  for (int k = 0; k < mpo.terms(); ++k)
    for (const auto& t : expand_action(mps, {}, 0, {mpo.O[k], mpo.P[k]}, hz)) {
      if (t.sites.empty()) {
        vacuum += t.scale;
        continue;
      }
      bq.gradient += t.scale * single_overlap(mps, basis, t.sites);
      const auto pairs = pair_overlap(mps, basis, t.sites, L);
      for (int x = 0; x < L; ++x) bq.delta_prime[x] += t.scale * pairs[x];
    }
  if (std::abs(vacuum) > 1e-8) {
    std::ostringstream os;
    os << "vacuum coefficient " << std::abs(vacuum) << " of the centered Hamiltonian";
    bq.warnings.push_back(os.str());
  }
  const double gmax = m ? bq.gradient.cwiseAbs().maxCoeff() : 0.0;
  if (gmax >= 1e-6) {
    std::ostringstream os;
    os << "reference is not a converged saddle (max gradient " << gmax << ")";
    bq.warnings.push_back(os.str());
  }

  // One derivative at site 0, every bond that can reach it.
  for (int nu = 0; nu < m; ++nu) {
    const Config base{{0, basis.tensor(nu)}};
    for (int b = -(L + hz); b <= hz; ++b)
      for (int k = 0; k < mpo.terms(); ++k)
        for (const auto& t : expand_action(mps, base, b, {mpo.O[k], mpo.P[k]}, hz)) {
          if (t.sites.empty()) continue;
          const int j0 = t.sites.begin()->first;
          if (j0 > 0 || j0 < -L) continue;
          bq.eps[-j0].col(nu) += t.scale * single_overlap(mps, basis, t.sites);
        }
  }

  // Covariant correction with overlaps evaluated on configurations.
  for (int x = 1; x <= L; ++x)
    for (int mu = 0; mu < m; ++mu)
      for (int nu = 0; nu < m; ++nu) {
        const Config pair{{0, basis.tensor(mu)}, {x, basis.tensor(nu)}};
        const Vector mcol = single_overlap(mps, basis, pair);
        bq.delta_prime[x - 1](mu, nu) -= mcol.dot(bq.gradient);
      }
  bq.delta = bq.delta_prime;
  for (const auto& dp : bq.delta_prime) bq.delta_bar.push_back(dp.conjugate());
  return bq;
}

// ---------------------------------------------------------------------------

BosonPolynomial BosonPolynomial::truncated(int degree) const {
  BosonPolynomial out;
  out.horizon = horizon;
  out.tail = tail;
  for (const auto& t : terms)
    if (static_cast<int>(t.create.size() + t.annihilate.size()) <= degree) out.terms.push_back(t);
  return out;
}

std::map<std::vector<Mode>, cplx> BosonPolynomial::apply(const std::vector<Mode>& state) const {
  std::map<std::vector<Mode>, cplx> out;
  for (const auto& t : terms) {
    std::vector<Mode> rest = state;
    bool ok = true;
    for (const auto& q : t.annihilate) {
      const auto it = std::find(rest.begin(), rest.end(), q);
      if (it == rest.end()) {
        ok = false;
        break;
      }
      rest.erase(it);
    }
    if (!ok) continue;
    std::set<int> sites;
    for (const auto& q : rest) sites.insert(q.site);
    for (const auto& p : t.create) {
      if (!sites.insert(p.site).second) {
        ok = false;  // a second boson on one site leaves the physical subspace
        break;
      }
      rest.push_back(p);
    }
    if (!ok) continue;
    std::sort(rest.begin(), rest.end());
    out[rest] += t.coef;
  }
  return out;
}

cplx BosonPolynomial::coefficient(const std::vector<Mode>& P, const std::vector<Mode>& Q) const {
  std::vector<Mode> p = P;
  std::vector<Mode> q = Q;
  std::sort(p.begin(), p.end());
  std::sort(q.begin(), q.end());
  cplx acc = 0.0;
  for (const auto& t : terms)
    if (t.create == p && t.annihilate == q) acc += t.coef;
  return acc;
}

Config config_of(const TangentBasis& basis, const std::vector<Mode>& state) {
  Config c;
  for (const auto& q : state) {
    if (c.count(q.site)) throw Error("config_of: two bosons on one site");
    c[q.site] = basis.tensor(q.mode);
  }
  return c;
}

namespace {

// Expands the tangent tensors of a configuration in B_mu: each site X equals
// sum_mu c_mu B_mu with c = coefficients(X Gamma).
std::map<std::vector<Mode>, cplx> to_modes(const UniformMps& mps, const TangentBasis& basis,
                                           const Config& cfg, cplx scale) {
  std::map<std::vector<Mode>, cplx> acc{{{}, scale}};
  for (const auto& [site, x] : cfg) {
    SiteTensor xg = x;
    for (auto& s : xg.s) s = s * mps.gamma;
    const Vector c = basis.coefficients(xg);
    std::map<std::vector<Mode>, cplx> next;
    for (const auto& [modes, amp] : acc)
      for (int mu = 0; mu < c.size(); ++mu) {
        if (std::abs(c(mu)) < 1e-300) continue;
        auto key = modes;
        key.push_back({site, mu});
        next[key] += amp * c(mu);
      }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace

BosonPolynomial boson_map_local(const UniformMps& mps, const TangentBasis& basis,
                                const Matrix& h, int horizon) {
  const int d = mps.d();
  if (h.rows() != d || h.cols() != d) throw Error("boson_map_local: operator has wrong shape");
  const int m = basis.modes();
  const int hz = std::max(horizon, decay_horizon(mps));
  BosonPolynomial poly;
  poly.horizon = horizon;

  const auto ex = operator_expand(mps, basis, h, hz);
  poly.tail = ex.tail;

  auto image = [&](const Config& cfg) {
    std::map<std::vector<Mode>, cplx> out;
    for (const auto& t : expand_action(mps, cfg, 0, {h}, hz))
      for (const auto& [modes, amp] : to_modes(mps, basis, t.sites, t.scale)) out[modes] += amp;
    return out;
  };

  const auto vac = image({});
  for (const auto& [modes, amp] : vac) poly.terms.push_back({modes, {}, amp});
  for (int j = 0; j <= horizon; ++j)
    for (int nu = 0; nu < m; ++nu) {
      const Mode in{j, nu};
      auto img = image({{j, basis.tensor(nu)}});
      // subtract what the creation-only part already produces
      for (const auto& [modes, amp] : vac) {
        if (std::any_of(modes.begin(), modes.end(), [&](const Mode& q) { return q.site == j; }))
          continue;
        auto key = modes;
        key.push_back(in);
        std::sort(key.begin(), key.end());
        img[key] -= amp;
      }
      for (const auto& [modes, amp] : img)
        if (amp != cplx(0.0)) poly.terms.push_back({modes, {in}, amp});
    }
  return poly;
}

CrossCheckReport cross_check(const BosonQuadratic& a, const BosonQuadratic& b, double tol) {
  if (a.L != b.L || a.m != b.m) throw Error("cross_check: mismatched windows");
  CrossCheckReport rep;
  for (int x = 0; x <= a.L; ++x) {
    rep.eps_dev.push_back((a.eps[x] - b.eps[x]).cwiseAbs().maxCoeff());
    rep.max_dev = std::max(rep.max_dev, rep.eps_dev.back());
  }
  for (int x = 1; x <= a.L; ++x) {
    rep.delta_dev.push_back((a.delta_prime[x - 1] - b.delta_prime[x - 1]).cwiseAbs().maxCoeff());
    rep.max_dev = std::max(rep.max_dev, rep.delta_dev.back());
  }
  rep.pass = rep.max_dev < tol;
  return rep;
}

}  // namespace zpf
