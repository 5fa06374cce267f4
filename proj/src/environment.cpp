#include "zpf/environment.hpp"

#include <cmath>
#include <sstream>
#include <unsupported/Eigen/KroneckerProduct>

namespace zpf {

BondMpo operator_svd(const Matrix& h, int d, double rel_tol) {
  if (h.rows() != d * d || h.cols() != d * d) throw Error("operator_svd: shape mismatch");
  // r[(s1 s1'), (s2 s2')] = h[(s1 s2), (s1' s2')]
  Matrix r(d * d, d * d);
  for (int s1 = 0; s1 < d; ++s1)
    for (int s2 = 0; s2 < d; ++s2)
      for (int t1 = 0; t1 < d; ++t1)
        for (int t2 = 0; t2 < d; ++t2) r(s1 * d + t1, s2 * d + t2) = h(s1 * d + s2, t1 * d + t2);
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  BondMpo out;
  if (sv.size() == 0 || sv(0) == 0.0) return out;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) <= rel_tol * sv(0)) break;
    const double w = std::sqrt(sv(k));
    Matrix o(d, d), p(d, d);
    for (int s = 0; s < d; ++s)
      for (int t = 0; t < d; ++t) {
        o(s, t) = w * svd.matrixU()(s * d + t, k);
        p(s, t) = w * std::conj(svd.matrixV()(s * d + t, k));
      }
    out.O.push_back(o);
    out.P.push_back(p);
  }
  return out;
}

double energy_density(const UniformMps& mps, const SpinModel& model) {
  if (model.d != mps.d()) throw Error("energy_density: physical dimension mismatch");
  const int D = mps.D();
  const auto mpo = operator_svd(model.hdensity, model.d);
  cplx e = 0.0;
  const Matrix eye = Matrix::Identity(D, D);
  for (int k = 0; k < mpo.terms(); ++k) {
    const Matrix ek = left_step(mps.A, mps.A, eye, mpo.O[k]);
    e += (left_step(mps.A, mps.A, ek, mpo.P[k]) * mps.gamma).trace();
  }
  if (std::abs(e.imag()) > 1e-8) {
    std::ostringstream os;
    os << "non-Hermitian contraction (imaginary part " << e.imag() << ")";
    throw Error(os.str());
  }
  return e.real();
}

HamiltonianEnv::HamiltonianEnv(const UniformMps& mps, const SpinModel& model) : mps_(mps) {
  const int d = mps.d();
  const int D = mps.D();
  energy_ = energy_density(mps, model);
  centered_ = model.hdensity - energy_ * Matrix::Identity(d * d, d * d);
  mpo_ = operator_svd(centered_, d);
  const int K = mpo_.terms();
  const Matrix eye = Matrix::Identity(D, D);
  const SiteTensor& a = mps.A;

  left0_.e0 = eye;
  left0_.ek.resize(K);
  Matrix hl = Matrix::Zero(D, D);
  for (int k = 0; k < K; ++k) {
    left0_.ek[k] = left_step(a, a, eye, mpo_.O[k]);
    hl += left_step(a, a, left0_.ek[k], mpo_.P[k]);
  }
  left0_.eF = geometric_sum(mps, hl, Side::Left, true);

  right0_.rN = mps.gamma;
  right0_.rk.resize(K);
  Matrix hr = Matrix::Zero(D, D);
  for (int k = 0; k < K; ++k) {
    right0_.rk[k] = right_step(a, a, mps.gamma, mpo_.P[k]);
    hr += right_step(a, a, right0_.rk[k], mpo_.O[k]);
  }
  right0_.rH = geometric_sum(mps, hr, Side::Right, true);
}

HamiltonianEnv::Left HamiltonianEnv::step_left(const Left& e, const SiteTensor& bra,
                                               const SiteTensor& ket) const {
  const int K = mpo_.terms();
  Left out;
  out.e0 = left_step(bra, ket, e.e0);
  out.ek.resize(K);
  out.eF = left_step(bra, ket, e.eF);
  for (int k = 0; k < K; ++k) {
    out.ek[k] = left_step(bra, ket, e.e0, mpo_.O[k]);
    out.eF += left_step(bra, ket, e.ek[k], mpo_.P[k]);
  }
  return out;
}

HamiltonianEnv::Right HamiltonianEnv::step_right(const Right& r, const SiteTensor& bra,
                                                 const SiteTensor& ket) const {
  const int K = mpo_.terms();
  Right out;
  out.rN = right_step(bra, ket, r.rN);
  out.rk.resize(K);
  out.rH = right_step(bra, ket, r.rH);
  for (int k = 0; k < K; ++k) {
    out.rk[k] = right_step(bra, ket, r.rN, mpo_.P[k]);
    out.rH += right_step(bra, ket, r.rk[k], mpo_.O[k]);
  }
  return out;
}

cplx HamiltonianEnv::close(const Left& e, const Right& r) const {
  cplx acc = (e.eF * r.rN).trace() + (e.e0 * r.rH).trace();
  for (int k = 0; k < mpo_.terms(); ++k) acc += (e.ek[k] * r.rk[k]).trace();
  return acc;
}

SiteTensor HamiltonianEnv::open_bra(const Left& e, const Right& r, const SiteTensor& ket) const {
  const int d = ket.d;
  SiteTensor psi(d, ket.D);
  std::vector<Matrix> plain(d), pend(d), start(d);
  for (int t = 0; t < d; ++t) {
    psi.s[t] = e.eF * ket.s[t] * r.rN + e.e0 * ket.s[t] * r.rH;
  }
  for (int k = 0; k < mpo_.terms(); ++k) {
    for (int t = 0; t < d; ++t) {
      pend[t] = e.ek[k] * ket.s[t] * r.rN;
      start[t] = e.e0 * ket.s[t] * r.rk[k];
    }
    for (int s = 0; s < d; ++s)
      for (int t = 0; t < d; ++t) {
        const cplx p = mpo_.P[k](s, t);
        const cplx o = mpo_.O[k](s, t);
        if (p != cplx(0.0)) psi.s[s] += p * pend[t];
        if (o != cplx(0.0)) psi.s[s] += o * start[t];
      }
  }
  return psi;
}

cplx HamiltonianEnv::window_element(const std::vector<SiteTensor>& bra,
                                    const std::vector<SiteTensor>& ket) const {
  if (bra.size() != ket.size()) throw Error("window_element: window length mismatch");
  Left e = left0_;
  for (std::size_t j = 0; j < bra.size(); ++j) e = step_left(e, bra[j], ket[j]);
  return close(e, right0_);
}

SiteTensor gradient_tensor(const HamiltonianEnv& env) {
  return env.open_bra(env.left_boundary(), env.right_boundary(), env.mps().A);
}

Vector gradient(const UniformMps& mps, const TangentBasis& basis, const SpinModel& model) {
  const HamiltonianEnv env(mps, model);
  return basis.coefficients(gradient_tensor(env));
}

Vector embedded_hamiltonian(const HamiltonianEnv& env, int N, const Vector& psi) {
  const UniformMps& mps = env.mps();
  const auto dims = embed_dims(mps, N);
  const auto& mpo = env.mpo();
  Vector out = Vector::Zero(psi.size());

  const Matrix& h = env.centered_density();
  for (int j = 0; j + 1 < N; ++j) out += apply_on_legs(psi, dims, 1 + j, 2, h);

  // bonds left of the window
  out += apply_on_legs(psi, dims, 0, 1, env.left_sum());
  for (int k = 0; k < mpo.terms(); ++k) {
    Matrix op = Eigen::kroneckerProduct(env.left_pending()[k], mpo.P[k]).eval();
    out += apply_on_legs(psi, dims, 0, 2, op);
  }
  // bonds right of the window, mapped onto the right ancilla
  const Matrix gis = psd_power(mps.gamma, -0.5);
  const auto ancilla = [&](const Matrix& r) { return Matrix((gis * r * gis).transpose()); };
  out += apply_on_legs(psi, dims, N + 1, 1, ancilla(env.right_sum()));
  for (int k = 0; k < mpo.terms(); ++k) {
    Matrix op = Eigen::kroneckerProduct(mpo.O[k], ancilla(env.right_pending()[k])).eval();
    out += apply_on_legs(psi, dims, N, 2, op);
  }
  return out;
}

}  // namespace zpf
