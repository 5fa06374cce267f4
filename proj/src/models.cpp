#include "zpf/models.hpp"

#include <cmath>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

namespace zpf {

namespace {

Matrix two_site(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Matrix dot_product(const SpinOps& s) {
  return two_site(s.x, s.x) + two_site(s.y, s.y) + two_site(s.z, s.z);
}

Matrix rotation_x_pi(const SpinOps& s) {
  const auto eig = hermitian_eig(s.x);
  const cplx minus_i_pi(0.0, -M_PI);
  Vector phase(eig.values.size());
  for (Eigen::Index i = 0; i < phase.size(); ++i) phase(i) = std::exp(minus_i_pi * eig.values(i));
  return eig.vectors * phase.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace

SpinOps spin_matrices(int two_s_plus_one) {
  const int d = two_s_plus_one;
  if (d < 2) throw Error("spin_matrices: dimension must be at least 2");
  const double s = 0.5 * (d - 1);
  Matrix sp = Matrix::Zero(d, d);
  Matrix sz = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = s - i;
    sz(i, i) = m;
    if (i > 0) sp(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const Matrix sm = sp.adjoint();
  SpinOps out;
  out.x = 0.5 * (sp + sm);
  out.y = cplx(0.0, -0.5) * (sp - sm);
  out.z = sz;
  return out;
}

SpinModel blbq(double p) {
  const auto s = spin_matrices(3);
  const Matrix ss = dot_product(s);
  SpinModel m;
  m.d = 3;
  m.hdensity = ss + p * ss * ss;
  m.name = "blbq";
  m.params["p"] = p;
  return m;
}

SpinModel heisenberg_staggered(double h) {
  const auto s = spin_matrices(2);
  const Matrix id = Matrix::Identity(2, 2);
  SpinModel m;
  m.d = 2;
  m.hdensity = two_site(s.x, s.x) - two_site(s.y, s.y) - two_site(s.z, s.z) -
               0.5 * h * (two_site(s.z, id) + two_site(id, s.z));
  m.name = "heis_stag";
  m.params["h"] = h;
  return m;
}

SpinModel sublattice_rotate(const SpinModel& model) {
  const auto s = spin_matrices(model.d);
  const Matrix u = two_site(Matrix::Identity(model.d, model.d), rotation_x_pi(s));
  SpinModel out = model;
  out.hdensity = u * model.hdensity * u.adjoint();
  out.hdensity = 0.5 * (out.hdensity + out.hdensity.adjoint()).eval();
  auto it = out.params.find("rotated");
  const double flag = it == out.params.end() ? 0.0 : it->second;
  out.params["rotated"] = flag == 0.0 ? 1.0 : 0.0;
  return out;
}

SpinModel make_model(const std::string& name, const std::map<std::string, double>& params) {
  const auto get = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "blbq") {
    SpinModel m = blbq(get("p", 0.0));
    if (get("rotated", 0.0) != 0.0) m = sublattice_rotate(m);
    return m;
  }
  if (name == "heis_stag") return heisenberg_staggered(get("h", 0.0));
  throw Error("unknown model '" + name + "'");
}

UniformMps aklt_state() {
  SiteTensor a(3, 2);
  const double c1 = std::sqrt(2.0 / 3.0);
  const double c0 = std::sqrt(1.0 / 3.0);
  a.s[0] << 0, c1, 0, 0;     // m = +1
  a.s[1] << -c0, 0, 0, c0;   // m = 0
  a.s[2] << 0, 0, -c1, 0;    // m = -1
  return canonicalize(a);
}

UniformMps neel_state(int d) {
  SiteTensor a(d, 1);
  a.s[0](0, 0) = 1.0;
  return canonicalize(a);
}

SiteTensor pad_tensor(const SiteTensor& a, int D_new, double noise, unsigned seed) {
  if (D_new < a.D) throw Error("pad_tensor: cannot shrink bond dimension");
  SiteTensor out = SiteTensor::random(a.d, D_new, seed);
  out *= noise;
  for (int s = 0; s < a.d; ++s) out.s[s].topLeftCorner(a.D, a.D) = a.s[s];
  return out;
}

}  // namespace zpf
