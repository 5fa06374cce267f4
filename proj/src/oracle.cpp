#include "zpf/oracle.hpp"

#include <algorithm>

namespace zpf {

double OracleReport::max_dev() const {
  return std::max({M_dev, G_dev, eps_dev, dprime_dev, recon_dev});
}

OracleReport finite_chain_oracle(const UniformMps& mps, const TangentBasis& basis,
                                 const SpinModel& model, const GramData& gram,
                                 const BosonQuadratic& bq, int N, int margin) {
  OracleReport rep;
  rep.N = N;
  rep.anchor = margin;
  rep.max_x = std::min({N - 1 - 2 * margin, gram.L, bq.L});
  if (rep.max_x < 1) throw Error("finite_chain_oracle: window too short for the margin");
  const int m = basis.modes();
  const int i0 = margin;
  const int X = rep.max_x;
  const HamiltonianEnv env(mps, model);

  auto embed = [&](std::initializer_list<Derivative> ds) {
    return finite_chain_embed(mps, basis, N, std::vector<Derivative>(ds));
  };
  // single[j][nu]: derivative at i0 + j
  std::vector<std::vector<Vector>> single(X + 1);
  for (int j = 0; j <= X; ++j)
    for (int nu = 0; nu < m; ++nu) single[j].push_back(embed({{i0 + j, nu}}));
  // pair[x - 1][mu * m + nu]
  std::vector<std::vector<Vector>> pair(X);
  for (int x = 1; x <= X; ++x)
    for (int mu = 0; mu < m; ++mu)
      for (int nu = 0; nu < m; ++nu) pair[x - 1].push_back(embed({{i0, mu}, {i0 + x, nu}}));

  for (int x = 1; x <= X; ++x) {
    const Matrix M = gram.M_full(x);
    for (int k = 0; k < m; ++k)
      for (int p = 0; p < m * m; ++p)
        rep.M_dev = std::max(rep.M_dev, std::abs(single[0][k].dot(pair[x - 1][p]) - M(k, p)));
    for (int y = x; y <= X; ++y) {
      const Matrix G = gram.G_block(x, y);
      for (int p = 0; p < m * m; ++p)
        for (int q = 0; q < m * m; ++q)
          rep.G_dev =
              std::max(rep.G_dev, std::abs(pair[x - 1][p].dot(pair[y - 1][q]) - G(p, q)));
    }
  }

  for (int x = 0; x <= X; ++x)
    for (int nu = 0; nu < m; ++nu) {
      const Vector h = embedded_hamiltonian(env, N, single[x][nu]);
      for (int mu = 0; mu < m; ++mu)
        rep.eps_dev = std::max(rep.eps_dev, std::abs(single[0][mu].dot(h) - bq.eps[x](mu, nu)));
    }

  const Vector hpsi = embedded_hamiltonian(env, N, embed({}));
  Vector grad(m);
  for (int k = 0; k < m; ++k) grad(k) = single[0][k].dot(hpsi);
  for (int x = 1; x <= X; ++x)
    for (int p = 0; p < m * m; ++p) {
      cplx v = pair[x - 1][p].dot(hpsi);
      for (int k = 0; k < m; ++k) v -= pair[x - 1][p].dot(single[0][k]) * grad(k);
      rep.dprime_dev =
          std::max(rep.dprime_dev, std::abs(v - bq.delta_prime[x - 1](p / m, p % m)));
    }

  // Gtilde Delta = Delta' wherever Delta' lies in the range of Gtilde.
  const Matrix recon = gram.Gt_red * pairs_to_reduced(gram, bq.delta);
  rep.recon_dev = (recon - pairs_to_reduced(gram, bq.delta_prime)).cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace zpf
