#include "zpf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace zpf {

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw Error(what + ": non-finite entry");
}

double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() / scale;
}

HermitianEig hermitian_eig(const Matrix& m, double herm_tol) {
  if (m.rows() != m.cols()) throw Error("hermitian_eig: matrix is not square");
  require_finite(m, "hermitian_eig");
  const double defect = hermiticity_defect(m);
  if (defect > herm_tol) {
    std::ostringstream os;
    os << "hermitian_eig: input not Hermitian (relative defect " << defect << ")";
    throw Error(os.str());
  }
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw Error("hermitian_eig: solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

PseudoInverse pseudo_inverse(const Matrix& m, double rel_tol) {
  const auto n = m.rows();
  if (n == 0) return {Matrix(0, 0), 0};
  const auto eig = hermitian_eig(m, 1e-10);
  const double top = eig.values.cwiseAbs().maxCoeff();
  PseudoInverse out{Matrix::Zero(n, n), 0};
  if (top == 0.0) return out;
  const double cut = rel_tol * top;
  RealVector inv = RealVector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(eig.values(i)) > cut) {
      inv(i) = 1.0 / eig.values(i);
      ++out.rank;
    }
  }
  out.pinv = eig.vectors * inv.asDiagonal() * eig.vectors.adjoint();
  return out;
}

Vector general_eig(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error("general_eig: matrix is not square");
  require_finite(m, "general_eig");
  if (m.rows() == 0) return Vector(0);
  Eigen::ComplexEigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw Error("general_eig: solver failed");
  return es.eigenvalues();
}

Matrix psd_power(const Matrix& m, double power, double rel_tol) {
  const auto eig = hermitian_eig(m, 1e-10);
  const double top = eig.values.maxCoeff();
  RealVector p = RealVector::Zero(eig.values.size());
  if (top > 0) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (eig.values(i) > rel_tol * top) p(i) = std::pow(eig.values(i), power);
    }
  }
  return eig.vectors * p.asDiagonal() * eig.vectors.adjoint();
}

Matrix orthogonal_complement(const Matrix& q) {
  const auto rows = q.rows();
  const auto cols = q.cols();
  Eigen::HouseholderQR<Matrix> qr(q);
  Matrix full = qr.householderQ() * Matrix::Identity(rows, rows);
  Matrix comp = full.rightCols(rows - cols);
  // Remove any residual overlap with q for numerical hygiene.
  comp -= q * (q.adjoint() * comp);
  Eigen::HouseholderQR<Matrix> qr2(comp);
  Matrix out = qr2.householderQ() * Matrix::Identity(rows, rows - cols);
  return out;
}

double min_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s.size() ? s(s.size() - 1) : 0.0;
}

SolveResult gmres(const LinearMap& apply, const Vector& b, double tol,
                  int restart, int max_iter, const Vector* x0) {
  const Eigen::Index n = b.size();
  SolveResult out;
  out.x = x0 ? *x0 : Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x.setZero();
    out.converged = true;
    return out;
  }
  int total = 0;
  while (total < max_iter) {
    Vector r = b - apply(out.x);
    double beta = r.norm();
    out.residual = beta / bnorm;
    if (out.residual < tol) {
      out.converged = true;
      break;
    }
    const int k = std::min<int>(restart, static_cast<int>(n));
    Matrix basis(n, k + 1);
    Matrix h = Matrix::Zero(k + 1, k);
    basis.col(0) = r / beta;
    std::vector<Eigen::JacobiRotation<cplx>> rots(k);
    Vector g = Vector::Zero(k + 1);
    g(0) = beta;
    int used = 0;
    for (int j = 0; j < k && total < max_iter; ++j, ++total) {
      Vector w = apply(basis.col(j));
      for (int i = 0; i <= j; ++i) {
        h(i, j) = basis.col(i).dot(w);
        w -= h(i, j) * basis.col(i);
      }
      // second pass keeps the basis orthogonal when cancellations are severe
      for (int i = 0; i <= j; ++i) {
        const cplx c = basis.col(i).dot(w);
        h(i, j) += c;
        w -= c * basis.col(i);
      }
      h(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        h.col(j).applyOnTheLeft(i, i + 1, rots[i].adjoint());
      }
      cplx r_unused;
      rots[j].makeGivens(h(j, j), h(j + 1, j), &r_unused);
      h.col(j).applyOnTheLeft(j, j + 1, rots[j].adjoint());
      g.applyOnTheLeft(j, j + 1, rots[j].adjoint());
      used = j + 1;
      const bool breakdown = std::abs(w.norm()) < 1e-300;
      if (!breakdown) basis.col(j + 1) = w / w.norm();
      if (std::abs(g(j + 1)) / bnorm < tol || breakdown) break;
    }
    const Vector y = h.topLeftCorner(used, used)
                         .triangularView<Eigen::Upper>()
                         .solve(g.head(used));
    out.x += basis.leftCols(used) * y;
    out.iterations = total;
  }
  const Vector r = b - apply(out.x);
  out.residual = r.norm() / bnorm;
  out.converged = out.residual < tol;
  out.iterations = total;
  return out;
}

RitzPairs arnoldi_eigs(const LinearMap& apply, int n, int count,
                       const Vector& start, double tol, int krylov_dim,
                       int max_restarts, int converged) {
  if (count > n) throw Error("arnoldi_eigs: count exceeds dimension");
  const int k = std::min(n, std::max(krylov_dim, 2 * count + 2));
  Vector v = start;
  if (v.size() != n || v.norm() == 0.0) v = Vector::Ones(n);
  v.normalize();
  RitzPairs out;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    Matrix basis(n, k + 1);
    Matrix h = Matrix::Zero(k + 1, k);
    basis.col(0) = v;
    int used = k;
    for (int j = 0; j < k; ++j) {
      Vector w = apply(basis.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const cplx c = basis.col(i).dot(w);
          h(i, j) += c;
          w -= c * basis.col(i);
        }
      }
      h(j + 1, j) = w.norm();
      if (std::abs(h(j + 1, j)) < 1e-14) {
        used = j + 1;
        break;
      }
      basis.col(j + 1) = w / h(j + 1, j);
    }
    const Matrix hk = h.topLeftCorner(used, used);
    Eigen::ComplexEigenSolver<Matrix> es(hk);
    std::vector<int> order(used);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    const int take = std::min(count, used);
    const int need = converged < 0 ? take : std::min(converged, take);
    out.values.resize(take);
    out.vectors.resize(n, take);
    double worst = 0.0;
    const double beta = used < k ? 0.0 : std::abs(h(used, used - 1));
    for (int i = 0; i < take; ++i) {
      const Vector y = es.eigenvectors().col(order[i]);
      out.values(i) = es.eigenvalues()(order[i]);
      out.vectors.col(i) = basis.leftCols(used) * y;
      out.vectors.col(i).normalize();
      if (i < need)
        worst = std::max(worst, beta * std::abs(y(used - 1)) /
                                    std::max(1e-300, std::abs(out.values(i))));
    }
    if (worst < tol || used < k) return out;
    v = out.vectors.leftCols(need).rowwise().sum();
    if (v.norm() < 1e-12) v = out.vectors.col(0);
    v.normalize();
  }
  return out;
}

}  // namespace zpf
