#include "pfreq/eigensolver.hpp"

#include "pfreq/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace pfreq {

namespace {

double sparse_norm1(const Eigen::SparseMatrix<double>& a) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    double col = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

Eigen::VectorXd residual_norms(const Eigen::SparseMatrix<double>& s, const Eigen::SparseMatrix<double>& m,
                               const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors) {
  const double ns = sparse_norm1(s), nm = sparse_norm1(m);
  const Eigen::MatrixXd sx = s * vectors;
  const Eigen::MatrixXd mx = m * vectors;
  Eigen::VectorXd r(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double denom = (ns + std::abs(values[k]) * nm) * vectors.col(k).norm();
    r[k] = (sx.col(k) - values[k] * mx.col(k)).norm() / denom;
  }
  return r;
}

// Orthonormalize the columns of `block` against `basis` and each other in
// the M inner product (two passes of classical Gram-Schmidt). Columns that
// collapse are replaced by fresh random vectors.
void m_orthonormalize(const Eigen::SparseMatrix<double>& m, const Eigen::MatrixXd& basis, Eigen::MatrixXd& block,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = std::sqrt(block.col(j).dot(m * block.col(j)));
      for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) {
          const Eigen::VectorXd mb = m * block.col(j);
          block.col(j) -= basis * (basis.transpose() * mb);
        }
        for (Eigen::Index i = 0; i < j; ++i) {
          block.col(j) -= block.col(i) * block.col(i).dot(m * block.col(j));
        }
      }
      const double after = std::sqrt(block.col(j).dot(m * block.col(j)));
      if (after > 1e-10 * before && after > 0.0) {
        block.col(j) /= after;
        break;
      }
      for (Eigen::Index r = 0; r < block.rows(); ++r) block(r, j) = unif(rng);
    }
  }
}

}  // namespace

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    const double big = vectors.col(k).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, k)) > 1e-8 * big) {
        if (vectors(i, k) < 0.0) vectors.col(k) *= -1.0;
        break;
      }
    }
  }
}

EigenResult dense_smallest_eigenpairs(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass,
                                      Eigen::Index count) {
  if (count < 1 || count > stiffness.rows()) throw ParameterError("requested eigenpair count out of range");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness, mass);
  if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed");
  EigenResult out;
  out.values = es.eigenvalues().head(count);
  out.vectors = es.eigenvectors().leftCols(count);
  normalize_signs(out.vectors);
  out.residuals = residual_norms(stiffness.sparseView(), mass.sparseView(), out.values, out.vectors);
  out.krylov_dimension = static_cast<int>(stiffness.rows());
  return out;
}

EigenResult smallest_eigenpairs(const Eigen::SparseMatrix<double>& stiffness, const Eigen::SparseMatrix<double>& mass,
                                Eigen::Index count, const EigenOptions& options) {
  const Eigen::Index n = stiffness.rows();
  if (count < 1 || count > n) throw ParameterError("requested eigenpair count out of range");
  if (n <= options.dense_limit) return dense_smallest_eigenpairs(Eigen::MatrixXd(stiffness), Eigen::MatrixXd(mass), count);

  // Negative shift keeps S - sigma M positive definite.
  const double sigma = -1e-3 * stiffness.diagonal().sum() / mass.diagonal().sum();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(stiffness - sigma * mass);
  if (solver.info() != Eigen::Success) throw SolverError("factorization of the shifted pencil failed");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Eigen::Index bs = std::min<Eigen::Index>(options.block_size, n);
  Eigen::MatrixXd block(n, bs);
  for (Eigen::Index j = 0; j < bs; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) block(i, j) = unif(rng);
  }
  Eigen::MatrixXd basis(n, 0);
  m_orthonormalize(mass, basis, block, rng);

  Eigen::Index target = std::min(n, 2 * count + 40);
  EigenResult out;
  for (;;) {
    while (basis.cols() < target) {
      const Eigen::Index old = basis.cols();
      basis.conservativeResize(n, old + block.cols());
      basis.rightCols(block.cols()) = block;
      if (basis.cols() >= n) break;
      Eigen::MatrixXd next = solver.solve(mass * block);
      m_orthonormalize(mass, basis, next, rng);
      const Eigen::Index room = n - basis.cols();
      block = next.leftCols(std::min(room, next.cols()));
    }
    const Eigen::MatrixXd reduced = basis.transpose() * (stiffness * basis);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (reduced + reduced.transpose()));
    out.values = es.eigenvalues().head(count);
    out.vectors = basis * es.eigenvectors().leftCols(count);
    out.residuals = residual_norms(stiffness, mass, out.values, out.vectors);
    out.krylov_dimension = static_cast<int>(basis.cols());
    if (out.residuals.maxCoeff() <= options.tolerance) break;
    if (basis.cols() >= n) {
      std::ostringstream msg;
      msg << "eigensolver did not converge: worst residual " << out.residuals.maxCoeff() << " at full dimension "
          << n;
      throw SolverError(msg.str());
    }
    target = std::min(n, target + target / 2);
  }
  normalize_signs(out.vectors);
  return out;
}

}  // namespace pfreq
