#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>

#include <cstdint>

namespace pfreq {

struct EigenOptions {
  int block_size = 8;
  /// Backward-error target for every returned pair.
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eed5eedULL;
  /// Dense fallback below this size (also used as the test reference).
  Eigen::Index dense_limit = 400;
};

struct EigenResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;   // columns, mass-orthonormal
  Eigen::VectorXd residuals; // ||S x - l M x|| / ((||S|| + |l| ||M||) ||x||)
  int krylov_dimension = 0;
};

/// Smallest `count` eigenpairs of S x = l M x with S symmetric positive
/// semidefinite and M symmetric positive definite.
///
/// Shift-invert block Krylov with full M-reorthogonalization and a
/// Rayleigh-Ritz step on the pencil; the subspace grows until all requested
/// pairs meet the tolerance. Signs are normalized so that the first entry
/// of significant magnitude is positive.
EigenResult smallest_eigenpairs(const Eigen::SparseMatrix<double>& stiffness, const Eigen::SparseMatrix<double>& mass,
                                Eigen::Index count, const EigenOptions& options = {});

/// Dense generalized solver on the same pencil, for small problems and tests.
EigenResult dense_smallest_eigenpairs(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass,
                                      Eigen::Index count);

void normalize_signs(Eigen::MatrixXd& vectors);

}  // namespace pfreq
