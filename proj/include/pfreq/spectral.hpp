#pragma once

#include "pfreq/analytic_basis.hpp"
#include "pfreq/eigensolver.hpp"
#include "pfreq/geometry.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/parallel.hpp"

#include <functional>
#include <memory>
#include <string_view>

namespace pfreq {

/// Truncated mass-orthonormal eigenbasis, sampled at the geometry's points.
///
/// On analytic kinds eigenfield k is closed-form mode k of `modes`, and
/// projections of fields with an exact evaluator use that basis' quadrature
/// rather than the sample weights.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenfields;  // samples x N
  Eigen::VectorXd residuals;
  SparseMatrix mass;            // inner product on sample values
  std::shared_ptr<const AnalyticBasis> modes;
  std::vector<Vec3> points;
  int krylov_dimension = 0;

  std::size_t truncation() const { return static_cast<std::size_t>(eigenvalues.size()); }
  bool modal() const { return static_cast<bool>(modes); }

  /// Mass inner products <f, phi_i>.
  Eigen::VectorXd coefficients(const ScalarField& f) const;
  /// Field with the given modal coefficients; carries an exact evaluator on
  /// analytic kinds.
  ScalarField synthesize(const Eigen::VectorXd& coeffs) const;
  /// max |<phi_i, phi_j> - delta_ij|. Modal bases are measured on their
  /// projection quadrature, nodal ones on the mass matrix.
  double orthonormality_error() const;
};

/// N lowest eigenpairs of the operator pair. Modal pairs are read off
/// directly; nodal pairs go through the sparse shift-invert solver.
SpectralBasis eigenbasis(const Geometry& g, const OperatorPair& ops, std::size_t n, const EigenOptions& options = {});

enum class KernelMethod { SpectralSeries, TorusImageSum, SphereHarmonicSeries };
std::string_view to_string(KernelMethod m);

/// H(., o; t) at the samples.
struct HeatKernelField {
  ScalarField field;
  /// Exact gradient in ambient coordinates (analytic kinds only).
  std::function<Vec3(const Vec3&)> gradient;
  double t = 0.0;
  int source = 0;
  Vec3 source_position = Vec3::Zero();
  KernelMethod method = KernelMethod::SpectralSeries;
  /// Truncation tail bound (series) or relative rounding floor.
  double error_estimate = 0.0;
};

/// Closed forms on the torus and sphere; meshes need `basis`. Throws
/// TruncationError when the series tail exceeds 1e-6 or the field dips
/// below -1e-8 * max.
HeatKernelField heat_kernel(const Geometry& g, const SpectralBasis* basis, int source, double t,
                            Execution exec = Execution::Parallel);

/// Kernel summed from the basis regardless of geometry kind.
HeatKernelField spectral_heat_kernel(const SpectralBasis& basis, int source, double t,
                                     Execution exec = Execution::Parallel);

/// Heat semigroup applied to u0 inside the truncated space.
ScalarField solve_heat(const SpectralBasis& basis, const ScalarField& u0, double t);

/// Terminal-value problem v_t + Lap v = 0 run backwards by elapsed time s.
/// Solved as the forward problem in the reversed time variable, so only
/// decaying exponentials appear.
ScalarField reversed_time_solve(const SpectralBasis& basis, const ScalarField& v_final, double s);

/// ||f - P f|| / ||f|| in the basis' inner product.
double projection_residual(const SpectralBasis& basis, const ScalarField& f);

double dirichlet_energy(const SpectralBasis& basis, const Eigen::VectorXd& coeffs);

}  // namespace pfreq
