#pragma once

#include "pfreq/geometry.hpp"
#include "pfreq/parallel.hpp"
#include "pfreq/spectral.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

namespace pfreq {

/// Symmetric 2x2 tensors, one per sample, in the orthonormal tangent frame
/// recorded alongside.
struct TensorField {
  std::vector<Eigen::Matrix2d> tensors;
  std::vector<std::uint8_t> reliable;
  std::vector<std::pair<Vec3, Vec3>> frames;
  std::string method;

  std::size_t size() const { return tensors.size(); }
  Eigen::VectorXd min_eigenvalues() const;
  std::size_t unreliable_count() const;
  TensorField& add_identity(const Eigen::VectorXd& scale);
  TensorField& add_identity(double scale);
};

/// Gradient (frame components) and Hessian of a function at one sample.
struct LocalJet {
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  bool reliable = true;
};

struct HessianOptions {
  Execution exec = Execution::Parallel;
  /// Finite-difference step as a fraction of the model length scale.
  double step = 1e-3;
  /// Optional per-sample rotation of the default frame (radians).
  std::vector<double> frame_angles;
  /// Differentiate log f instead of f.
  bool log = true;
};

/// Per-sample jets of f (or log f). Analytic kinds with an exact evaluator
/// use central differences in geodesic normal coordinates, where the
/// connection vanishes at the centre. A torus field without an evaluator
/// uses periodic grid differences. Meshes fit a quadratic over the two-ring
/// in the tangent plane; fewer than five neighbours marks the sample
/// unreliable.
std::vector<LocalJet> local_jets(const ScalarField& f, const Geometry& g, const HessianOptions& opt,
                                 std::string* method = nullptr, std::vector<std::pair<Vec3, Vec3>>* frames = nullptr);

/// Hessian of log f. Throws DomainError if f <= 0 at any sample.
TensorField hessian_log(const ScalarField& f, const Geometry& g, const HessianOptions& opt = {});

/// Hessian of log H plus identity / (2t).
TensorField harnack_tensor(const HeatKernelField& h, const Geometry& g, const HessianOptions& opt = {});

struct PositivityVerdict {
  double min_eigenvalue = 0.0;
  int argmin = -1;
  int violations = 0;
  int unreliable = 0;
  double tolerance = 0.0;
  bool pass = true;

  nlohmann::json to_json() const;
};

/// Verdict on T + lower * Id >= -tol * Id at every reliable sample.
PositivityVerdict check_positivity(const TensorField& t, const Eigen::VectorXd& lower, double tol);

enum class BoundForm { UpperKernel, LowerKernel, Gradient, BOfA };
std::string_view to_string(BoundForm form);

/// Heat kernels from one source over a (sample, time) grid.
struct KernelSamples {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;
  std::vector<Eigen::VectorXd> grad_sq;  // |grad H|^2, empty if not sampled
  Eigen::VectorXd distance;
  Eigen::VectorXd weights;               // sample measure (used only for reporting)
  int dimension = 2;
  /// K >= 0 with Ric >= -(m - 1) K.
  double curvature_bound = 0.0;
  std::string description;
};

KernelSamples sample_kernels(const Geometry& g, const SpectralBasis* basis, int source, const std::vector<double>& times,
                             bool with_gradient, Execution exec = Execution::Parallel);

/// Tightest constant for one of the kernel estimates on a sample grid. The
/// slack is the log-ratio between the two sides, non-negative by
/// construction.
struct FittedConstant {
  BoundForm form = BoundForm::UpperKernel;
  double value = 0.0;
  double log_value = 0.0;
  std::string grid;
  double slack_min = 0.0;
  double slack_median = 0.0;
  double slack_max = 0.0;
  int arg_time = -1;
  int arg_sample = -1;
  std::string notice;

  nlohmann::json to_json() const;
};

/// Upper: smallest C with H <= C t^{-m/2} exp(-d^2/5t).
/// Lower: largest C with the exponential lower bound.
/// Gradient: smallest B in the gradient estimate.
/// BOfA: smallest C0 with A <= C0 + d^2/4t + (m-1)K d^2/2, where
///       A = m + log(B / (t^{m/2} H)); pass B as `b_constant`.
FittedConstant fit_bound_constant(const KernelSamples& s, BoundForm form, double b_constant = 0.0);

/// Allowed deficit eps * (C0 + d^2 / 4t) of the heat-kernel matrix Harnack
/// estimate on nonnegatively curved spaces.
Eigen::VectorXd kernel_harnack_deficit(const Eigen::VectorXd& distance, double t, double eps, double c0);

/// Allowed deficit ((34/3 + eps) K + eps) * (m + log(B / (t^{m/2} f))) of the
/// general matrix Harnack estimate for a positive solution f.
Eigen::VectorXd general_harnack_deficit(const Eigen::VectorXd& f, double t, double eps, double k, double b, int m = 2);

/// Hessian of log R in the conformal metric e^{2u} g0 plus (R + 1/t) / 2,
/// expressed in the metric's orthonormal frame.
struct FlowHarnackResult {
  TensorField tensor;
  PositivityVerdict verdict;
};

FlowHarnackResult surface_flow_harnack(const ScalarField& curvature, const ScalarField& conformal, const Geometry& g0,
                                       double t, double tol, const HessianOptions& opt = {});

}  // namespace pfreq
