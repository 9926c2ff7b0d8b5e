#pragma once

#include "pfreq/geometry.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/parallel.hpp"
#include "pfreq/spectral.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace pfreq {

struct FrequencyConfig {
  Geometry geometry = Geometry::flat_torus(1.0, 1.0, 8, 8);
  /// Modal basis on analytic kinds, mesh eigenbasis otherwise.
  std::shared_ptr<const SpectralBasis> basis;
  ScalarField u0;
  int basepoint = 0;
  double horizon = 1.0;
  std::vector<double> times;
  /// Scale u0 to unit Dirichlet energy (the raw scale is recorded).
  bool normalize = true;
  /// Also evaluate W = int H |Hess u|^2 (analytic kinds only).
  bool with_w = false;
};

/// Integrals at one kernel time t, with u evaluated at T - t.
struct FrequencySample {
  double t = 0.0;
  double Z = 0.0;
  double D = 0.0;
  double W = 0.0;  // NaN when not requested or unavailable
  /// int H |grad u|^2 d^2 (distance to the basepoint).
  double weighted_distance = 0.0;
};

/// Precomputed state for repeated Z/D evaluation.
///
/// Analytic kinds integrate the modal expansion of u against the
/// closed-form kernel on a quadrature fitted to the smallest time in the
/// grid: a periodic grid anchored at the basepoint on the torus, and a
/// Gauss-Legendre grid with its pole at the basepoint on the sphere (the
/// kernel is then constant on each ring). Meshes use the lumped mass for Z
/// and per-triangle gradients for D.
class FrequencyEvaluator {
 public:
  explicit FrequencyEvaluator(FrequencyConfig cfg, Execution exec = Execution::Parallel);

  FrequencySample evaluate(double t, Execution exec = Execution::Serial) const;

  const FrequencyConfig& config() const { return cfg_; }
  /// Modal coefficients of the (normalized) initial data.
  const Eigen::VectorXd& coefficients() const { return coeff_; }
  double raw_scale() const { return raw_scale_; }
  bool constant_data() const { return constant_; }
  double a0() const { return a0_; }
  double projection_residual() const { return projection_residual_; }
  bool has_w() const;
  std::string pipeline() const;
  std::size_t quadrature_size() const;

 private:
  struct Analytic;
  FrequencyConfig cfg_;
  Eigen::VectorXd coeff_;
  double raw_scale_ = 1.0;
  bool constant_ = false;
  double a0_ = 0.0;
  double projection_residual_ = 0.0;
  std::shared_ptr<const Analytic> analytic_;
  FaceGradient face_grad_;
  Eigen::VectorXd distance_sq_;
};

struct TraceRow {
  double t, Z, D, I, N, W;
};

struct Trace {
  std::vector<TraceRow> rows;
  bool has_w = false;
  nlohmann::json provenance = nlohmann::json::object();

  std::vector<double> column(const std::string& name) const;
  std::vector<std::string> columns() const;
};

/// Z(t) and D(t) for a single time (builds a one-off evaluator).
FrequencySample compute_ZD(const FrequencyConfig& cfg, double t);

/// One row per grid time, I = t D / Z and N = exp(sqrt t) t D / Z. Rows are
/// independent and computed in parallel.
Trace frequency_trace(const FrequencyEvaluator& ev, Execution exec = Execution::Parallel);
Trace frequency_trace(const FrequencyConfig& cfg, Execution exec = Execution::Parallel);

struct MonotonicityVerdict {
  std::string quantity;
  bool pass = true;
  double t_min = 0.0;
  double t_star = 0.0;  // end of the largest monotone prefix
  std::size_t prefix_rows = 0;
  double worst_violation = 0.0;  // largest relative drop
  double tolerance = 0.0;

  nlohmann::json to_json() const;
};

/// Pass iff v[i+1] - v[i] >= -tol |v[i]| for every consecutive pair.
MonotonicityVerdict monotonicity_verdict(const std::vector<double>& times, const std::vector<double>& values,
                                         const std::string& quantity, double tol);

enum class TraceQuantity { I, N, D, ScaledD };

/// ScaledD is exp(2 (m - 1) K t) D with Ric >= -(m - 1) K.
MonotonicityVerdict monotonicity_verdict(const Trace& trace, TraceQuantity q, double tol, double curvature_bound = 0.0,
                                         int dimension = 2);

struct IdentityReport {
  bool checked = false;
  std::string notice;
  double max_relative_error = 0.0;
  double at_time = 0.0;
  MonotonicityVerdict d_monotone;

  nlohmann::json to_json() const;
};

/// Central-difference dZ/dt against 2D on interior rows (uniform grids
/// only), plus monotonicity of D (or its curvature-scaled version).
IdentityReport check_ZD_identities(const Trace& trace, double curvature_lower_bound, double tol = 1e-6,
                                   int dimension = 2);

struct WeightedDistanceReport {
  double t = 0.0;
  double lhs = 0.0;  // t^{-1/2} int H |grad u|^2 d^2
  double D = 0.0;
  double ratio = 0.0;  // lhs / D, compared against 3/2
  bool pass = true;
};

WeightedDistanceReport weighted_distance_check(const FrequencyEvaluator& ev, double t);

struct WeightedDistanceScan {
  std::vector<WeightedDistanceReport> rows;
  /// Largest grid time up to which every row passes (0 if the first fails).
  double largest_passing_prefix_t = 0.0;
  /// Largest grid time at which the inequality holds at all.
  double largest_passing_t = 0.0;

  nlohmann::json to_json() const;
};

WeightedDistanceScan weighted_distance_scan(const FrequencyEvaluator& ev, const std::vector<double>& times,
                 Execution exec = Execution::Parallel);

struct VanishingOrderReport {
  double t0 = 0.0;
  double c_t0 = 0.0;  // exp(sqrt t0) t0 D(t0) / Z(t0)
  double worst_ratio = 0.0;
  double at_time = 0.0;
  double tolerance = 0.0;
  bool pass = true;

  nlohmann::json to_json() const;
};

/// Checks Z(t) >= Z(t0) (t / t0)^{2 C(t0)} (1 - tol) on grid rows t <= t0.
VanishingOrderReport vanishing_order_bound(const Trace& trace, double t0, double tol = 1e-3);

/// Fit of log D >= log c - C t^{-gamma} over a family of exponents; the
/// exponent plays the role of C_M * eps.
struct DLowerFit {
  bool feasible = false;
  std::string notice;
  double c = 0.0;
  double big_c = 0.0;
  double gamma = 0.0;
  double c_m = 0.0;  // gamma / eps
  double rms_residual = 0.0;
  std::size_t rows_used = 0;

  nlohmann::json to_json() const;
};

DLowerFit d_lower_bound_diagnostic(const Trace& trace, double eps);

/// `count` log-spaced (or uniform) times in [t_min, t_max].
std::vector<double> time_grid(double t_min, double t_max, std::size_t count, bool log_spaced = true);

}  // namespace pfreq
