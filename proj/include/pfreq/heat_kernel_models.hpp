#pragma once

#include "pfreq/geometry.hpp"

#include <memory>

namespace pfreq {

/// 1D periodic heat kernel (value and x-derivative). Image sum or Fourier
/// series, each truncated once the remaining tail is below 1e-16 relative.
struct PeriodicKernel1D {
  double value = 0.0;
  double derivative = 0.0;
};

PeriodicKernel1D periodic_heat_kernel(double x, double period, double t, bool image_sum);

/// Time below which the torus kernel uses images; above it the Fourier series.
double torus_image_crossover(double period_x, double period_y);

/// Heat kernel of the flat torus; it factors into two 1D periodic kernels.
double torus_heat_kernel(const AnalyticModel& torus, const Vec3& x, const Vec3& o, double t, Vec3* gradient = nullptr);

/// Zonal series for the heat kernel of the round sphere, summed in quad
/// precision so that values near the antipode keep their relative accuracy
/// for t down to about r^2 / 20.
class SphereKernelSeries {
 public:
  SphereKernelSeries(double radius, double t);
  ~SphereKernelSeries();
  SphereKernelSeries(const SphereKernelSeries&) = delete;
  SphereKernelSeries& operator=(const SphereKernelSeries&) = delete;

  /// Kernel at points x given the source o (both on the sphere).
  double operator()(const Vec3& x, const Vec3& o, Vec3* gradient = nullptr, double* rel_error = nullptr) const;
  /// Kernel as a function of the cosine of the angle to the source.
  double at_cosine(double c, double* d_dc = nullptr, double* rel_error = nullptr) const;

  int terms() const;
  double radius() const { return radius_; }
  double time() const { return t_; }

 private:
  struct Coefficients;
  double radius_;
  double t_;
  std::unique_ptr<Coefficients> coeffs_;
};

}  // namespace pfreq
