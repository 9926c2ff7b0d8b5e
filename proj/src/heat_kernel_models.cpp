#include "pfreq/heat_kernel_models.hpp"

#include "pfreq/error.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace pfreq {

namespace {
constexpr double kPi = std::numbers::pi;
}

PeriodicKernel1D periodic_heat_kernel(double x, double period, double t, bool image_sum) {
  if (!(t > 0.0)) throw DomainError("heat kernel requires t > 0");
  x = std::remainder(x, period);
  PeriodicKernel1D out;
  if (image_sum) {
    const double norm = 1.0 / std::sqrt(4.0 * kPi * t);
    auto term = [&](int k) {
      const double y = x + k * period;
      const double e = norm * std::exp(-y * y / (4.0 * t));
      out.value += e;
      out.derivative += -y / (2.0 * t) * e;
      return e;
    };
    term(0);
    for (int k = 1;; ++k) {
      const double e = term(k) + term(-k);
      if (e <= 1e-17 * out.value) break;
    }
    return out;
  }
  const double w = 2.0 * kPi / period;
  out.value = 1.0 / period;
  for (int n = 1;; ++n) {
    const double e = std::exp(-w * w * n * n * t);
    out.value += 2.0 / period * e * std::cos(w * n * x);
    out.derivative += -2.0 / period * e * w * n * std::sin(w * n * x);
    if (e * period < 1e-17) break;
  }
  return out;
}

double torus_image_crossover(double period_x, double period_y) {
  const double l = std::min(period_x, period_y);
  return l * l / 8.0;
}

double torus_heat_kernel(const AnalyticModel& torus, const Vec3& x, const Vec3& o, double t, Vec3* gradient) {
  const bool images = t < torus_image_crossover(torus.period_x, torus.period_y);
  const auto kx = periodic_heat_kernel(x.x() - o.x(), torus.period_x, t, images);
  const auto ky = periodic_heat_kernel(x.y() - o.y(), torus.period_y, t, images);
  if (gradient) *gradient = Vec3(kx.derivative * ky.value, kx.value * ky.derivative, 0.0);
  return kx.value * ky.value;
}

struct SphereKernelSeries::Coefficients {
  std::vector<__float128> c;  // (2l+1) e^{-l(l+1)t/r^2} / (4 pi r^2)
};

SphereKernelSeries::SphereKernelSeries(double radius, double t)
    : radius_(radius), t_(t), coeffs_(std::make_unique<Coefficients>()) {
  if (!(t > 0.0)) throw DomainError("heat kernel requires t > 0");
  if (!(radius > 0.0)) throw ParameterError("sphere radius must be positive");
  const __float128 tau = static_cast<__float128>(t) / (static_cast<__float128>(radius) * radius);
  const __float128 inv_area = 1.0Q / (4.0Q * M_PIq * radius * radius);
  const __float128 step = expq(-2.0Q * tau);
  __float128 decay = 1.0Q;  // e^{-l(l+1)tau}
  __float128 ratio = step;  // e^{-2(l+1)tau}
  for (int l = 0; l < 200000; ++l) {
    const __float128 term = (2 * l + 1) * decay * inv_area;
    coeffs_->c.push_back(term);
    // Remaining terms are bounded by a geometric series with ratio <= ratio.
    if (l > 1 && term / (1.0Q - ratio) < 1e-36Q * inv_area) break;
    decay *= ratio;
    ratio *= step;
  }
}

SphereKernelSeries::~SphereKernelSeries() = default;

int SphereKernelSeries::terms() const { return static_cast<int>(coeffs_->c.size()); }

double SphereKernelSeries::at_cosine(double c, double* d_dc, double* rel_error) const {
  const __float128 x = std::clamp(c, -1.0, 1.0);
  const auto& co = coeffs_->c;
  __float128 pm2 = 1.0Q, pm1 = x;     // P_{l-2}, P_{l-1}
  __float128 dm2 = 0.0Q, dm1 = 1.0Q;  // their derivatives
  __float128 sum = co[0] + co[1] * x, dsum = co[1], abs_sum = co[0] + co[1] * fabsq(x);
  for (std::size_t l = 2; l < co.size(); ++l) {
    const __float128 pl = ((2.0Q * l - 1.0Q) * x * pm1 - (l - 1.0Q) * pm2) / l;
    // P'_l = P'_{l-2} + (2l - 1) P_{l-1}.
    const __float128 dl = dm2 + (2.0Q * l - 1.0Q) * pm1;
    sum += co[l] * pl;
    dsum += co[l] * dl;
    abs_sum += co[l] * fabsq(pl);
    pm2 = pm1;
    pm1 = pl;
    dm2 = dm1;
    dm1 = dl;
  }
  if (d_dc) *d_dc = static_cast<double>(dsum);
  if (rel_error) {
    const __float128 floor = 1e-33Q * abs_sum;
    *rel_error = sum > 0 ? static_cast<double>(floor / sum) : HUGE_VAL;
  }
  return static_cast<double>(sum);
}

double SphereKernelSeries::operator()(const Vec3& x, const Vec3& o, Vec3* gradient, double* rel_error) const {
  const Vec3 xh = x.normalized();
  const Vec3 oh = o.normalized();
  double d_dc = 0.0;
  const double value = at_cosine(xh.dot(oh), gradient ? &d_dc : nullptr, rel_error);
  if (gradient) *gradient = d_dc / radius_ * (oh - oh.dot(xh) * xh);
  return value;
}

}  // namespace pfreq
