#include "pfreq/analytic_basis.hpp"

#include "pfreq/error.hpp"
#include "pfreq/spherical_harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace pfreq {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Quadrature torus_quadrature(double period_x, double period_y, int nx, int ny) {
  Quadrature q;
  q.points.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) q.points.emplace_back(i * period_x / nx, j * period_y / ny, 0.0);
  }
  q.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(q.points.size()), period_x * period_y / (nx * ny));
  return q;
}

Quadrature sphere_quadrature(double radius, int n_theta, int n_phi, const Vec3& pole) {
  Eigen::VectorXd x, w;
  gauss_legendre(n_theta, x, w);
  const Vec3 e3 = pole.normalized();
  const auto [e1, e2] = tangent_basis(e3);
  Quadrature q;
  q.points.reserve(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi));
  q.weights.resize(static_cast<Eigen::Index>(n_theta) * n_phi);
  Eigen::Index k = 0;
  for (int i = 0; i < n_theta; ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - x[i] * x[i]));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = kTwoPi * j / n_phi;
      q.points.push_back(radius * (s * std::cos(phi) * e1 + s * std::sin(phi) * e2 + x[i] * e3));
      q.weights[k++] = w[i] * kTwoPi / n_phi * radius * radius;
    }
  }
  return q;
}

Eigen::MatrixXd AnalyticBasis::sample(const std::vector<Vec3>& points, std::size_t count) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) evaluate(points[i], count, out.col(static_cast<Eigen::Index>(i)));
  return out;
}

TorusFourierBasis::TorusFourierBasis(double period_x, double period_y, std::size_t count)
    : lx_(period_x), ly_(period_y) {
  if (!(period_x > 0.0) || !(period_y > 0.0) || count == 0) throw ParameterError("invalid torus basis");
  // Grow the index box until it certainly contains the `count` lowest modes.
  int box = 2;
  std::vector<std::tuple<double, int, int, int>> all;
  for (;;) {
    all.clear();
    for (int a = 0; a <= box; ++a) {
      for (int b = -box; b <= box; ++b) {
        if (a == 0 && b < 0) continue;
        const double lam = std::pow(kTwoPi * a / lx_, 2) + std::pow(kTwoPi * b / ly_, 2);
        all.emplace_back(lam, a, b, 0);
        if (a != 0 || b != 0) all.emplace_back(lam, a, b, 1);
      }
    }
    std::sort(all.begin(), all.end(), [](const auto& p, const auto& q) {
      if (std::get<0>(p) != std::get<0>(q)) return std::get<0>(p) < std::get<0>(q);
      return std::make_tuple(std::get<1>(p), std::get<2>(p), std::get<3>(p)) <
             std::make_tuple(std::get<1>(q), std::get<2>(q), std::get<3>(q));
    });
    const double bound = std::pow(kTwoPi * box / std::max(lx_, ly_), 2);
    if (all.size() >= count && std::get<0>(all[count - 1]) < bound) break;
    box *= 2;
  }
  // Truncation may split the last degenerate eigenspace.
  all.resize(count);
  eigenvalues_.resize(static_cast<Eigen::Index>(count));
  modes_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& [lam, a, b, par] = all[k];
    eigenvalues_[static_cast<Eigen::Index>(k)] = lam;
    modes_.push_back({a, b, par});
    max_index_ = std::max({max_index_, a, std::abs(b)});
  }
}

void TorusFourierBasis::evaluate(const Vec3& p, std::size_t count, Eigen::Ref<Eigen::VectorXd> values,
                                 Eigen::Matrix3Xd* gradients) const {
  const double area = lx_ * ly_;
  const double c0 = 1.0 / std::sqrt(area);
  const double c1 = std::sqrt(2.0 / area);
  if (gradients) gradients->setZero(3, static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    const auto [a, b, par] = modes_[k];
    const auto ek = static_cast<Eigen::Index>(k);
    if (a == 0 && b == 0) {
      values[ek] = c0;
      continue;
    }
    const double kx = kTwoPi * a / lx_, ky = kTwoPi * b / ly_;
    const double phase = kx * p.x() + ky * p.y();
    const double c = std::cos(phase), s = std::sin(phase);
    values[ek] = par == 0 ? c1 * c : c1 * s;
    if (gradients) {
      const double d = par == 0 ? -c1 * s : c1 * c;
      gradients->col(ek) = Vec3(kx * d, ky * d, 0.0);
    }
  }
}

std::string TorusFourierBasis::mode_label(std::size_t k) const {
  const auto [a, b, par] = modes_[k];
  if (a == 0 && b == 0) return "const";
  return std::string(par == 0 ? "cos" : "sin") + "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

Quadrature TorusFourierBasis::projection_quadrature() const {
  const int n = std::max(16, 2 * max_index_ + 2);
  return torus_quadrature(lx_, ly_, n, n);
}

SphereHarmonicBasis::SphereHarmonicBasis(double radius, int band) : radius_(radius), band_(band) {
  if (!(radius > 0.0) || band < 0) throw ParameterError("invalid sphere harmonic basis");
  eigenvalues_.resize(sh_count(band));
  for (int l = 0; l <= band; ++l) {
    for (int m = -l; m <= l; ++m) eigenvalues_[sh_index(l, m)] = l * (l + 1.0) / (radius * radius);
  }
}

void SphereHarmonicBasis::evaluate(const Vec3& p, std::size_t count, Eigen::Ref<Eigen::VectorXd> values,
                                   Eigen::Matrix3Xd* gradients) const {
  int band = 0;
  while (static_cast<std::size_t>(sh_count(band)) < count) ++band;
  Eigen::VectorXd full(sh_count(band));
  real_spherical_harmonics(band, p.normalized(), full, gradients);
  values.head(static_cast<Eigen::Index>(count)) = full.head(static_cast<Eigen::Index>(count)) / radius_;
  if (gradients) {
    gradients->conservativeResize(3, static_cast<Eigen::Index>(count));
    *gradients /= radius_ * radius_;
  }
}

std::string SphereHarmonicBasis::mode_label(std::size_t k) const {
  int l = 0;
  while (sh_count(l) <= static_cast<int>(k)) ++l;
  return "Y(" + std::to_string(l) + "," + std::to_string(static_cast<int>(k) - l * l - l) + ")";
}

Quadrature SphereHarmonicBasis::projection_quadrature() const {
  const int nt = band_ + 2;
  return sphere_quadrature(radius_, nt, 2 * nt + 2);
}

std::shared_ptr<const AnalyticBasis> make_analytic_basis(const Geometry& g, std::size_t min_count) {
  switch (g.kind()) {
    case GeometryKind::FlatTorus:
      return std::make_shared<TorusFourierBasis>(g.period_x(), g.period_y(), min_count);
    case GeometryKind::RoundSphere: {
      int band = 0;
      while (static_cast<std::size_t>(sh_count(band)) < min_count) ++band;
      return std::make_shared<SphereHarmonicBasis>(g.radius(), band);
    }
    case GeometryKind::Mesh:
      break;
  }
  throw ParameterError("closed-form eigenbasis requested on a mesh geometry");
}

}  // namespace pfreq
