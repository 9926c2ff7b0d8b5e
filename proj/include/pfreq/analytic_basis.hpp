#pragma once

#include "pfreq/geometry.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

namespace pfreq {

/// Nodes and weights of an integration rule on an analytic surface.
struct Quadrature {
  std::vector<Vec3> points;
  Eigen::VectorXd weights;

  std::size_t size() const { return points.size(); }
};

/// Trapezoid rule on an nx-by-ny periodic grid; exact for trigonometric
/// polynomials below the grid Nyquist index.
Quadrature torus_quadrature(double period_x, double period_y, int nx, int ny);

/// Gauss-Legendre in the polar cosine times uniform azimuth, with the polar
/// axis along `pole`. Exact for harmonics of total degree below
/// min(2 * n_theta, n_phi).
Quadrature sphere_quadrature(double radius, int n_theta, int n_phi, const Vec3& pole = Vec3::UnitZ());

/// Closed-form Laplace-Beltrami eigenbasis of an analytic model, ordered by
/// eigenvalue with a fixed tie order.
class AnalyticBasis {
 public:
  virtual ~AnalyticBasis() = default;

  virtual GeometryKind kind() const = 0;
  std::size_t size() const { return static_cast<std::size_t>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// Values of the first `count` modes at p, plus tangent gradients in
  /// ambient coordinates when `gradients` is non-null.
  virtual void evaluate(const Vec3& p, std::size_t count, Eigen::Ref<Eigen::VectorXd> values,
                        Eigen::Matrix3Xd* gradients = nullptr) const = 0;

  virtual std::string mode_label(std::size_t k) const = 0;

  /// Rule that integrates products of any two modes exactly.
  virtual Quadrature projection_quadrature() const = 0;

  /// Modes by samples matrix of values at the given points.
  Eigen::MatrixXd sample(const std::vector<Vec3>& points, std::size_t count) const;

 protected:
  Eigen::VectorXd eigenvalues_;
};

/// cos/sin modes of the lattice dual to the periods, normalized in L2.
class TorusFourierBasis final : public AnalyticBasis {
 public:
  TorusFourierBasis(double period_x, double period_y, std::size_t count);

  GeometryKind kind() const override { return GeometryKind::FlatTorus; }
  void evaluate(const Vec3& p, std::size_t count, Eigen::Ref<Eigen::VectorXd> values,
                Eigen::Matrix3Xd* gradients = nullptr) const override;
  std::string mode_label(std::size_t k) const override;
  Quadrature projection_quadrature() const override;

  /// Lattice indices (a, b) and parity (0 = cos, 1 = sin) of mode k.
  std::array<int, 3> mode(std::size_t k) const { return modes_[k]; }
  int max_index() const { return max_index_; }

 private:
  double lx_, ly_;
  int max_index_ = 0;
  std::vector<std::array<int, 3>> modes_;
};

/// Real spherical harmonics on the sphere of radius r, complete bands only.
class SphereHarmonicBasis final : public AnalyticBasis {
 public:
  SphereHarmonicBasis(double radius, int band);

  GeometryKind kind() const override { return GeometryKind::RoundSphere; }
  void evaluate(const Vec3& p, std::size_t count, Eigen::Ref<Eigen::VectorXd> values,
                Eigen::Matrix3Xd* gradients = nullptr) const override;
  std::string mode_label(std::size_t k) const override;
  Quadrature projection_quadrature() const override;

  int band() const { return band_; }
  double radius() const { return radius_; }

 private:
  double radius_;
  int band_;
};

/// Basis holding at least `min_count` modes for an analytic geometry.
std::shared_ptr<const AnalyticBasis> make_analytic_basis(const Geometry& g, std::size_t min_count);

}  // namespace pfreq
