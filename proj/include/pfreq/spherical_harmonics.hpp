#pragma once

#include <Eigen/Core>

namespace pfreq {

/// Flat index of the real harmonic of degree l and order m (-l <= m <= l).
constexpr int sh_index(int l, int m) { return l * l + l + m; }
constexpr int sh_count(int band) { return (band + 1) * (band + 1); }

/// Real orthonormal spherical harmonics up to degree `band` at the unit
/// vector n, ordered by sh_index. Order m > 0 carries cos(m phi), m < 0
/// carries sin(|m| phi); no Condon-Shortley phase.
///
/// If `gradients` is non-null it receives the tangential gradient of each
/// harmonic (3 x count), computed from the polynomial form so it stays finite
/// at the poles.
void real_spherical_harmonics(int band, const Eigen::Vector3d& n, Eigen::Ref<Eigen::VectorXd> values,
                              Eigen::Matrix3Xd* gradients = nullptr);

/// Gauss-Legendre nodes and weights on [-1, 1]; exact for degree 2n - 1.
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace pfreq
