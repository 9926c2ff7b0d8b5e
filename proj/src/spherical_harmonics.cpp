#include "pfreq/spherical_harmonics.hpp"

#include "pfreq/error.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace pfreq {

// Y_lm = q_lm(z) * Re/Im((x + i y)^|m|). The q_lm are associated Legendre
// functions divided by sin^m, which makes every term a polynomial in the
// Cartesian components.
void real_spherical_harmonics(int band, const Eigen::Vector3d& n, Eigen::Ref<Eigen::VectorXd> values,
                              Eigen::Matrix3Xd* gradients) {
  if (band < 0) throw ParameterError("spherical harmonic band must be non-negative");
  const int count = sh_count(band);
  if (values.size() < count) throw ParameterError("spherical harmonic output too small");
  const double z = n.z();
  const bool grad = gradients != nullptr;
  if (grad) gradients->setZero(3, count);

  // Powers w^m = (x + i y)^m, m = 0..band.
  std::vector<double> re(static_cast<std::size_t>(band + 1)), im(static_cast<std::size_t>(band + 1));
  re[0] = 1.0;
  im[0] = 0.0;
  for (int m = 1; m <= band; ++m) {
    re[static_cast<std::size_t>(m)] = re[static_cast<std::size_t>(m - 1)] * n.x() - im[static_cast<std::size_t>(m - 1)] * n.y();
    im[static_cast<std::size_t>(m)] = re[static_cast<std::size_t>(m - 1)] * n.y() + im[static_cast<std::size_t>(m - 1)] * n.x();
  }

  std::vector<double> q(static_cast<std::size_t>(band + 1)), dq(static_cast<std::size_t>(band + 1));
  double qmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int m = 0; m <= band; ++m) {
    if (m > 0) qmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    const double scale = m == 0 ? 1.0 : std::sqrt(2.0);
    // Degree recurrence in l for fixed m.
    q[static_cast<std::size_t>(m)] = qmm;
    dq[static_cast<std::size_t>(m)] = 0.0;
    if (m + 1 <= band) {
      const double c = std::sqrt(2.0 * m + 3.0);
      q[static_cast<std::size_t>(m + 1)] = c * z * qmm;
      dq[static_cast<std::size_t>(m + 1)] = c * qmm;
    }
    for (int l = m + 2; l <= band; ++l) {
      const double l2 = static_cast<double>(l) * l;
      const double lm1 = l - 1.0;
      const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - static_cast<double>(m) * m));
      const double b = std::sqrt((lm1 * lm1 - static_cast<double>(m) * m) / (4.0 * lm1 * lm1 - 1.0));
      const auto ul = static_cast<std::size_t>(l);
      q[ul] = a * (z * q[ul - 1] - b * q[ul - 2]);
      dq[ul] = a * (q[ul - 1] + z * dq[ul - 1] - b * dq[ul - 2]);
    }

    const auto um = static_cast<std::size_t>(m);
    for (int l = m; l <= band; ++l) {
      const auto ul = static_cast<std::size_t>(l);
      const double qs = scale * q[ul];
      values[sh_index(l, m)] = qs * re[um];
      if (m > 0) values[sh_index(l, -m)] = qs * im[um];
      if (!grad) continue;
      // Ambient gradient of the polynomial, then tangential projection.
      const double dqs = scale * dq[ul];
      Eigen::Vector3d gc, gs;
      if (m == 0) {
        gc = {0.0, 0.0, dqs};
      } else {
        const double r1 = re[um - 1], i1 = im[um - 1];
        gc = {qs * m * r1, -qs * m * i1, dqs * re[um]};
        gs = {qs * m * i1, qs * m * r1, dqs * im[um]};
        gradients->col(sh_index(l, -m)) = gs - n.dot(gs) * n;
      }
      gradients->col(sh_index(l, m)) = gc - n.dot(gc) * n;
    }
  }
}

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw ParameterError("Gauss-Legendre order must be positive");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    nodes[n - 1 - i] = -x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace pfreq
