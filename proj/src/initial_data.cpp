#include "pfreq/initial_data.hpp"

#include "pfreq/error.hpp"

#include <cmath>
#include <random>

namespace pfreq {

ScalarField eigenmode_data(const SpectralBasis& basis, std::size_t k) {
  if (k >= basis.truncation()) throw ParameterError("eigenmode index beyond the basis truncation");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.truncation()));
  c[static_cast<Eigen::Index>(k)] = 1.0;
  return basis.synthesize(c);
}

ScalarField random_bandlimited_data(const SpectralBasis& basis, std::uint64_t seed, int band) {
  if (band < 0) throw ParameterError("band must be non-negative");
  const Eigen::VectorXd& lam = basis.eigenvalues;
  const double zero = 1e-8 * std::max(1.0, std::abs(lam[lam.size() - 1]));
  Eigen::Index cut = 0;
  int levels = 0;
  double level = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam[k] > zero && (levels == 0 || lam[k] > 1.05 * level)) {
      if (levels == band) break;
      ++levels;
      level = lam[k];
    }
    cut = k + 1;
  }
  if (levels < band) throw ParameterError("basis truncation holds fewer than " + std::to_string(band) + " levels");
  if (cut == lam.size() && band > 0) {
    // The last level may continue past the truncation.
    throw ParameterError("band reaches the basis truncation; enlarge the basis");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index k = 0; k < cut; ++k) c[k] = normal(rng);
  return basis.synthesize(c);
}

ScalarField bump_data(const Geometry& g, int center, double width) {
  if (!(width > 0.0)) throw ParameterError("bump width must be positive");
  const ScalarField d = geodesic_distance(g, center);
  ScalarField f;
  f.values = (-d.values.array().square() / (2 * width * width)).exp();
  if (g.is_analytic()) {
    f.exact = [m = g.analytic(), c = g.position(static_cast<std::size_t>(center)), width](const Vec3& p) {
      const double r = m.distance(p, c);
      return std::exp(-r * r / (2 * width * width));
    };
  }
  return f;
}

}  // namespace pfreq
