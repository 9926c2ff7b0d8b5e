#pragma once

#include "pfreq/geometry.hpp"
#include "pfreq/spectral.hpp"

#include <cstdint>

namespace pfreq {

/// Eigenfield k of the basis (k = 0 is the constant mode).
ScalarField eigenmode_data(const SpectralBasis& basis, std::size_t k);

/// Standard-normal coefficients on every mode up to the `band`-th distinct
/// nonzero eigenvalue level, constant mode included. Eigenvalues within 5%
/// of each other count as one level, so discrete clusters group like their
/// smooth counterparts.
ScalarField random_bandlimited_data(const SpectralBasis& basis, std::uint64_t seed, int band);

/// exp(-d^2 / (2 width^2)) with d the geodesic distance to sample `center`.
ScalarField bump_data(const Geometry& g, int center, double width);

}  // namespace pfreq
