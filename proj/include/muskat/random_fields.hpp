#pragma once

#include <random>

#include "muskat/spectral_field.hpp"

namespace muskat {

/// Seeded band-limited random fields with a mild coefficient decay;
/// used by tests, oracles, and the random preset. Reproducible across
/// platforms (mt19937_64 plus uniform draws only).
inline SpectralField random_band_limited(const Grid& grid, uint64_t seed,
                                         int k_max, double amplitude = 1.0,
                                         double decay_exponent = 2.0,
                                         bool real = true) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int n = grid.size();
    std::vector<Complex> coeffs(n, 0.0);
    const int kcap = std::min(k_max, n / 2 - 1);
    for (int k = 1; k <= kcap; ++k) {
        const double mag = amplitude / std::pow(k, decay_exponent);
        const Complex c(mag * unif(rng), mag * unif(rng));
        coeffs[k] = c;
        if (real) {
            coeffs[n - k] = std::conj(c);
        } else {
            coeffs[n - k] = Complex(mag * unif(rng), mag * unif(rng));
        }
    }
    return SpectralField::from_coeffs(grid, std::move(coeffs), real);
}

} // namespace muskat
