#pragma once

#include <cmath>
#include <stdexcept>

#include "muskat/spectral_field.hpp"

namespace muskat {

/// The odd-symbol operators below zero the unpaired Nyquist mode k = -n/2:
/// it has no conjugate partner, so any odd multiplier acting on it would
/// break the realness of real fields.

/// Hilbert transform, symbol -sgn(k) with sgn(0) = 0. Maps real fields to
/// purely imaginary ones and annihilates the mean.
inline SpectralField hilbert(const SpectralField& f) {
    const int nyq = -f.size() / 2;
    return f.map_coeffs(
        [nyq](int k, Complex c) -> Complex {
            if (k == nyq) return 0.0;
            if (k > 0) return -c;
            if (k < 0) return c;
            return 0.0;
        },
        false);
}

/// d/da, symbol i*k.
inline SpectralField derivative(const SpectralField& f) {
    const int nyq = -f.size() / 2;
    return f.map_coeffs(
        [nyq](int k, Complex c) -> Complex {
            if (k == nyq) return 0.0;
            return Complex(0.0, k) * c;
        },
        f.is_real());
}

/// |d/da|^s, symbol |k|^s. For s = 1 this equals i*H*d/da exactly.
inline SpectralField abs_derivative(const SpectralField& f, double s = 1.0) {
    if (s < 0.0)
        throw std::invalid_argument("abs_derivative: exponent must be >= 0");
    const int nyq = -f.size() / 2;
    return f.map_coeffs(
        [s, nyq](int k, Complex c) -> Complex {
            if (k == 0) return s == 0.0 ? c : Complex(0.0);
            if (k == nyq && s > 0.0) return 0.0;
            return std::pow(std::abs(static_cast<double>(k)), s) * c;
        },
        f.is_real());
}

/// Second derivative, symbol -k^2.
inline SpectralField laplacian(const SpectralField& f) {
    return f.map_coeffs(
        [](int k, Complex c) { return -static_cast<double>(k) * k * c; },
        f.is_real());
}

/// Mean-zero antiderivative: coefficients divided by i*k, zero mode dropped.
inline SpectralField antiderivative(const SpectralField& f) {
    const int nyq = -f.size() / 2;
    return f.map_coeffs(
        [nyq](int k, Complex c) -> Complex {
            if (k == 0 || k == nyq) return 0.0;
            return c / Complex(0.0, k);
        },
        f.is_real());
}

enum class MollifierProfile { gaussian, raised_cosine };

/// Smoothing operator J_delta acting by an even unit-mass symbol;
/// delta = 0 is the identity.
struct MollifierSpec {
    double delta = 0.0;
    MollifierProfile profile = MollifierProfile::gaussian;

    double symbol(int k) const {
        if (delta == 0.0 || k == 0) return 1.0;
        const double x = delta * k;
        switch (profile) {
            case MollifierProfile::gaussian:
                return std::exp(-0.5 * x * x);
            case MollifierProfile::raised_cosine:
                return std::abs(x) <= std::numbers::pi
                           ? 0.5 * (1.0 + std::cos(x))
                           : 0.0;
        }
        return 1.0;
    }
};

inline SpectralField mollify(const SpectralField& f, const MollifierSpec& m) {
    if (m.delta == 0.0) return f;
    return f.map_coeffs(
        [&m](int k, Complex c) { return m.symbol(k) * c; }, f.is_real());
}

/// Harmonic (Poisson) extension evaluated on the line Im z' = depth < 0:
/// coefficients damped by exp(-|k| |depth|).
inline SpectralField poisson_extend(const SpectralField& f, double depth) {
    if (depth >= 0.0)
        throw std::invalid_argument("poisson_extend: depth must be < 0");
    const double y = -depth;
    return f.map_coeffs(
        [y](int k, Complex c) { return std::exp(-std::abs(k) * y) * c; },
        f.is_real());
}

inline double norm_l2(const SpectralField& f) {
    double s = 0.0;
    for (const auto& c : f.coeffs()) s += std::norm(c);
    return std::sqrt(two_pi * s);
}

/// Homogeneous H^{1/2} seminorm; the zero mode is excluded.
inline double norm_hhalf(const SpectralField& f) {
    double s = 0.0;
    for (int j = 0; j < f.size(); ++j)
        s += std::abs(f.grid().wavenumber(j)) * std::norm(f.coeff(j));
    return std::sqrt(two_pi * s);
}

inline double norm_hs(const SpectralField& f, double s) {
    double acc = 0.0;
    for (int j = 0; j < f.size(); ++j) {
        const double k2 = static_cast<double>(f.grid().wavenumber(j)) *
                          f.grid().wavenumber(j);
        acc += std::pow(1.0 + k2, s) * std::norm(f.coeff(j));
    }
    return std::sqrt(two_pi * acc);
}

/// L2 inner-product integral over [0, 2*pi) by the (spectrally exact)
/// trapezoid rule on node values.
inline double integral_real(const SpectralField& f) {
    double s = 0.0;
    for (const auto& v : f.values()) s += v.real();
    return s * f.grid().spacing();
}

} // namespace muskat
