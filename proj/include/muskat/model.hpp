#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "muskat/operators.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/spectral_field.hpp"

namespace muskat {

/// Drop a roundoff-size imaginary part, or throw if it is not roundoff.
inline SpectralField as_real(const SpectralField& f, const char* what,
                             double tol = 1e-9) {
    if (f.max_imag_abs() > tol * (1.0 + f.max_abs()))
        throw std::runtime_error(std::string(what) +
                                 ": field is not real to roundoff");
    return f.real_part();
}

/// State of the scalar tangent-angle formulation.
struct GFormState {
    SpectralField g;
    double time = 0.0;

    static GFormState make(const SpectralField& g, double time = 0.0) {
        return {as_real(g, "GFormState"), time};
    }

    static GFormState flat(const Grid& grid) {
        return {SpectralField::zero(grid), 0.0};
    }

    /// f = i H g, the log of |Z_{,a'}|.
    SpectralField f() const {
        return as_real(Complex(0.0, 1.0) * hilbert(g), "GFormState::f");
    }
};

/// State of the conformal-derivative formulation.
struct ZFormState {
    SpectralField inv_zap;    // 1/Z_{,a'}
    SpectralField zap;        // Z_{,a'}
    SpectralField z_minus_id; // Z(a') - a'
    double time = 0.0;

    static ZFormState flat(const Grid& grid) {
        return {SpectralField::constant(grid, 1.0),
                SpectralField::constant(grid, 1.0), SpectralField::zero(grid),
                0.0};
    }

    double min_abs_zap() const {
        double m = std::abs(zap.value(0));
        for (const auto& v : zap.values()) m = std::min(m, std::abs(v));
        return m;
    }

    /// omega = Z_{,a'} / |Z_{,a'}|.
    SpectralField omega() const {
        return zap.map_values([](Complex z) { return z / std::abs(z); },
                              false);
    }
};

/// Derived coefficient fields of a state.
struct CoefficientSet {
    SpectralField c;        // 1/|Z_{,a'}|
    SpectralField b;        // transport coefficient
    SpectralField B1;       // nonnegative curvature-type coefficient
    SpectralField script_A; // 1/|Z_{,a'}|^2 = c^2
};

/// c = exp(-i H g); the exponent is real for real g.
inline SpectralField compute_c(const GFormState& s) {
    SpectralField exponent =
        as_real(Complex(0.0, -1.0) * hilbert(s.g), "compute_c exponent");
    return pointwise_exp(exponent);
}

/// b = -i H(c^2).
inline SpectralField compute_b(const SpectralField& c) {
    SpectralField csq = multiply(c, c);
    return as_real(Complex(0.0, -1.0) * hilbert(csq), "compute_b");
}

/// B1 = -2 Im([1/Zbar_{,a'}, H] d/da (1/Z_{,a'})), spectral commutator route.
inline SpectralField compute_B1(const SpectralField& inv_zap) {
    SpectralField w = inv_zap.conjugate();
    SpectralField d = derivative(inv_zap);
    SpectralField comm = multiply(w, hilbert(d)) - hilbert(multiply(w, d));
    return -2.0 * comm.imag_part();
}

struct B1Result {
    SpectralField field;           // commutator-form evaluation
    double kernel_discrepancy = 0; // L2 gap vs the positive-kernel quadrature
    bool health_warning = false;
};

/// Dual-route B1: returns the commutator form and records the discrepancy
/// against the positive squared-difference kernel.
inline B1Result compute_B1_checked(const SpectralField& inv_zap) {
    SpectralField comm = compute_B1(inv_zap);
    SpectralField kern = b1_kernel_quadrature(inv_zap);
    const double gap = norm_l2(comm - kern);
    const double scale = std::max(1.0, norm_l2(comm));
    return {comm, gap, gap / scale > 1e-6};
}

inline CoefficientSet coefficients_g(const GFormState& s) {
    SpectralField c = compute_c(s);
    SpectralField b = compute_b(c);
    SpectralField w = Complex(0.0, -1.0) * (s.g + hilbert(s.g));
    SpectralField inv_zap = pointwise_exp(w);
    return {c, b, compute_B1(inv_zap), multiply(c, c)};
}

inline CoefficientSet coefficients_z(const ZFormState& z) {
    SpectralField c = pointwise_abs(z.inv_zap);
    SpectralField b = compute_b(c);
    return {c, b, compute_B1(z.inv_zap), multiply(c, c)};
}

/// dg/dt = -b dg/da - c^2 |d/da| g.
inline SpectralField rhs_g(const GFormState& s) {
    CoefficientSet coef = coefficients_g(s);
    SpectralField rhs = -1.0 * multiply(coef.b, derivative(s.g)) -
                        multiply(coef.script_A, abs_derivative(s.g));
    return as_real(rhs, "rhs_g");
}

/// Eulerian d/dt of 1/Z_{,a'}:
/// -i A d(1/Z)/da + B1 * (1/Z) - b d(1/Z)/da, with A = 1/|Z_{,a'}|^2.
inline SpectralField rhs_invzap(const ZFormState& z) {
    CoefficientSet coef = coefficients_z(z);
    SpectralField d = derivative(z.inv_zap);
    return Complex(0.0, -1.0) * multiply(coef.script_A, d) +
           multiply(coef.B1, z.inv_zap) - multiply(coef.b, d);
}

/// Z_t from Darcy's law: Zbar_t - i = -i / Z_{,a'}.
inline SpectralField darcy_velocity(const ZFormState& z) {
    return z.inv_zap.map_values(
        [](Complex u) { return std::conj(Complex(0.0, 1.0) * (1.0 - u)); },
        false);
}

/// Z_{,a'} = exp(i (I + H) g); Z - a' reconstructed with zero mean.
inline ZFormState g_to_z(const GFormState& s) {
    SpectralField theta = s.g + hilbert(s.g);
    SpectralField zap = pointwise_exp(Complex(0.0, 1.0) * theta);
    SpectralField inv_zap = pointwise_exp(Complex(0.0, -1.0) * theta);
    SpectralField z_minus_id =
        antiderivative(zap - SpectralField::constant(s.g.grid(), 1.0));
    return {inv_zap, zap, z_minus_id, s.time};
}

/// g = Im(log Z_{,a'}) with the branch unwrapped continuously along the
/// grid starting from the node of maximal |Z_{,a'}|, then normalized so the
/// mean lies in (-pi, pi].
inline GFormState z_to_g(const ZFormState& z) {
    const int n = z.zap.size();
    if (z.min_abs_zap() < 1e-8)
        throw std::runtime_error("z_to_g: |Z_{,a'}| too small, log branch undefined");
    int j0 = 0;
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
        const double a = std::abs(z.zap.value(j));
        if (a > best) {
            best = a;
            j0 = j;
        }
    }
    std::vector<double> theta(n);
    theta[j0] = std::arg(z.zap.value(j0));
    for (int step = 1; step < n; ++step) {
        const int j = (j0 + step) % n;
        const int jp = (j0 + step - 1) % n;
        double d = std::arg(z.zap.value(j)) - theta[jp];
        d -= two_pi * std::round(d / two_pi);
        theta[j] = theta[jp] + d;
    }
    double mean = 0.0;
    for (double t : theta) mean += t;
    mean /= n;
    const double shift = two_pi * std::round(mean / two_pi);
    std::vector<Complex> g(n);
    for (int j = 0; j < n; ++j) g[j] = theta[j] - shift;
    return {SpectralField::from_values(z.zap.grid(), std::move(g), true),
            z.time};
}

/// Smoothed-corner initial data: the tangent angle steps by (1 - nu) * pi
/// across a' = pi over scale eps. Built as the periodic sawtooth convolved
/// with a compactly supported raised-cosine bump of half-width eps/2, so the
/// profile extremes sit on the exact sawtooth outside the transition.
inline GFormState make_corner_data(double nu, double eps, const Grid& grid) {
    if (!(nu > 0.0 && nu < 1.0))
        throw std::invalid_argument("make_corner_data: nu must lie in (0,1)");
    if (!(eps > 0.0))
        throw std::invalid_argument("make_corner_data: eps must be > 0");
    const double h = 0.5 * eps;
    auto hann_hat = [h](int k) {
        const double u = std::abs(k) * h;
        const double pi = std::numbers::pi;
        if (u < 1e-8) return 1.0;
        if (std::abs(u - pi) < 1e-8) return 0.5;
        return (pi * pi) * std::sin(u) / (u * (pi * pi - u * u));
    };
    const int n = grid.size();
    std::vector<Complex> coeffs(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const int k = grid.wavenumber(j);
        if (k == 0 || k == -n / 2) continue;
        // -(1-nu) * sawtooth sum_{k>=1} sin(k (a - pi)) / k; the sign puts
        // the blow-up of |Z_{,a'}| (not its reciprocal) at the tip.
        const double sign = (k % 2 == 0) ? 1.0 : -1.0; // e^{-i k pi}
        coeffs[j] = -(1.0 - nu) * hann_hat(k) * sign / Complex(0.0, 2.0 * k);
    }
    return {SpectralField::from_coeffs(grid, std::move(coeffs), true), 0.0};
}

} // namespace muskat
