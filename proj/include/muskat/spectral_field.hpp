#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "muskat/fft.hpp"
#include "muskat/grid.hpp"

namespace muskat {

using Complex = std::complex<double>;

/// Periodic grid function carrying both its node samples and its Fourier
/// coefficients under the convention f(a) = sum_k fhat(k) exp(i*k*a).
/// The two representations are kept consistent at construction; instances
/// are immutable afterwards.
class SpectralField {
  public:
    static SpectralField from_values(const Grid& grid,
                                     std::vector<Complex> values,
                                     bool real = false) {
        if (static_cast<int>(values.size()) != grid.size())
            throw std::invalid_argument("SpectralField: size mismatch");
        auto coeffs = detail::dft_forward(values);
        return SpectralField(grid, std::move(values), std::move(coeffs), real);
    }

    static SpectralField from_coeffs(const Grid& grid,
                                     std::vector<Complex> coeffs,
                                     bool real = false) {
        if (static_cast<int>(coeffs.size()) != grid.size())
            throw std::invalid_argument("SpectralField: size mismatch");
        auto values = detail::dft_backward(coeffs);
        return SpectralField(grid, std::move(values), std::move(coeffs), real);
    }

    static SpectralField from_real_values(const Grid& grid,
                                          const std::vector<double>& values) {
        std::vector<Complex> v(values.begin(), values.end());
        return from_values(grid, std::move(v), true);
    }

    /// Sample a scalar function at the grid nodes.
    template <typename F>
    static SpectralField sample(const Grid& grid, F&& fn, bool real = false) {
        std::vector<Complex> v(grid.size());
        for (int j = 0; j < grid.size(); ++j) v[j] = Complex(fn(grid.node(j)));
        return from_values(grid, std::move(v), real);
    }

    static SpectralField zero(const Grid& grid) {
        return from_coeffs(grid, std::vector<Complex>(grid.size(), 0.0), true);
    }

    static SpectralField constant(const Grid& grid, Complex c) {
        std::vector<Complex> coeffs(grid.size(), 0.0);
        coeffs[0] = c;
        return from_coeffs(grid, std::move(coeffs), c.imag() == 0.0);
    }

    const Grid& grid() const { return grid_; }
    int size() const { return grid_.size(); }
    bool is_real() const { return real_; }

    const std::vector<Complex>& values() const { return values_; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }
    Complex value(int j) const { return values_[j]; }
    Complex coeff(int j) const { return coeffs_[j]; }

    /// Coefficient of exp(i*k*a); zero outside the represented band.
    Complex coeff_at(int k) const {
        const int n = grid_.size();
        if (k < -n / 2 || k >= n / 2) return 0.0;
        return coeffs_[k >= 0 ? k : k + n];
    }

    Complex mean() const { return coeffs_[0]; }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    double max_imag_abs() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v.imag()));
        return m;
    }

    double min_real() const {
        double m = values_[0].real();
        for (const auto& v : values_) m = std::min(m, v.real());
        return m;
    }

    double max_real() const {
        double m = values_[0].real();
        for (const auto& v : values_) m = std::max(m, v.real());
        return m;
    }

    /// Exact trigonometric interpolation at an arbitrary point. For real
    /// fields the unpaired Nyquist mode is interpreted as cos(n a / 2), the
    /// unique real interpolant consistent with the node samples.
    Complex evaluate(double alpha) const {
        const int n = grid_.size();
        Complex acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const int k = grid_.wavenumber(j);
            if (real_ && k == -n / 2) {
                acc += coeffs_[j] * std::cos(0.5 * n * alpha);
                continue;
            }
            acc += coeffs_[j] * std::polar(1.0, k * alpha);
        }
        return acc;
    }

    /// New field with coefficients fn(k, fhat(k)).
    template <typename F>
    SpectralField map_coeffs(F&& fn, bool real_out) const {
        const int n = grid_.size();
        std::vector<Complex> c(n);
        for (int j = 0; j < n; ++j) c[j] = fn(grid_.wavenumber(j), coeffs_[j]);
        return from_coeffs(grid_, std::move(c), real_out);
    }

    /// New field with values fn(f(a_j)) at every node.
    template <typename F>
    SpectralField map_values(F&& fn, bool real_out) const {
        const int n = grid_.size();
        std::vector<Complex> v(n);
        for (int j = 0; j < n; ++j) v[j] = fn(values_[j]);
        return from_values(grid_, std::move(v), real_out);
    }

    SpectralField conjugate() const {
        return map_values([](Complex z) { return std::conj(z); }, real_);
    }

    SpectralField real_part() const {
        return map_values([](Complex z) { return Complex(z.real(), 0.0); },
                          true);
    }

    SpectralField imag_part() const {
        return map_values([](Complex z) { return Complex(z.imag(), 0.0); },
                          true);
    }

    friend SpectralField operator+(const SpectralField& a,
                                   const SpectralField& b) {
        a.check_same_grid(b);
        std::vector<Complex> c(a.coeffs_);
        for (int j = 0; j < a.size(); ++j) c[j] += b.coeffs_[j];
        return from_coeffs(a.grid_, std::move(c), a.real_ && b.real_);
    }

    friend SpectralField operator-(const SpectralField& a,
                                   const SpectralField& b) {
        a.check_same_grid(b);
        std::vector<Complex> c(a.coeffs_);
        for (int j = 0; j < a.size(); ++j) c[j] -= b.coeffs_[j];
        return from_coeffs(a.grid_, std::move(c), a.real_ && b.real_);
    }

    friend SpectralField operator*(Complex s, const SpectralField& f) {
        std::vector<Complex> c(f.coeffs_);
        for (auto& x : c) x *= s;
        return from_coeffs(f.grid_, std::move(c),
                           f.real_ && s.imag() == 0.0);
    }

    friend SpectralField operator*(double s, const SpectralField& f) {
        return Complex(s, 0.0) * f;
    }

    friend SpectralField operator-(const SpectralField& f) {
        return -1.0 * f;
    }

    void check_same_grid(const SpectralField& other) const {
        if (grid_ != other.grid_)
            throw std::invalid_argument("SpectralField: grid mismatch");
    }

  private:
    SpectralField(const Grid& grid, std::vector<Complex> values,
                  std::vector<Complex> coeffs, bool real)
        : grid_(grid), values_(std::move(values)), coeffs_(std::move(coeffs)),
          real_(real) {}

    Grid grid_;
    std::vector<Complex> values_;
    std::vector<Complex> coeffs_;
    bool real_;
};

/// Dealiased pointwise product via zero padding to 2n (satisfies the 2/3
/// rule: products of band n/2 modes are computed exactly on the fine grid
/// before truncation back to the coarse band).
inline SpectralField multiply(const SpectralField& a, const SpectralField& b) {
    a.check_same_grid(b);
    const int n = a.size();
    const int m = 2 * n;
    // For real fields the unpaired Nyquist coefficient is split evenly over
    // +-n/2 on the fine grid (the cos interpretation), keeping the padded
    // field real; on truncation the two halves fold back together.
    auto pad = [&](const SpectralField& f) {
        std::vector<Complex> c(m, 0.0);
        for (int j = 0; j < n; ++j) {
            const int k = a.grid().wavenumber(j);
            if (f.is_real() && k == -n / 2) {
                c[n / 2] = 0.5 * f.coeff(j);
                c[m - n / 2] = 0.5 * f.coeff(j);
                continue;
            }
            c[k >= 0 ? k : k + m] = f.coeff(j);
        }
        return detail::dft_backward(c);
    };
    auto va = pad(a);
    auto vb = pad(b);
    for (int j = 0; j < m; ++j) va[j] *= vb[j];
    auto cm = detail::dft_forward(va);
    const bool real_out = a.is_real() && b.is_real();
    std::vector<Complex> c(n);
    for (int j = 0; j < n; ++j) {
        const int k = a.grid().wavenumber(j);
        if (real_out && k == -n / 2) {
            c[j] = cm[m - n / 2] + cm[n / 2];
            continue;
        }
        c[j] = cm[k >= 0 ? k : k + m];
    }
    return SpectralField::from_coeffs(a.grid(), std::move(c), real_out);
}

/// Pointwise exp of node values (transcendental, no exact dealiasing).
inline SpectralField pointwise_exp(const SpectralField& f) {
    return f.map_values([](Complex z) { return std::exp(z); }, f.is_real());
}

/// Pointwise |f| as a real field.
inline SpectralField pointwise_abs(const SpectralField& f) {
    return f.map_values([](Complex z) { return Complex(std::abs(z), 0.0); },
                        true);
}

/// Pointwise 1/f.
inline SpectralField pointwise_reciprocal(const SpectralField& f) {
    return f.map_values([](Complex z) { return 1.0 / z; }, f.is_real());
}

} // namespace muskat
