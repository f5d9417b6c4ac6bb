#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace muskat {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Equispaced periodic grid on [0, 2*pi). Wavenumbers run over
/// k in {-n/2, ..., n/2 - 1} in standard FFT storage order.
class Grid {
  public:
    explicit Grid(int n_points) : n_(n_points) {
        if (n_ < 8 || n_ % 2 != 0)
            throw std::invalid_argument("Grid: n_points must be even and >= 8");
    }

    int size() const { return n_; }
    double spacing() const { return two_pi / n_; }
    double node(int j) const { return two_pi * j / n_; }

    /// Wavenumber of the coefficient stored at index j.
    int wavenumber(int j) const { return j < n_ / 2 ? j : j - n_; }
    int max_wavenumber() const { return n_ / 2 - 1; }

    bool operator==(const Grid& o) const { return n_ == o.n_; }
    bool operator!=(const Grid& o) const { return n_ != o.n_; }

  private:
    int n_;
};

} // namespace muskat
