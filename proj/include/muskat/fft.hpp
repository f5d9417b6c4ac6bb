#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace muskat::detail {

// Cached FFTW plans. Plan creation is serialized (the FFTW planner is not
// thread safe); execution through fftw_execute_dft is.
class FftPlans {
  public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> dummy(n);
        fftw_plan plan = fftw_plan_dft_1d(
            n, reinterpret_cast<fftw_complex*>(dummy.data()),
            reinterpret_cast<fftw_complex*>(dummy.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

  private:
    FftPlans() = default;
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

/// coeffs[j] = (1/n) sum_m values[m] exp(-2*pi*i*j*m/n)
inline std::vector<std::complex<double>>
dft_forward(const std::vector<std::complex<double>>& values) {
    const int n = static_cast<int>(values.size());
    std::vector<std::complex<double>> in(values), out(n);
    fftw_plan plan = FftPlans::instance().get(n, FFTW_FORWARD);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / n;
    for (auto& c : out) c *= scale;
    return out;
}

/// values[m] = sum_j coeffs[j] exp(+2*pi*i*j*m/n)
inline std::vector<std::complex<double>>
dft_backward(const std::vector<std::complex<double>>& coeffs) {
    const int n = static_cast<int>(coeffs.size());
    std::vector<std::complex<double>> in(coeffs), out(n);
    fftw_plan plan = FftPlans::instance().get(n, FFTW_BACKWARD);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

} // namespace muskat::detail
