#include "gibbsflow/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <stdexcept>

namespace gibbsflow {

Fft1D::Fft1D(int n) : n_(n), work_(n) {
    if (n < 2) throw std::invalid_argument("Fft1D: n must be >= 2");
    auto* buf = reinterpret_cast<fftw_complex*>(work_.data());
    // FFTW_UNALIGNED lets the plan run on any caller buffer via execute_dft
    plan_fwd_ = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_bwd_ = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("Fft1D: planning failed");
}

Fft1D::~Fft1D() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Fft1D::forward(std::complex<double>* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), p, p);
}

void Fft1D::backward(std::complex<double>* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), p, p);
}

double Fft1D::wavenumber(int m, int n, double box_length) {
    const int signed_m = (m <= n / 2 - 1 + (n % 2)) ? m : m - n;
    return 2.0 * 3.14159265358979323846 * signed_m / box_length;
}

const Fft1D& fft_plan(int n) {
    static std::map<int, std::unique_ptr<Fft1D>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Fft1D>(n)).first;
    return *it->second;
}

}  // namespace gibbsflow
