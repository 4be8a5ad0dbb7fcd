// Thin RAII wrapper around FFTW complex-to-complex 1D transforms.
// Plans are cached per size; transforms are unnormalized (FFTW convention),
// callers divide by n after a forward/backward round trip.

#pragma once

#include <complex>
#include <vector>

namespace gibbsflow {

class Fft1D {
public:
    explicit Fft1D(int n);
    ~Fft1D();
    Fft1D(const Fft1D&) = delete;
    Fft1D& operator=(const Fft1D&) = delete;

    int size() const { return n_; }

    // in-place, unnormalized
    void forward(std::complex<double>* data) const;
    void backward(std::complex<double>* data) const;

    // physical wavenumber of FFT bin m for a box of length L:
    // 2*pi*m'/L with m' the signed bin index in [-n/2, n/2)
    static double wavenumber(int m, int n, double box_length);

private:
    int n_;
    void* plan_fwd_;
    void* plan_bwd_;
    std::vector<std::complex<double>> work_;
};

// Shared per-size plan cache (single-threaded use).
const Fft1D& fft_plan(int n);

}  // namespace gibbsflow
