#include "gibbsflow/field_sampler.hpp"

#include "gibbsflow/fft.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gibbsflow {

LatticeField sample_ou_line(const Grid1D& grid, SeedStream seed, double c0) {
    grid.validate();
    if (grid.periodic) throw std::invalid_argument("sample_ou_line: grid must be non-periodic");
    if (c0 <= 0.0) throw std::invalid_argument("sample_ou_line: c0 must be positive");

    Rng rng(seed);
    LatticeField f(grid);
    const double h = grid.spacing();
    const double a = std::exp(-h);
    const double s = std::sqrt(c0 * (1.0 - a * a));
    const double s0 = std::sqrt(c0);

    f.values[0] = {s0 * rng.normal(), s0 * rng.normal()};
    for (int i = 1; i < grid.n_points; ++i) {
        const double re = a * f.values[i - 1].real() + s * rng.normal();
        const double im = a * f.values[i - 1].imag() + s * rng.normal();
        f.values[i] = {re, im};
    }
    return f;
}

LatticeField sample_ou_periodic(const Grid1D& grid, int mode_cutoff, SeedStream seed,
                                double c0) {
    grid.validate();
    if (!grid.periodic) throw std::invalid_argument("sample_ou_periodic: grid must be periodic");
    if (mode_cutoff < 0 || mode_cutoff > grid.n_points / 2)
        throw std::invalid_argument("sample_ou_periodic: mode_cutoff exceeds representable band");

    // Box of circumference 2*pi*L: modes k/L with k integer, amplitude
    // sigma_k^2 = (2*c0/pi) * (1/L) * (1+(k/L)^2)^{-1}, so that
    // E u(x) conj(u(y)) -> 2*c0*exp(-|x-y|) as L, cutoff -> infinity.
    const int n = grid.n_points;
    const double box = grid.length();
    const double big_l = box / (2.0 * 3.14159265358979323846);

    // On a full band (2*cutoff == n) the +cutoff and -cutoff frequencies share
    // one DFT bin; keep only the negative one so each bin is written once.
    const int k_hi = (2 * mode_cutoff == n) ? mode_cutoff - 1 : mode_cutoff;

    Rng rng(seed);
    std::vector<cplx> modes(n, cplx{0.0, 0.0});
    for (int k = -mode_cutoff; k <= k_hi; ++k) {
        const double freq = k / big_l;
        const double sigma = std::sqrt((2.0 * c0 / 3.14159265358979323846) / big_l /
                                       (1.0 + freq * freq));
        const cplx g = rng.complex_normal();
        const int bin = (k >= 0) ? k : k + n;
        modes[bin] = sigma * g;
    }

    // u(x_j) = sum_k modes_k e^{i k x_j / L}; with x_j = x_min + j*box/n this
    // is an inverse DFT (up to the e^{i k x_min / L} phase, absorbed here).
    for (int k = -mode_cutoff; k <= k_hi; ++k) {
        const int bin = (k >= 0) ? k : k + n;
        const double phase = k * grid.x_min / big_l;
        modes[bin] *= cplx{std::cos(phase), std::sin(phase)};
    }
    fft_plan(n).backward(modes.data());  // e^{+2*pi*i*jk/n} convention

    LatticeField f(grid);
    f.values = std::move(modes);
    return f;
}

namespace {

Estimate paired_covariance(const Ensemble& ensemble, int i, int j, bool cross) {
    if (ensemble.empty()) throw std::invalid_argument("empirical_covariance: empty ensemble");
    const int n = ensemble.front().grid.n_points;
    if (i < 0 || j < 0 || i >= n || j >= n)
        throw std::invalid_argument("empirical_covariance: index out of range");
    // The prior is mean-zero, so the covariance estimator is the mean of
    // products; its Monte Carlo error is the scatter of the products.
    std::vector<double> prod;
    prod.reserve(ensemble.size());
    for (const auto& f : ensemble) {
        const double x = f.values[i].real();
        const double y = cross ? f.values[j].imag() : f.values[j].real();
        prod.push_back(x * y);
    }
    return mean_estimate(prod);
}

}  // namespace

Estimate empirical_covariance(const Ensemble& ensemble, int i, int j) {
    return paired_covariance(ensemble, i, j, false);
}

Estimate empirical_cross_covariance(const Ensemble& ensemble, int i, int j) {
    return paired_covariance(ensemble, i, j, true);
}

}  // namespace gibbsflow
