// Schrödinger operators on the target plane: finite-difference discretization
// with Dirichlet walls, eigendecomposition (tridiagonal solver in dimension 1,
// Lanczos with full reorthogonalization in dimension 2), semigroup kernels
// e^{-s(L - E)} assembled from the low spectrum, the closed-form Mehler kernel
// with analytic x-derivatives, and diagnostic checks (kernel envelopes, WKB
// tail decay of the ground state).

#pragma once

#include "gibbsflow/report.hpp"

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace gibbsflow {

// Symmetric box [-u_max, u_max]^dimension with homogeneous Dirichlet walls.
// Only interior points are stored: spacing 2*u_max/(n_u+1), points
// -u_max + (i+1)*spacing for i = 0..n_u-1 along each axis.
struct TargetGrid {
    double u_max = 5.0;
    int n_u = 64;
    int dimension = 2;

    void validate() const;
    double spacing() const { return 2.0 * u_max / (n_u + 1); }
    double point(int i) const { return -u_max + (i + 1) * spacing(); }
    int n_states() const { return dimension == 1 ? n_u : n_u * n_u; }
    double cell_volume() const {
        const double h = spacing();
        return dimension == 1 ? h : h * h;
    }
    // coordinates of flattened state index (dimension 2: s = i*n_u + j)
    double coord1(int s) const { return dimension == 1 ? point(s) : point(s / n_u); }
    double coord2(int s) const { return dimension == 1 ? 0.0 : point(s % n_u); }
    double radius2(int s) const {
        const double a = coord1(s), b = coord2(s);
        return dimension == 1 ? a * a : a * a + b * b;
    }

    bool operator==(const TargetGrid&) const = default;
};

enum class PotentialKind { harmonic, harmonic_plus_quartic, custom };

// Potential tables on the grid. Conventions (constant shifts put the ground
// energy of the harmonic case at 0):
//   dimension 1, harmonic:              V =  u^2/2 - 1/2
//   dimension 1, harmonic_plus_quartic: V =  u^2/2 - 1/2 + u^4
//   dimension 2, harmonic:              V = |u|^2/2 - 1     (generator form)
//   dimension 2, harmonic_plus_quartic: V = |u|^2 + |u|^4 - 1/2  (literal quartic form)
std::vector<double> make_potential(const TargetGrid& grid, PotentialKind kind,
                                   std::span<const double> custom = {});

// Potential of the operator underlying the Gibbs pipeline in dimension 2:
// V = |u|^2/2 - 1 + c |u|^4, the generator form plus the reweighting quartic.
std::vector<double> gibbs_potential(const TargetGrid& grid, double quartic_coefficient);

struct SpectralOperator {
    TargetGrid grid;
    PotentialKind kind = PotentialKind::harmonic;
    std::vector<double> potential;     // n_states entries
    std::vector<double> eigenvalues;   // ascending, n_modes entries
    std::vector<double> eigenvectors;  // n_modes x n_states row-major,
                                       // orthonormal in the cell-volume inner product
    double ground_energy = 0.0;
    std::vector<double> ground_state;  // positive, sum gs^2 * cell_volume = 1

    int n_modes() const { return static_cast<int>(eigenvalues.size()); }
    const double* mode(int m) const { return eigenvectors.data() + std::size_t(m) * grid.n_states(); }
};

SpectralOperator build_operator(const TargetGrid& grid, PotentialKind kind,
                                std::span<const double> custom = {}, int n_modes = 200);

// Same as build_operator with the gibbs_potential; convenience for the
// measure pipeline.
SpectralOperator build_gibbs_operator(const TargetGrid& grid,
                                      double quartic_coefficient = 0.5, int n_modes = 200);

// Lowest eigenvalue only, via plain Lanczos without basis storage; cheap on
// refined grids, used for convergence/Richardson studies.
double ground_energy_only(const TargetGrid& grid, std::span<const double> potential,
                          int max_iterations = 400);

// Richardson extrapolation of a second-order-accurate quantity computed at
// spacings h and h/2; the result is fourth-order accurate.
inline double richardson(double value_h, double value_half) {
    return (4.0 * value_half - value_h) / 3.0;
}

// Closed-form kernel of e^{-x L0} in dimension 1 (L0 = -d^2/du^2/2 + u^2/2 - 1/2):
// (pi(1-e^{-2x}))^{-1/2} exp(-[ (u1^2+u2^2)(1+e^{-2x})/2 - 2 e^{-x} u1 u2 ] / (1-e^{-2x}))
double mehler_kernel(double x, double u1, double u2);

struct MehlerDerivatives {
    double q = 0.0;   // Q_x(u1,u2)
    double d1 = 0.0;  // dQ/dx
    double d2 = 0.0;  // d^2Q/dx^2
    double d3 = 0.0;  // d^3Q/dx^3
};

// Analytic derivatives of the closed form (machine-generated common
// subexpression code; finite differences lose too many digits at order 3).
MehlerDerivatives mehler_derivatives(double x, double u1, double u2);

struct KernelTable {
    double s = 0.0;
    TargetGrid grid;
    std::vector<double> values;  // n_states x n_states, symmetric
    double truncation_error = 0.0;

    double at(int a, int b) const { return values[std::size_t(a) * grid.n_states() + b]; }
};

// K_s(a,b) = sum_{m<n_modes} e^{-s(lambda_m - E)} psi_m(a) psi_m(b).
KernelTable semigroup_kernel(const SpectralOperator& op, double s, int n_modes);

// Chapman-Kolmogorov composition: (K*K')(a,b) = sum_c K(a,c) K'(c,b) cell_volume.
KernelTable compose(const KernelTable& a, const KernelTable& b);

// Envelope check for the Mehler kernel and its first three x-derivatives:
//   Q          <= C (1 + d^{-1})
//   |dQ/dx|    <= C (1 + d^{-3/2} s1)
//   |d2Q/dx2|  <= C (1 + d^{-5/2} s1^2)
//   |d3Q/dx3|  <= C (1 + d^{-7/2} s1^3)
// with d = |u1-u2|, s1 = |u1+u2|; reports the smallest admissible constant
// over the sample, and verifies the x->0 vanishing of the first two
// derivatives off the diagonal.
StatReport check_kernel_estimates(std::span<const double> x_values,
                                  std::span<const std::pair<double, double>> sample_points);

// Fits log(-log ground_state) against log|u| on [fit_lo, fit_hi] (both signs
// pooled), with the far tail recomputed by a stable inward-marching recurrence
// from the Dirichlet wall. pass iff the exponent is in [2.7, 3.3].
StatReport check_wkb_decay(const SpectralOperator& op, double fit_lo, double fit_hi);

// Binary eigendecomposition cache. Key covers grid, kind, potential content,
// and n_modes. Directory from the GIBBSFLOW_CACHE environment variable (no
// caching when unset).
std::string operator_cache_key(const TargetGrid& grid, PotentialKind kind,
                               std::span<const double> potential, int n_modes);
bool load_operator_cache(const std::string& dir, const std::string& key, SpectralOperator& out);
void save_operator_cache(const std::string& dir, const std::string& key,
                         const SpectralOperator& op);

// build_operator through the cache (env GIBBSFLOW_CACHE), falling back to a
// fresh build.
SpectralOperator build_operator_cached(const TargetGrid& grid, PotentialKind kind,
                                       std::span<const double> custom = {}, int n_modes = 200);
SpectralOperator build_gibbs_operator_cached(const TargetGrid& grid,
                                             double quartic_coefficient = 0.5,
                                             int n_modes = 200);

}  // namespace gibbsflow
