// Gibbs reweightings of the oscillator prior and their samplers:
//   - sharp and smooth cutoff profiles (the smooth transition width is tied
//     to the partition estimate: width = D^3),
//   - Monte Carlo partition estimates D = E_prior e^{-Phi},
//   - a prior-reversible preconditioned Crank-Nicolson (pCN) chain whose
//     acceptance depends only on the bounded quartic potential,
//   - an exact transfer-operator sampler for the limit process (first point
//     from the squared ground state, transitions from the normalized
//     semigroup kernel),
//   - observable gap reports and common-random-number importance estimators
//     for measure-proximity checks.

#pragma once

#include "gibbsflow/field_sampler.hpp"
#include "gibbsflow/grid.hpp"
#include "gibbsflow/report.hpp"
#include "gibbsflow/rng.hpp"
#include "gibbsflow/spectral.hpp"
#include "gibbsflow/stats.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gibbsflow {

struct CutoffProfile {
    enum class Kind { sharp, smooth };
    double N = 1.0;
    Kind kind = Kind::sharp;
    double transition_width = 0.0;  // smooth only
    Grid1D grid;
    std::vector<double> values;  // in [0,1], 1 on [-N,N], 0 outside the support
};

// Smooth transition profile value: 1 for |x| <= N, 0 for |x| >= N + width,
// C-infinity monotone bump in between (f(t) = g(1-t)/(g(t)+g(1-t)) with
// g(t) = e^{-1/t}). Note f(t) + f(1-t) = 1, so the transition integrates to
// width/2 exactly.
double smooth_cutoff_value(double N, double width, double x);

CutoffProfile build_sharp_cutoff(double N, const Grid1D& grid);
CutoffProfile build_smooth_cutoff(double N, double width, const Grid1D& grid);

struct PartitionEstimate {
    double value = 1.0;
    double std_error = 0.0;
    long n_samples = 0;
};

// Smooth profile with transition_width = D^3. Throws when the width is below
// two grid spacings (the grid cannot resolve the transition).
CutoffProfile build_chi(double N, const PartitionEstimate& d, const Grid1D& grid);

struct MeasureSpec {
    enum class Kind { prior_q, mu_N, rho_N, rho_limit };
    enum class Sampler { importance, pcn_mcmc, transfer_exact };
    Kind kind = Kind::prior_q;
    std::optional<CutoffProfile> cutoff;
    double quartic_coefficient = 0.5;
    Sampler sampler = Sampler::pcn_mcmc;

    void validate() const;
};

// Trapezoidal quadrature weights of a grid (periodic: h everywhere).
std::vector<double> quadrature_weights(const Grid1D& grid);

// Phi(u) = coefficient * sum_i w_i chi_i |u_i|^4 with trapezoidal weights.
double quartic_potential(const LatticeField& u, const CutoffProfile& cutoff,
                         double coefficient);

// Piecewise-linear integral of |u|^4 over [a,b] (clipped to the grid span);
// resolves interval edges below the grid spacing by interpolation.
double quartic_mass_interval(const LatticeField& u, double a, double b);

// D-hat = mean of e^{-Phi} over prior replicas, with its Monte Carlo error.
PartitionEstimate estimate_partition(const MeasureSpec& spec, const Grid1D& grid,
                                     long n_samples, SeedStream seed);

struct PcnResult {
    Ensemble samples;
    double acceptance_rate = 0.0;
    std::string warning;  // set when the acceptance rate leaves [0.1, 0.9]
};

// Preconditioned Crank-Nicolson chain targeting the Gibbs measure on the
// grid: proposal u' = sqrt(1-beta^2) u + beta xi with xi a fresh prior draw,
// acceptance min(1, e^{Phi(u) - Phi(u')}).
PcnResult sample_gibbs_pcn(const MeasureSpec& spec, const Grid1D& grid, long n_samples,
                           double step, long burn_in, long thinning, SeedStream seed,
                           int mode_cutoff = -1 /* periodic grids; -1 = full band */);

// Exact iid sampling by rejection against the prior: Phi >= 0, so accepting a
// prior draw with probability e^{-Phi} targets the Gibbs measure exactly; the
// acceptance rate is the partition value D. Preferred when D is not tiny,
// because the output carries no Markov-chain autocorrelation.
Ensemble sample_gibbs_rejection(const MeasureSpec& spec, const Grid1D& grid, long n_samples,
                                SeedStream seed, int mode_cutoff = -1);

// Transfer-operator sampler state: active target states (squared ground state
// above a relative floor), cumulative first-point law, cumulative transition
// rows. Exact up to quadrature; no Markov-chain mixing concerns.
struct TransferSampler {
    TargetGrid target;
    double s = 0.0;                 // spatial step the transitions realize
    std::vector<int> active;        // flattened target-state ids
    std::vector<double> first_cdf;  // |active|
    std::vector<double> row_cdf;    // |active| x |active|
    double max_row_error = 0.0;     // |row sum - 1| before renormalization
    double max_negative_clamped = 0.0;

    int n_active() const { return static_cast<int>(active.size()); }
};

TransferSampler build_transfer_sampler(const SpectralOperator& op, double spacing,
                                       int n_modes);

// Samples the limit process exactly on a non-periodic grid. The operator must
// be the dimension-2 pipeline operator; the sampler can be prebuilt and
// reused across calls.
Ensemble sample_rho_exact(const SpectralOperator& op, const Grid1D& grid, long n_samples,
                          SeedStream seed, int n_modes = 250,
                          const TransferSampler* prebuilt = nullptr);

// Radial CDF of the squared ground state: P(|u| <= r).
std::function<double(double)> ground_state_radial_cdf(const SpectralOperator& op);

struct Observable {
    std::string name;
    std::function<double(const LatticeField&)> eval;
};

// Bounded defaults: e^{-|u(0)|^2}, cos(Re u(0)), and the windowed quartic
// mass over [-1,1].
std::vector<Observable> default_observables();

// |E_{mu_N} G - E_rho G| per N and observable; pass per observable iff the
// gap sequence is non-increasing in N beyond combined error bars.
std::vector<StatReport> feynman_kac_gap(const std::map<double, Ensemble>& mu_by_N,
                                        const Ensemble& rho,
                                        const std::vector<Observable>& observables);

// Self-normalized importance estimate of E G under weights e^{log_weights}
// over a common prior ensemble.
Estimate importance_expectation(const Ensemble& prior, const std::vector<double>& log_weights,
                                const Observable& g);

// Difference of two self-normalized importance estimates computed on the SAME
// prior ensemble; the delta-method standard error accounts for the common
// randomness, so gaps far below the single-estimator noise are resolvable.
Estimate importance_gap(const Ensemble& prior, const std::vector<double>& log_weights_a,
                        const std::vector<double>& log_weights_b, const Observable& g);

}  // namespace gibbsflow
