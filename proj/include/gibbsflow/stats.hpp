// Small statistics toolkit: moment estimates with Monte Carlo errors,
// Kolmogorov-Smirnov one/two-sample tests, z-tests, chi-square tail
// probabilities, and simple least-squares fits.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gibbsflow {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

Estimate mean_estimate(std::span<const double> xs);

// Sample covariance of paired observations with its Monte Carlo standard
// error (normal-theory approximation, adequate at the ensemble sizes used).
Estimate covariance_estimate(std::span<const double> xs, std::span<const double> ys);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sample KS against a CDF given as a callable.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sample KS.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Survival function of the Kolmogorov distribution.
double kolmogorov_sf(double lambda);

// Upper tail of the chi-square distribution with k degrees of freedom.
double chi_square_sf(double x, double k);

// Two-sided p-value for a standard normal z.
double normal_two_sided_p(double z);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace gibbsflow
