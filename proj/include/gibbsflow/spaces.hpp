// Weighted fractional Sobolev norms on the periodic simulation box and the
// weight functions they depend on. Fractional derivatives D^sigma are the
// Fourier multiplier <k>^sigma = (1+k^2)^{sigma/2}; the spatial weights
// (1+phi(x))^{-1} <x>^{-p} discount the box wrap-around, which is the honest
// treatment for non-localized data. Weights can be given as tables, power
// laws, or constructed from empirical moment-bound tables so that the
// associated xi function satisfies the required pointwise conditions.

#pragma once

#include "gibbsflow/grid.hpp"
#include "gibbsflow/report.hpp"

#include <string>
#include <vector>

namespace gibbsflow {

struct WeightSpec {
    enum class Kind { explicit_table, power_law, from_moment_bounds };
    Kind kind = Kind::power_law;
    // table over x >= 0; evaluation is even in x, linear interpolation,
    // constant extension beyond the last abscissa
    std::vector<double> table_x;
    std::vector<double> table_value;
    double exponent = 0.0;  // power_law: phi(x) = <x>^exponent - 1

    double value(double x) const;
    // non-negative, even by construction, non-decreasing on the half-line
    void validate() const;
};

struct NormParams {
    double sigma = -1.9;      // regularity exponent, in [-2, -7/4)
    double epsilon = 0.1;     // > 0, inflation of the X-norm exponents
    double alpha_time = 0.5;  // Hoelder index in (0, 1/2]
    double T = 1.0;           // time horizon

    void validate() const;
};

// || (1+phi)^{-1} <x>^{-6} D^sigma f ||_{L^2}
double norm_X(const LatticeField& f, const WeightSpec& weight, const NormParams& params);

// || <x>^{-2} (1+phi)^{-1} D^{sigma+2} f ||_{L^2} +
// || <x>^{-2} (1+phi)^{-1/3} f ||_{L^6}
double norm_Z(const LatticeField& f, const WeightSpec& weight, const NormParams& params);

// || (1+phi)^{-1} <x>^{-6(1+eps)} D^{sigma(1+eps)} f ||_{L^2}
double norm_X_eps(const LatticeField& f, const WeightSpec& weight, const NormParams& params);

// sup over snapshot pairs of ||f(t1)-f(t2)||_X / |t1-t2|^alpha, plus the max
// over snapshots of ||f(t)||_X. Requires >= 2 snapshots at strictly
// increasing times within [-T, T].
double norm_time_holder(const std::vector<std::pair<double, LatticeField>>& trajectory,
                        const WeightSpec& weight, const NormParams& params);

// Empirical moment-bound tables on a common abscissa: phi2/phi6 bound the
// 2nd/6th absolute moments, phi2s bounds the fractional (r=2, alpha=s)
// increment moment.
struct MomentTables {
    std::vector<double> x;  // >= 0, increasing
    std::vector<double> phi2;
    std::vector<double> phi6;
    std::vector<double> phi2s;
    double s = 0.1;  // fractional order, must satisfy s < 1/4
};

// Smallest weight with phi >= phi6^{1/2} whose xi = ((1+phi)<x>^2)^{-1}
// satisfies the pointwise conditions
//   |xi|^2       <= phi2s^{-1} <x>^{-3}
//   |xi|^{1-2s}  <= phi2^{-1}  <x>^{-2}
// (each solved for a lower bound on 1+phi), evened and made non-decreasing
// by a running maximum.
WeightSpec weight_from_moment_bounds(const MomentTables& tables);

// Verifies the three xi-conditions for a weight on a periodic grid: the two
// algebraic ones pointwise and |D^s xi|^2 <= C phi2^{-1} <x>^{-2} via the
// Fourier multiplier; reports the smallest admissible constants.
std::vector<StatReport> check_xi_conditions(const WeightSpec& weight,
                                            const MomentTables& tables, const Grid1D& grid);

// Two-column CSV (x,value) of the weight evaluated on [0, x_max].
void write_weight_csv(const std::string& path, const WeightSpec& weight, double x_max,
                      int n_points);

}  // namespace gibbsflow
