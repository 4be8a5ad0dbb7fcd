#include "gibbsflow/spaces.hpp"

#include "gibbsflow/fft.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace gibbsflow {

namespace {

double bracket(double x) { return std::sqrt(1.0 + x * x); }  // <x>

// D^order f on a periodic grid via the multiplier <k>^order
std::vector<cplx> fractional_derivative(const LatticeField& f, double order) {
    if (!f.grid.periodic)
        throw std::invalid_argument(
            "fractional derivative: periodic grid required (spectral multiplier)");
    const int n = f.grid.n_points;
    const double box = f.grid.length();
    std::vector<cplx> hat(f.values);
    const Fft1D& plan = fft_plan(n);
    plan.forward(hat.data());
    for (int m = 0; m < n; ++m) {
        const double k = Fft1D::wavenumber(m, n, box);
        hat[m] *= std::pow(1.0 + k * k, 0.5 * order) / n;
    }
    plan.backward(hat.data());
    return hat;
}

double weighted_l2(const Grid1D& grid, const std::vector<cplx>& g,
                   const std::function<double(double)>& w) {
    const double h = grid.spacing();
    double acc = 0.0;
    for (int i = 0; i < grid.n_points; ++i) {
        const double wi = w(grid.point(i));
        acc += wi * wi * std::norm(g[i]);
    }
    return std::sqrt(acc * h);
}

}  // namespace

double WeightSpec::value(double x) const {
    const double a = std::abs(x);
    switch (kind) {
        case Kind::power_law:
            return std::pow(bracket(a), exponent) - 1.0;
        case Kind::explicit_table:
        case Kind::from_moment_bounds: {
            if (table_x.empty()) throw std::invalid_argument("WeightSpec: empty table");
            if (a <= table_x.front()) return table_value.front();
            if (a >= table_x.back()) return table_value.back();
            const auto it = std::upper_bound(table_x.begin(), table_x.end(), a);
            const std::size_t k = static_cast<std::size_t>(it - table_x.begin());
            const double t = (a - table_x[k - 1]) / (table_x[k] - table_x[k - 1]);
            return table_value[k - 1] + t * (table_value[k] - table_value[k - 1]);
        }
    }
    throw std::logic_error("WeightSpec: unknown kind");
}

void WeightSpec::validate() const {
    if (kind == Kind::power_law) {
        if (exponent < 0.0)
            throw std::invalid_argument("WeightSpec: power-law exponent must be >= 0");
        return;
    }
    if (table_x.size() != table_value.size() || table_x.empty())
        throw std::invalid_argument("WeightSpec: malformed table");
    for (std::size_t i = 0; i < table_x.size(); ++i) {
        if (table_x[i] < 0.0 || !std::isfinite(table_value[i]) || table_value[i] < 0.0)
            throw std::invalid_argument("WeightSpec: table entries must be non-negative");
        if (i && (table_x[i] <= table_x[i - 1] || table_value[i] < table_value[i - 1]))
            throw std::invalid_argument(
                "WeightSpec: table must be increasing in x and non-decreasing in value");
    }
}

void NormParams::validate() const {
    if (!(sigma >= -2.0) || !(sigma < -1.75))
        throw std::invalid_argument("NormParams: sigma must lie in [-2, -7/4)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("NormParams: epsilon must be positive");
    if (!(alpha_time > 0.0) || !(alpha_time <= 0.5))
        throw std::invalid_argument("NormParams: alpha_time must lie in (0, 1/2]");
    if (!(T > 0.0)) throw std::invalid_argument("NormParams: T must be positive");
}

double norm_X(const LatticeField& f, const WeightSpec& weight, const NormParams& params) {
    params.validate();
    const auto d = fractional_derivative(f, params.sigma);
    return weighted_l2(f.grid, d, [&](double x) {
        return 1.0 / ((1.0 + weight.value(x)) * std::pow(bracket(x), 6.0));
    });
}

double norm_Z(const LatticeField& f, const WeightSpec& weight, const NormParams& params) {
    params.validate();
    const auto d = fractional_derivative(f, params.sigma + 2.0);
    const double l2 = weighted_l2(f.grid, d, [&](double x) {
        const double b = bracket(x);
        return 1.0 / ((1.0 + weight.value(x)) * b * b);
    });
    const double h = f.grid.spacing();
    double acc = 0.0;
    for (int i = 0; i < f.grid.n_points; ++i) {
        const double x = f.grid.point(i);
        const double b = bracket(x);
        const double w = 1.0 / (std::cbrt(1.0 + weight.value(x)) * b * b);
        const double g2 = w * w * std::norm(f.values[i]);
        acc += g2 * g2 * g2;
    }
    return l2 + std::pow(acc * h, 1.0 / 6.0);
}

double norm_X_eps(const LatticeField& f, const WeightSpec& weight, const NormParams& params) {
    params.validate();
    const auto d = fractional_derivative(f, params.sigma * (1.0 + params.epsilon));
    const double p = 6.0 * (1.0 + params.epsilon);
    return weighted_l2(f.grid, d, [&](double x) {
        return 1.0 / ((1.0 + weight.value(x)) * std::pow(bracket(x), p));
    });
}

double norm_time_holder(const std::vector<std::pair<double, LatticeField>>& trajectory,
                        const WeightSpec& weight, const NormParams& params) {
    params.validate();
    if (trajectory.size() < 2)
        throw std::invalid_argument("norm_time_holder: need >= 2 snapshots");
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        if (std::abs(trajectory[i].first) > params.T + 1e-12)
            throw std::invalid_argument("norm_time_holder: snapshot time outside [-T, T]");
        if (i && !(trajectory[i].first > trajectory[i - 1].first))
            throw std::invalid_argument("norm_time_holder: times must be strictly increasing");
    }
    double sup_norm = 0.0;
    for (const auto& [t, f] : trajectory) sup_norm = std::max(sup_norm, norm_X(f, weight, params));
    double holder = 0.0;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        for (std::size_t j = i + 1; j < trajectory.size(); ++j) {
            const auto& [t1, f1] = trajectory[i];
            const auto& [t2, f2] = trajectory[j];
            LatticeField diff(f1.grid);
            for (int k = 0; k < f1.size(); ++k) diff.values[k] = f2.values[k] - f1.values[k];
            holder = std::max(holder, norm_X(diff, weight, params) /
                                          std::pow(t2 - t1, params.alpha_time));
        }
    }
    return holder + sup_norm;
}

WeightSpec weight_from_moment_bounds(const MomentTables& tables) {
    const std::size_t n = tables.x.size();
    if (n == 0 || tables.phi2.size() != n || tables.phi6.size() != n ||
        tables.phi2s.size() != n)
        throw std::invalid_argument("weight_from_moment_bounds: malformed tables");
    if (!(tables.s > 0.0) || !(tables.s < 0.25))
        throw std::invalid_argument("weight_from_moment_bounds: s must lie in (0, 1/4)");
    for (std::size_t i = 0; i < n; ++i)
        if (!(tables.phi2[i] > 0.0) || !(tables.phi6[i] > 0.0) || !(tables.phi2s[i] > 0.0))
            throw std::invalid_argument("weight_from_moment_bounds: bounds must be positive");

    WeightSpec w;
    w.kind = WeightSpec::Kind::from_moment_bounds;
    w.table_x = tables.x;
    w.table_value.resize(n);
    const double s = tables.s;
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // each xi-condition solved for a lower bound on 1+phi; evaluated with
        // the sup of the inputs over the cell [x_i, x_{i+1}] so the linear
        // interpolation of the table never dips below the pointwise bound
        const std::size_t j = std::min(i + 1, n - 1);
        const double b = bracket(tables.x[j]);
        const double from_l6 = std::sqrt(std::max(tables.phi6[i], tables.phi6[j]));
        const double from_sq = std::sqrt(std::max(tables.phi2s[i], tables.phi2s[j]) / 1.0) /
                                   std::sqrt(bracket(tables.x[i])) - 1.0;
        const double from_frac =
            std::pow(std::max(tables.phi2[i], tables.phi2[j]) * std::pow(b, 4.0 * s),
                     1.0 / (1.0 - 2.0 * s)) - 1.0;
        running = std::max({running, from_l6, from_sq, from_frac, 0.0});
        w.table_value[i] = running;
    }
    w.validate();
    return w;
}

std::vector<StatReport> check_xi_conditions(const WeightSpec& weight,
                                            const MomentTables& tables, const Grid1D& grid) {
    grid.validate();
    if (!grid.periodic)
        throw std::invalid_argument("check_xi_conditions: periodic grid required");
    if (tables.x.empty() ||
        std::max(std::abs(grid.x_min), std::abs(grid.point(grid.n_points - 1))) >
            tables.x.back() + 1e-12)
        throw std::invalid_argument("check_xi_conditions: tables must cover the grid");
    auto phi2_at = [&](double x) -> double {
        const double a = std::abs(x);
        if (a >= tables.x.back()) return tables.phi2.back();
        const auto it = std::upper_bound(tables.x.begin(), tables.x.end(), a);
        const std::size_t k = it == tables.x.begin() ? 1 : (it - tables.x.begin());
        const double t = (a - tables.x[k - 1]) / (tables.x[k] - tables.x[k - 1]);
        return tables.phi2[k - 1] + t * (tables.phi2[k] - tables.phi2[k - 1]);
    };
    auto phi2s_at = [&](double x) -> double {
        const double a = std::abs(x);
        if (a >= tables.x.back()) return tables.phi2s.back();
        const auto it = std::upper_bound(tables.x.begin(), tables.x.end(), a);
        const std::size_t k = it == tables.x.begin() ? 1 : (it - tables.x.begin());
        const double t = (a - tables.x[k - 1]) / (tables.x[k] - tables.x[k - 1]);
        return tables.phi2s[k - 1] + t * (tables.phi2s[k] - tables.phi2s[k - 1]);
    };
    auto xi_at = [&](double x) {
        const double b = bracket(x);
        return 1.0 / ((1.0 + weight.value(x)) * b * b);
    };

    double c_sq = 0.0, c_frac = 0.0;
    LatticeField xi(grid);
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = grid.point(i);
        const double b = bracket(x);
        const double v = xi_at(x);
        xi.values[i] = v;
        c_sq = std::max(c_sq, v * v * phi2s_at(x) * b * b * b);
        c_frac = std::max(c_frac,
                          std::pow(v, 1.0 - 2.0 * tables.s) * phi2_at(x) * b * b);
    }
    // |D^s xi|^2 <= C phi2^{-1} <x>^{-2}
    const int n = grid.n_points;
    std::vector<cplx> hat(xi.values);
    const Fft1D& plan = fft_plan(n);
    plan.forward(hat.data());
    for (int m = 0; m < n; ++m) {
        const double k = Fft1D::wavenumber(m, n, grid.length());
        hat[m] *= std::pow(1.0 + k * k, 0.5 * tables.s) / n;
    }
    plan.backward(hat.data());
    double c_ds = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = grid.point(i);
        const double b = bracket(x);
        c_ds = std::max(c_ds, std::norm(hat[i]) * phi2_at(x) * b * b);
    }

    auto make = [&](const std::string& obs, double c, double target) {
        StatReport r;
        r.test_name = "xi_conditions";
        r.observable = obs;
        r.estimate = c;
        r.bound_or_target = target;
        r.pass = std::isfinite(c) && c <= target;
        return r;
    };
    // the algebraic conditions hold with constant 1 by construction; the
    // fractional-derivative constant only needs to be finite and O(1)
    return {make("xi_sq_vs_phi2s", c_sq, 1.0 + 1e-9),
            make("xi_frac_vs_phi2", c_frac, 1.0 + 1e-9),
            make("ds_xi_sq_vs_phi2", c_ds, 10.0)};
}

void write_weight_csv(const std::string& path, const WeightSpec& weight, double x_max,
                      int n_points) {
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < n_points; ++i) {
        const double x = x_max * i / (n_points - 1);
        rows.push_back({format_double(x), format_double(weight.value(x))});
    }
    write_csv(path, {"x", "value"}, rows);
}

}  // namespace gibbsflow
