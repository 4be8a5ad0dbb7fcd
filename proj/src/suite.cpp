#include "gibbsflow/suite.hpp"

#include "gibbsflow/nls_flow.hpp"
#include "gibbsflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gibbsflow {

namespace {

// seed stream sub-ids, one block per test
enum : std::uint64_t {
    kSeedInvariance = 101,
    kSeedMoments = 201,
    kSeedProximity = 301,
    kSeedNonloc = 401,
    kSeedTightness = 501,
};

Grid1D flow_grid(const TestPlan& p) {
    return Grid1D{-p.box_half_length, p.box_half_length, p.flow_points, true};
}

Grid1D line_grid(double half, double spacing) {
    const int n = static_cast<int>(std::lround(2.0 * half / spacing)) + 1;
    return Grid1D{-half, half, n, false};
}

int nearest_index(const Grid1D& g, double x) {
    int best = 0;
    for (int i = 1; i < g.n_points; ++i)
        if (std::abs(g.point(i) - x) < std::abs(g.point(best) - x)) best = i;
    return best;
}

std::vector<double> probe_values(const Ensemble& ens, int idx, bool abs_part) {
    std::vector<double> v(ens.size());
    for (std::size_t m = 0; m < ens.size(); ++m)
        v[m] = abs_part ? std::sqrt(std::norm(ens[m].values[idx]))
                        : ens[m].values[idx].real();
    return v;
}

std::vector<double> moment_values(const Ensemble& ens, int idx, int r) {
    std::vector<double> v(ens.size());
    for (std::size_t m = 0; m < ens.size(); ++m) {
        const double a2 = std::norm(ens[m].values[idx]);
        v[m] = (r == 2) ? a2 : (r == 4) ? a2 * a2 : a2 * a2 * a2;
    }
    return v;
}

StatReport base_report(const std::string& test, const std::string& obs, double N) {
    StatReport r;
    r.test_name = test;
    r.observable = obs;
    r.parameters["N"] = format_double(N);
    return r;
}

MeasureSpec invariance_measure(const TestPlan& plan, double N, const Grid1D& grid) {
    MeasureSpec spec;
    spec.kind = MeasureSpec::Kind::rho_N;
    spec.cutoff = build_smooth_cutoff(N, plan.cutoff_width, grid);
    spec.quartic_coefficient = plan.invariance_quartic_coefficient;
    return spec;
}

// Bonferroni family of 12 checks between two ensembles at probe points
// {0, N/2, N}: two-sample KS on |u| and Re u (these carry p-values) and
// moment z-tests for r in {2,4} (3-sigma drift rule).
struct FamilyOutcome {
    std::vector<StatReport> reports;
    bool any_rejection = false;
};

FamilyOutcome marginal_family(const std::string& test, const Ensemble& evolved,
                              const Ensemble& reference, double N, double t,
                              double significance) {
    const Grid1D& g = evolved.front().grid;
    const std::vector<double> probes{0.0, N / 2.0, N};
    const int n_ks = static_cast<int>(probes.size()) * 2;
    FamilyOutcome out;
    for (double x0 : probes) {
        const int idx = nearest_index(g, x0);
        for (bool abs_part : {true, false}) {
            auto a = probe_values(evolved, idx, abs_part);
            auto b = probe_values(reference, idx, abs_part);
            const auto ks = ks_two_sample(a, b);
            StatReport r = base_report(test, abs_part ? "ks_abs_u" : "ks_re_u", N);
            r.parameters["t"] = format_double(t);
            r.parameters["x0"] = format_double(x0);
            r.estimate = ks.statistic;
            r.p_value = ks.p_value;
            r.bound_or_target = significance / n_ks;
            r.pass = ks.p_value > significance / n_ks;
            out.any_rejection = out.any_rejection || !r.pass;
            out.reports.push_back(std::move(r));
        }
        for (int mr : {2, 4}) {
            const auto ma = mean_estimate(moment_values(evolved, idx, mr));
            const auto mb = mean_estimate(moment_values(reference, idx, mr));
            const double se = std::hypot(ma.std_error, mb.std_error);
            StatReport r = base_report(test, "moment_drift_r" + std::to_string(mr), N);
            r.parameters["t"] = format_double(t);
            r.parameters["x0"] = format_double(x0);
            r.estimate = std::abs(ma.value - mb.value);
            r.error = se;
            r.bound_or_target = 3.0 * se;
            r.pass = r.estimate < r.bound_or_target;
            out.any_rejection = out.any_rejection || !r.pass;
            out.reports.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace

void TestPlan::validate() const {
    if (N_values.empty()) throw std::invalid_argument("TestPlan: N_values empty");
    if (!(significance > 0.0) || !(significance <= 0.1))
        throw std::invalid_argument("TestPlan: significance must lie in (0, 0.1]");
    if (n_samples < 10) throw std::invalid_argument("TestPlan: n_samples too small");
}

std::vector<StatReport> test_invariance(const TestPlan& plan) {
    plan.validate();
    const Grid1D grid = flow_grid(plan);
    std::vector<StatReport> reports;
    SeedStream base = plan.seed.derive(kSeedInvariance);

    std::uint64_t salt = 0;
    for (double N : plan.N_values) {
        const MeasureSpec spec = invariance_measure(plan, N, grid);
        const Ensemble reference =
            sample_gibbs_rejection(spec, grid, plan.n_samples, base.derive(salt + 1));
        const Ensemble initial =
            sample_gibbs_rejection(spec, grid, plan.n_samples, base.derive(salt + 2));
        salt += 10;

        FlowConfig cfg;
        cfg.dt = plan.dt;
        cfg.dealias_fraction = plan.dealias_fraction;
        cfg.t_final = *std::max_element(plan.times.begin(), plan.times.end());
        cfg.snapshot_times = plan.times;
        cfg.cutoff = spec.cutoff;
        const auto push = pushforward_ensemble(initial, cfg);

        for (std::size_t ti = 0; ti < plan.times.size(); ++ti) {
            Ensemble section;
            section.reserve(push.trajectories.size());
            for (const auto& traj : push.trajectories)
                section.push_back(traj.snapshots[ti].second);
            auto fam = marginal_family("invariance", section, reference, N, plan.times[ti],
                                       plan.significance);
            for (auto& r : fam.reports) reports.push_back(std::move(r));
        }

        // negative control: the reference law scaled by 1.2 must be detected
        {
            Ensemble scaled = reference;
            for (auto& f : scaled)
                for (auto& v : f.values) v *= 1.2;
            const int idx = nearest_index(grid, 0.0);
            const auto ks = ks_two_sample(probe_values(scaled, idx, true),
                                          probe_values(reference, idx, true));
            StatReport r = base_report("invariance_negative_control", "ks_abs_u_scaled_1.2", N);
            r.estimate = ks.statistic;
            r.p_value = ks.p_value;
            r.bound_or_target = plan.significance;
            r.pass = ks.p_value < plan.significance;  // must reject
            reports.push_back(std::move(r));
        }
    }

    // null replications: identical-law families re-seeded; the family-wise
    // false positive count must be consistent with the significance level
    {
        const double N = plan.N_values.front();
        const MeasureSpec spec = invariance_measure(plan, N, grid);
        int rejecting = 0;
        for (int k = 0; k < plan.null_replications; ++k) {
            const Ensemble a = sample_gibbs_rejection(spec, grid, plan.null_samples,
                                                      base.derive(1000 + 2 * k));
            const Ensemble b = sample_gibbs_rejection(spec, grid, plan.null_samples,
                                                      base.derive(1001 + 2 * k));
            if (marginal_family("invariance_null", a, b, N, 0.0, plan.significance)
                    .any_rejection)
                ++rejecting;
        }
        StatReport r = base_report("invariance_null_replications", "familywise_rejections", N);
        r.estimate = rejecting;
        r.bound_or_target = 2.0;  // binomial slack at 20 x (significance per family)
        r.pass = rejecting <= 2;
        reports.push_back(std::move(r));
    }
    return reports;
}

namespace {

// quadrature moments of the squared ground state of the dimension-2 harmonic
// generator, on a refined grid (the oracle right-hand sides)
std::map<int, double> ground_state_moment_bounds() {
    // 64^2 keeps the dense eigensolve tractable; the quadrature moments are
    // second-order accurate in the spacing (~1e-3 here), far inside the
    // 3-sigma slack these bounds are used with
    const TargetGrid tg{6.0, 64, 2};
    const auto op = build_operator_cached(tg, PotentialKind::harmonic, {}, 1);
    const double cell = tg.cell_volume();
    std::map<int, double> bounds{{2, 0.0}, {4, 0.0}, {6, 0.0}};
    for (int s = 0; s < tg.n_states(); ++s) {
        const double w = op.ground_state[s] * op.ground_state[s] * cell;
        const double r2 = tg.radius2(s);
        bounds[2] += w * r2;
        bounds[4] += w * r2 * r2;
        bounds[6] += w * r2 * r2 * r2;
    }
    return bounds;
}

Ensemble mu_ensemble(const TestPlan& plan, double N, const Grid1D& g, SeedStream seed) {
    MeasureSpec spec;
    spec.kind = MeasureSpec::Kind::mu_N;
    spec.cutoff = build_sharp_cutoff(N, g);
    spec.quartic_coefficient = plan.quartic_coefficient;
    return sample_gibbs_rejection(spec, g, plan.n_samples, seed);
}

}  // namespace

MomentBoundsResult test_moment_bounds(const TestPlan& plan) {
    plan.validate();
    MomentBoundsResult out;
    SeedStream base = plan.seed.derive(kSeedMoments);
    const auto bounds = ground_state_moment_bounds();
    const double s_frac = 0.1;

    const double x_top = 20.0;
    std::vector<double> xs;
    for (double x = 0.0; x <= 7.0 + 1e-9; x += plan.line_spacing) xs.push_back(x);

    std::map<double, std::vector<double>> phi2_by_x, phi6_by_x, phi2s_by_x;
    std::map<std::pair<int, int>, std::map<double, double>> increment_stat;  // (r*10, a*100) -> N -> max

    std::uint64_t salt = 0;
    for (double N : plan.N_values) {
        const Grid1D g = line_grid(N + 3.0, plan.line_spacing);
        const Ensemble ens = mu_ensemble(plan, N, g, base.derive(++salt));

        // moment bounds for |x| <= N against the quadrature oracle
        for (int r : {2, 4, 6}) {
            double worst = -1e300;
            double worst_x = 0.0;
            for (int i = 0; i < g.n_points; ++i) {
                if (std::abs(g.point(i)) > N + 1e-9) continue;
                const auto est = mean_estimate(moment_values(ens, i, r));
                const double excess = (est.value - bounds.at(r)) / std::max(est.std_error, 1e-300);
                if (excess > worst) {
                    worst = excess;
                    worst_x = g.point(i);
                }
            }
            StatReport rep = base_report("moment_bounds", "max_excess_sigmas_r" + std::to_string(r), N);
            rep.parameters["x_worst"] = format_double(worst_x);
            rep.estimate = worst;
            rep.bound_or_target = 3.0;
            rep.pass = worst < 3.0;
            out.reports.push_back(std::move(rep));
        }

        // empirical tables (max over N below)
        for (double x : xs) {
            const int i = nearest_index(g, std::min(x, N + 3.0));
            const auto m2 = mean_estimate(moment_values(ens, i, 2));
            const auto m6 = mean_estimate(moment_values(ens, i, 6));
            phi2_by_x[x].push_back(m2.value + 3.0 * m2.std_error);
            phi6_by_x[x].push_back(m6.value + 3.0 * m6.std_error);
            const int j = std::min(i + 1, g.n_points - 1);
            std::vector<double> inc(ens.size());
            const double gap = std::abs(g.point(j) - g.point(i));
            for (std::size_t m = 0; m < ens.size(); ++m)
                inc[m] = std::norm(ens[m].values[i] - ens[m].values[j]) /
                         std::pow(gap, 2.0 * s_frac);
            const auto e = mean_estimate(inc);
            phi2s_by_x[x].push_back(e.value + 3.0 * e.std_error);
        }

        // increment moments for (r, alpha) in {(2,0.2), (4,0.25)}
        for (auto [r, alpha] : std::vector<std::pair<int, double>>{{2, 0.2}, {4, 0.25}}) {
            double stat = 0.0;
            for (double x0 : {0.0, N / 2.0, N}) {
                for (double delta : {plan.line_spacing, 0.5, 1.0}) {
                    const int i = nearest_index(g, x0);
                    const int j = nearest_index(g, x0 + delta);
                    if (i == j) continue;
                    const double gap = std::abs(g.point(j) - g.point(i));
                    std::vector<double> inc(ens.size());
                    for (std::size_t m = 0; m < ens.size(); ++m) {
                        const double d2 = std::norm(ens[m].values[i] - ens[m].values[j]);
                        inc[m] = ((r == 2) ? d2 : d2 * d2) / std::pow(gap, alpha * r);
                    }
                    stat = std::max(stat, mean_estimate(inc).value);
                }
            }
            increment_stat[{r, int(alpha * 100)}][N] = stat;
        }
    }

    // cross-N uniformity of the increment statistics
    for (const auto& [key, by_n] : increment_stat) {
        double lo = 1e300, hi = 0.0;
        for (const auto& [n, v] : by_n) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        StatReport rep;
        rep.test_name = "increment_bounds";
        rep.observable = "uniformity_r" + std::to_string(key.first) + "_alpha0." +
                         std::to_string(key.second);
        rep.estimate = hi / lo;
        rep.bound_or_target = 1.5;
        rep.pass = hi / lo < 1.5;
        out.reports.push_back(std::move(rep));
    }

    // assemble the tables: max over N, evened trivially (x >= 0), made
    // non-decreasing by a running max, constant-extended to the flow box
    MomentTables& t = out.tables;
    t.s = s_frac;
    double r2 = 0.0, r6 = 0.0, r2s = 0.0;
    for (double x : xs) {
        const auto mx = [](const std::vector<double>& v) {
            return *std::max_element(v.begin(), v.end());
        };
        r2 = std::max(r2, mx(phi2_by_x[x]));
        r6 = std::max(r6, mx(phi6_by_x[x]));
        r2s = std::max(r2s, mx(phi2s_by_x[x]));
        t.x.push_back(x);
        t.phi2.push_back(r2);
        t.phi6.push_back(r6);
        t.phi2s.push_back(r2s);
    }
    for (double x = 8.0; x <= x_top + 1e-9; x += 1.0) {
        t.x.push_back(x);
        t.phi2.push_back(r2);
        t.phi6.push_back(r6);
        t.phi2s.push_back(r2s);
    }
    return out;
}

std::vector<StatReport> test_measure_proximity(const TestPlan& plan) {
    plan.validate();
    std::vector<StatReport> reports;
    SeedStream base = plan.seed.derive(kSeedProximity);
    const auto observables = default_observables();
    const long n_prior = std::max<long>(plan.n_samples * 10, 10000);

    std::map<std::string, std::map<double, std::pair<double, double>>> ratio_by_obs;

    std::uint64_t salt = 0;
    for (double N : plan.N_values) {
        const Grid1D g = line_grid(N + 3.0, plan.line_spacing);
        MeasureSpec mu;
        mu.kind = MeasureSpec::Kind::mu_N;
        mu.cutoff = build_sharp_cutoff(N, g);
        mu.quartic_coefficient = plan.quartic_coefficient;
        const auto d = estimate_partition(mu, g, n_prior, base.derive(++salt));
        const bool d_valid = d.value > 2.0 * d.std_error;
        const double width = d.value * d.value * d.value;
        const double scale = d.value / (1.0 - d.value * d.value);

        // common prior ensemble, both log-weights on the same draws: the
        // smooth cutoff adds only the transition-edge quartic mass, which the
        // lattice resolves by interpolation (the bump integrates to width/2)
        Ensemble prior;
        std::vector<double> lw_mu, lw_rho;
        prior.reserve(n_prior);
        const int i_l = nearest_index(g, -N), i_r = nearest_index(g, N);
        for (long m = 0; m < n_prior; ++m) {
            prior.push_back(sample_ou_line(g, base.derive(salt * 1000000 + m)));
            const auto& u = prior.back();
            const double core = quartic_potential(u, *mu.cutoff, plan.quartic_coefficient);
            const double edge =
                std::norm(u.values[i_l]) * std::norm(u.values[i_l]) +
                std::norm(u.values[i_r]) * std::norm(u.values[i_r]);
            lw_mu.push_back(-core);
            lw_rho.push_back(-core - plan.quartic_coefficient * 0.5 * width * edge);
        }

        for (const auto& obs : observables) {
            const auto gap = importance_gap(prior, lw_mu, lw_rho, obs);
            StatReport r = base_report("measure_proximity", obs.name, N);
            r.parameters["D"] = format_double(d.value);
            r.estimate = std::abs(gap.value) / scale;
            r.error = gap.std_error / scale;
            r.inconclusive = !d_valid || std::abs(gap.value) < 2.0 * gap.std_error;
            r.pass = true;  // per-observable verdict is the cross-N uniformity below
            if (!r.inconclusive)
                ratio_by_obs[obs.name][N] = {r.estimate, r.error};
            reports.push_back(std::move(r));
        }
    }

    for (const auto& [name, by_n] : ratio_by_obs) {
        StatReport r;
        r.test_name = "measure_proximity_uniformity";
        r.observable = name;
        if (by_n.size() < 2) {
            r.inconclusive = true;
            r.pass = true;
            r.note = "fewer than two conclusive ratios";
        } else {
            double lo = 1e300, hi = 0.0;
            for (const auto& [n, v] : by_n) {
                lo = std::min(lo, v.first);
                hi = std::max(hi, v.first);
            }
            r.estimate = hi / lo;
            r.bound_or_target = 3.0;
            r.pass = r.estimate < 3.0;
            if (!r.pass)
                r.note =
                    "documented red: the measured gap tracks the cube of the partition "
                    "deficit while the analytic bound is first order in it, so the "
                    "bound-normalized ratio scales like the deficit squared across N; "
                    "cross-N uniformity of this ratio is not attainable (see README)";
        }
        reports.push_back(std::move(r));
    }

    // Feynman-Kac monotone gap against the exact limit sampler
    {
        const TargetGrid tg{5.0, 64, 2};
        const auto op = build_gibbs_operator_cached(tg, plan.quartic_coefficient, 250);
        const Grid1D g = line_grid(6.0, plan.rho_spacing);
        const Ensemble rho =
            sample_rho_exact(op, g, plan.n_samples, base.derive(9000), 250);
        std::map<double, Ensemble> mu_by_n;
        std::uint64_t fk_salt = 9100;
        for (double N : plan.N_values)
            mu_by_n[N] = mu_ensemble(plan, N, g, base.derive(fk_salt++));
        for (auto& r : feynman_kac_gap(mu_by_n, rho, observables)) {
            r.test_name = "feynman_kac_gap";
            reports.push_back(std::move(r));
        }
    }
    return reports;
}

namespace {

std::vector<double> window_masses(const LatticeField& f, int n_windows) {
    std::vector<double> masses(n_windows, 0.0);
    const Grid1D& g = f.grid;
    const double h = g.spacing();
    for (int i = 0; i + 1 < g.n_points; ++i) {
        // trapezoid cell [x_i, x_{i+1}) assigned to the window of its center
        const double center = g.point(i) + 0.5 * h;
        const int w = static_cast<int>(center);
        if (w < 0 || w >= n_windows) continue;
        masses[w] += 0.5 * h * (std::norm(f.values[i]) + std::norm(f.values[i + 1]));
    }
    return masses;
}

struct SlopeCheck {
    double slope = 0.0, se = 0.0, floor = 0.0;
    bool pass = false;
};

// tail-slope of the cumulative window mass: fitted over the outer half of the
// windows, required both statistically positive and above a floor tied to the
// mean window mass so a localized field cannot pass on noise
SlopeCheck cumulative_slope(const std::vector<double>& mean_mass, double mean_se) {
    const int n = static_cast<int>(mean_mass.size());
    std::vector<double> xs, ys;
    double cum = 0.0;
    for (int w = 0; w < n; ++w) {
        cum += mean_mass[w];
        if (w >= n / 2) {
            xs.push_back(w + 1.0);
            ys.push_back(cum);
        }
    }
    const auto fit = fit_line(xs, ys);
    SlopeCheck c;
    c.slope = fit.slope;
    c.se = std::max(fit.slope_std_error, mean_se);
    c.floor = 0.01 * cum / n;
    c.pass = c.slope > 2.33 * c.se && c.slope > c.floor;
    return c;
}

}  // namespace

std::vector<StatReport> test_nonlocalization(const TestPlan& plan) {
    plan.validate();
    std::vector<StatReport> reports;
    SeedStream base = plan.seed.derive(kSeedNonloc);

    const int n_windows = 12;
    const int n_pts = static_cast<int>(std::lround(n_windows / plan.rho_spacing)) + 1;
    const Grid1D g{0.0, double(n_windows), n_pts, false};

    const TargetGrid tg{5.0, 64, 2};
    const auto op = build_gibbs_operator_cached(tg, plan.quartic_coefficient, 250);
    const Ensemble rho = sample_rho_exact(op, g, plan.n_samples, base.derive(1), 250);

    std::vector<std::vector<double>> per_window(n_windows);
    for (const auto& f : rho) {
        const auto m = window_masses(f, n_windows);
        for (int w = 0; w < n_windows; ++w) per_window[w].push_back(m[w]);
    }

    // (a) translation invariance: every window against window 0
    {
        double min_p = 1.0;
        int worst = 0;
        for (int w = 1; w < n_windows; ++w) {
            const auto ks = ks_two_sample(per_window[w], per_window[0]);
            if (ks.p_value < min_p) {
                min_p = ks.p_value;
                worst = w;
            }
        }
        StatReport r;
        r.test_name = "nonlocalization";
        r.observable = "translation_invariance_min_p";
        r.parameters["worst_window"] = std::to_string(worst);
        r.estimate = min_p;
        r.p_value = min_p;
        r.bound_or_target = plan.significance / (n_windows - 1);
        r.pass = min_p > r.bound_or_target;
        reports.push_back(std::move(r));
    }

    // (b) positive lower confidence bound on every window mean
    std::vector<double> mean_mass(n_windows);
    double max_se = 0.0, min_lcb = 1e300;
    for (int w = 0; w < n_windows; ++w) {
        const auto e = mean_estimate(per_window[w]);
        mean_mass[w] = e.value;
        max_se = std::max(max_se, e.std_error);
        min_lcb = std::min(min_lcb, e.value - 2.33 * e.std_error);
    }
    {
        StatReport r;
        r.test_name = "nonlocalization";
        r.observable = "window_mean_lower_cb";
        r.estimate = min_lcb;
        r.bound_or_target = 0.0;
        r.pass = min_lcb > 0.0;
        reports.push_back(std::move(r));
    }

    // (c) linear growth of the cumulative mass
    {
        const auto c = cumulative_slope(mean_mass, max_se);
        StatReport r;
        r.test_name = "nonlocalization";
        r.observable = "cumulative_mass_slope";
        r.estimate = c.slope;
        r.error = c.se;
        r.bound_or_target = std::max(2.33 * c.se, c.floor);
        r.pass = c.pass;
        reports.push_back(std::move(r));
    }

    // deterministic controls: constant field passes the slope test, a
    // Gaussian bump must fail it
    for (bool bump : {false, true}) {
        LatticeField f(g);
        for (int i = 0; i < g.n_points; ++i) {
            const double x = g.point(i);
            f.values[i] = bump ? std::exp(-x * x) : 1.0;
        }
        const auto m = window_masses(f, n_windows);
        const auto c = cumulative_slope(m, 0.0);
        StatReport r;
        r.test_name = "nonlocalization_control";
        r.observable = bump ? "gaussian_bump_slope_rejected" : "constant_field_slope_detected";
        r.estimate = c.slope;
        r.bound_or_target = std::max(2.33 * c.se, c.floor);
        r.pass = bump ? !c.pass : c.pass;
        reports.push_back(std::move(r));
    }
    return reports;
}

std::vector<StatReport> test_tightness_bounds(const TestPlan& plan,
                                              const MomentTables& tables) {
    plan.validate();
    std::vector<StatReport> reports;
    SeedStream base = plan.seed.derive(kSeedTightness);

    const double half = 20.0;
    const Grid1D grid{-half, half, 640, true};
    if (tables.x.empty() || tables.x.back() < half - 1e-9)
        throw std::invalid_argument("test_tightness_bounds: moment tables must cover the box");

    const WeightSpec weight = weight_from_moment_bounds(tables);
    NormParams params;
    params.T = 0.5;
    params.alpha_time = 0.5;

    const long n_members = std::min<long>(plan.n_samples, 300);
    const std::vector<double> snaps{0.0, 0.125, 0.25, 0.375, 0.5};
    const std::vector<double> coarse_times{0.0, 0.25, 0.5};

    std::map<double, std::pair<Estimate, Estimate>> by_n;  // N -> (x2, z2)
    std::uint64_t salt = 0;
    for (double N : plan.N_values) {
        const MeasureSpec spec = invariance_measure(plan, N, grid);
        const Ensemble ens = sample_gibbs_rejection(spec, grid, n_members, base.derive(++salt));

        FlowConfig cfg;
        cfg.dt = plan.dt;
        cfg.dealias_fraction = plan.dealias_fraction;
        cfg.t_final = params.T;
        cfg.snapshot_times = snaps;
        cfg.cutoff = spec.cutoff;
        const auto push = pushforward_ensemble(ens, cfg);

        std::vector<double> x2, x2_coarse, z2;
        for (const auto& traj : push.trajectories) {
            const double nf = norm_time_holder(traj.snapshots, weight, params);
            std::vector<std::pair<double, LatticeField>> sub;
            for (const auto& [t, u] : traj.snapshots)
                for (double tc : coarse_times)
                    if (std::abs(t - tc) < 1e-9) sub.emplace_back(t, u);
            const double nc = norm_time_holder(sub, weight, params);
            x2.push_back(nf * nf);
            x2_coarse.push_back(nc * nc);
            const double z = norm_Z(traj.snapshots.front().second, weight, params);
            z2.push_back(z * z);
        }
        const auto ex = mean_estimate(x2);
        const auto exc = mean_estimate(x2_coarse);
        const auto ez = mean_estimate(z2);
        by_n[N] = {ex, ez};

        StatReport r = base_report("tightness", "holder_snapshot_stability", N);
        r.estimate = std::abs(ex.value - exc.value) / ex.value;
        r.bound_or_target = 0.10;
        r.pass = r.estimate < 0.10;
        reports.push_back(std::move(r));

        StatReport rx = base_report("tightness", "mean_sq_X_T_phi", N);
        rx.estimate = ex.value;
        rx.error = ex.std_error;
        rx.pass = true;
        reports.push_back(std::move(rx));

        StatReport rz = base_report("tightness", "mean_sq_Z_phi", N);
        rz.estimate = ez.value;
        rz.error = ez.std_error;
        rz.pass = true;
        reports.push_back(std::move(rz));
    }

    // (a) uniform boundedness of the X means
    {
        double lo = 1e300, hi = 0.0;
        for (const auto& [n, v] : by_n) {
            lo = std::min(lo, v.first.value);
            hi = std::max(hi, v.first.value);
        }
        StatReport r;
        r.test_name = "tightness";
        r.observable = "X_mean_uniformity";
        r.estimate = hi / lo;
        r.bound_or_target = 2.0;
        r.pass = r.estimate < 2.0;
        reports.push_back(std::move(r));
    }

    // (b) one fitted C(T): through-origin least squares of X on Z, then the
    // inequality must hold for every N within 3 combined relative errors
    {
        double num = 0.0, den = 0.0;
        for (const auto& [n, v] : by_n) {
            num += v.first.value * v.second.value;
            den += v.second.value * v.second.value;
        }
        const double c_fit = num / den;
        bool ok = true;
        double worst = 0.0;
        for (const auto& [n, v] : by_n) {
            const double margin =
                3.0 * (v.first.std_error + c_fit * v.second.std_error);
            const double excess = v.first.value - c_fit * v.second.value;
            worst = std::max(worst, excess - margin);
            ok = ok && excess <= margin;
        }
        StatReport r;
        r.test_name = "tightness";
        r.observable = "fitted_C_of_T";
        r.estimate = c_fit;
        r.bound_or_target = 0.0;
        r.note = "max excess beyond margin " + format_double(worst);
        r.pass = ok;
        reports.push_back(std::move(r));
    }

    // informational weak-form residual along trajectories (no quantitative
    // rate is available to gate against; reported as inconclusive)
    {
        const double N = plan.N_values.size() > 1 ? plan.N_values[1] : plan.N_values[0];
        const MeasureSpec spec = invariance_measure(plan, N, grid);
        const Ensemble ens = sample_gibbs_rejection(spec, grid, 50, base.derive(7777));
        FlowConfig cfg;
        cfg.dt = plan.dt;
        cfg.dealias_fraction = plan.dealias_fraction;
        cfg.t_final = params.T;
        cfg.snapshot_times = snaps;
        cfg.cutoff = spec.cutoff;
        const auto push = pushforward_ensemble(ens, cfg);

        const double T = params.T;
        double resid = 0.0, mag = 0.0;
        for (const auto& traj : push.trajectories) {
            cplx acc = 0.0;
            double acc_mag = 0.0;
            for (std::size_t si = 0; si < traj.snapshots.size(); ++si) {
                const auto& [t, u] = traj.snapshots[si];
                const double wt =
                    (si == 0 || si + 1 == traj.snapshots.size()) ? 0.0625 : 0.125;
                const double st = std::sin(3.14159265358979323846 * t / T);
                const double dtheta_t = 2.0 * st *
                                        std::cos(3.14159265358979323846 * t / T) *
                                        3.14159265358979323846 / T;
                cplx term = 0.0;
                double term_mag = 0.0;
                for (int i = 0; i < grid.n_points; ++i) {
                    const double x = grid.point(i);
                    const double e = std::exp(-x * x);
                    const double theta = e * st * st;
                    const double theta_xx = (4.0 * x * x - 2.0) * e * st * st;
                    const double chi = spec.cutoff->values[i];
                    const cplx a = cplx{0.0, -1.0} * u.values[i] * (e * dtheta_t) +
                                   u.values[i] * theta_xx -
                                   chi * std::norm(u.values[i]) * u.values[i] * theta;
                    term += a * grid.spacing();
                    term_mag += std::abs(a) * grid.spacing();
                }
                acc += wt * term;
                acc_mag += wt * term_mag;
            }
            resid += std::abs(acc);
            mag += acc_mag;
        }
        StatReport r;
        r.test_name = "tightness";
        r.observable = "weak_form_residual_relative";
        r.parameters["N"] = format_double(N);
        r.estimate = resid / std::max(mag, 1e-300);
        r.inconclusive = true;
        r.pass = true;
        r.note = "informational: no quantitative rate available to gate against";
        reports.push_back(std::move(r));
    }
    return reports;
}

std::string summarize_reports(const std::vector<StatReport>& reports) {
    std::ostringstream out;
    for (const auto& r : reports) {
        out << (r.inconclusive ? "[inconclusive] " : (r.pass ? "[pass] " : "[FAIL] "));
        out << r.test_name << " / " << r.observable;
        for (const auto& [k, v] : r.parameters) out << ' ' << k << '=' << v;
        out << " estimate=" << format_double(r.estimate);
        if (r.error > 0.0) out << " err=" << format_double(r.error);
        out << " target=" << format_double(r.bound_or_target);
        if (r.p_value) out << " p=" << format_double(*r.p_value);
        if (!r.note.empty()) out << " (" << r.note << ')';
        out << '\n';
    }
    return out.str();
}

}  // namespace gibbsflow
