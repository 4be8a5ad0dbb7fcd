#include "gibbsflow/presets.hpp"

#include "gibbsflow/field_sampler.hpp"
#include "gibbsflow/gibbs.hpp"
#include "gibbsflow/spaces.hpp"
#include "gibbsflow/spectral.hpp"
#include "gibbsflow/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace gibbsflow {

namespace {

// seed stream sub-ids for preset-owned samplers (disjoint from the suite's)
enum : std::uint64_t {
    kSeedCovariance = 601,
    kSeedMarginal = 701,
    kSeedPlotWindows = 801,
};

// sample-size floors below which a failed statistical verdict is withheld
// (degraded-mode contract: underpowered runs go inconclusive, not red)
constexpr long kSuiteSampleFloor = 400;
constexpr long kCovarianceReplicaFloor = 10000;
constexpr long kPcnSampleFloor = 2000;

std::string format_param(double v) { return format_double(v); }

void demote_underpowered(std::vector<StatReport>& reports, bool underpowered) {
    if (!underpowered) return;
    for (auto& r : reports) {
        if (!r.pass && !r.inconclusive) {
            r.inconclusive = true;
            r.note = r.note.empty() ? "underpowered sample size; verdict withheld"
                                    : "underpowered sample size; verdict withheld; " + r.note;
        }
    }
}

// integrated autocorrelation time by the initial-positive-sequence rule;
// returns the effective sample size of a stationary scalar series
double effective_sample_size(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 10) return static_cast<double>(n);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    c0 /= static_cast<double>(n);
    if (!(c0 > 0.0)) return static_cast<double>(n);
    double tau = 1.0;
    const std::size_t max_lag = std::min<std::size_t>(n / 4, 400);
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - mean) * (x[i + lag] - mean);
        c /= static_cast<double>(n - lag) * c0;
        if (c <= 0.0) break;
        tau += 2.0 * c;
    }
    return static_cast<double>(n) / tau;
}

void write_rows(const std::string& dir, const std::string& file,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
    if (dir.empty()) return;
    fs::create_directories(dir);
    write_csv((fs::path(dir) / file).string(), header, rows);
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "covariance", "spectral",        "gibbs",     "feynman_kac",
        "invariance", "nonlocalization", "tightness", "all"};
    return names;
}

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys{
        "run.n_samples",       "run.null_replications",
        "run.null_samples",    "run.significance",
        "run.times",           "run.N_values",
        "run.covariance_replicas", "run.pcn_samples",
        "run.pcn_burn_in",     "run.pcn_thinning",
        "run.pcn_step",        "run.line_spacing",
        "run.rho_spacing",     "flow.dt",
        "flow.t_final",        "flow.box_size",
        "flow.modes",          "flow.cutoff_N",
        "flow.dealias",        "measure.quartic_coefficient",
        "measure.cutoff_width"};
    return keys;
}

void ExperimentConfig::validate() const {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), preset) == names.end())
        throw std::invalid_argument("unknown preset '" + preset + "'");
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

TestPlan plan_from_config(const Config& cfg, std::uint64_t seed) {
    cfg.require_known_keys(known_config_keys());
    TestPlan plan;
    plan.seed = SeedStream{seed, 0};
    plan.n_samples = cfg.get_long("run.n_samples", plan.n_samples);
    plan.null_replications =
        static_cast<int>(cfg.get_long("run.null_replications", plan.null_replications));
    plan.null_samples = cfg.get_long("run.null_samples", plan.null_samples);
    plan.significance = cfg.get_double("run.significance", plan.significance);
    plan.times = cfg.get_double_list("run.times", plan.times);
    plan.N_values = cfg.get_double_list("run.N_values", plan.N_values);
    plan.pcn_step = cfg.get_double("run.pcn_step", plan.pcn_step);
    plan.pcn_burn_in = cfg.get_long("run.pcn_burn_in", plan.pcn_burn_in);
    plan.pcn_thinning = cfg.get_long("run.pcn_thinning", plan.pcn_thinning);
    plan.line_spacing = cfg.get_double("run.line_spacing", plan.line_spacing);
    plan.rho_spacing = cfg.get_double("run.rho_spacing", plan.rho_spacing);
    plan.dt = cfg.get_double("flow.dt", plan.dt);
    if (cfg.has("flow.t_final")) plan.times = {cfg.get_double("flow.t_final", 0.0)};
    if (cfg.has("flow.box_size"))
        plan.box_half_length = 0.5 * cfg.get_double("flow.box_size", 0.0);
    plan.flow_points = static_cast<int>(cfg.get_long("flow.modes", plan.flow_points));
    if (cfg.has("flow.cutoff_N")) plan.N_values = {cfg.get_double("flow.cutoff_N", 0.0)};
    plan.dealias_fraction = cfg.get_double("flow.dealias", plan.dealias_fraction);
    plan.quartic_coefficient =
        cfg.get_double("measure.quartic_coefficient", plan.quartic_coefficient);
    plan.cutoff_width = cfg.get_double("measure.cutoff_width", plan.cutoff_width);
    plan.validate();
    return plan;
}

PresetScales scales_from_config(const Config& cfg) {
    PresetScales sc;
    sc.covariance_replicas = cfg.get_long("run.covariance_replicas", sc.covariance_replicas);
    sc.pcn_samples = cfg.get_long("run.pcn_samples", sc.pcn_samples);
    if (sc.covariance_replicas < 100 || sc.pcn_samples < 100)
        throw std::invalid_argument("replica counts must be >= 100");
    return sc;
}

// ---------------------------------------------------------------------------
// covariance preset: the prior sampler against its closed-form covariance

std::vector<StatReport> covariance_checks(long n_replicas, SeedStream seed,
                                          const std::string& out_dir) {
    const Grid1D grid{-5.0, 5.0, 101, false};
    Ensemble ens;
    ens.reserve(static_cast<std::size_t>(n_replicas));
    for (long r = 0; r < n_replicas; ++r)
        ens.push_back(sample_ou_line(grid, seed.derive(static_cast<std::uint64_t>(r))));

    std::vector<StatReport> reports;
    std::vector<std::vector<std::string>> plot_rows;
    double max_sigmas = 0.0, worst_lag = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double lag = grid.point(j) - grid.point(0);
        const auto est = empirical_covariance(ens, 0, j);
        const double target = kOuC0 * std::exp(-lag);
        const double sigmas = std::abs(est.value - target) / est.std_error;
        if (sigmas > max_sigmas) {
            max_sigmas = sigmas;
            worst_lag = lag;
        }
        StatReport r;
        r.test_name = "covariance";
        r.observable = "cov_re";
        r.parameters["lag"] = format_param(lag);
        r.estimate = est.value;
        r.error = est.std_error;
        r.bound_or_target = target;
        r.pass = sigmas < 5.0;
        reports.push_back(std::move(r));
        plot_rows.push_back({format_double(lag), format_double(est.value),
                             format_double(est.std_error), format_double(target)});
    }
    {
        StatReport r;
        r.test_name = "covariance";
        r.observable = "max_abs_sigmas";
        r.parameters["worst_lag"] = format_param(worst_lag);
        r.estimate = max_sigmas;
        r.bound_or_target = 5.0;
        r.pass = max_sigmas < 5.0;
        reports.push_back(std::move(r));
    }
    // component independence: Re-Im cross covariance at a few lags
    for (int j : {0, 10, 25, 50}) {
        const auto est = empirical_cross_covariance(ens, 0, j);
        StatReport r;
        r.test_name = "covariance";
        r.observable = "cross_re_im";
        r.parameters["lag"] = format_param(grid.point(j) - grid.point(0));
        r.estimate = est.value;
        r.error = est.std_error;
        r.pass = std::abs(est.value) < 5.0 * est.std_error;
        reports.push_back(std::move(r));
    }
    write_rows(out_dir, "covariance_vs_lag.csv", {"lag", "estimate", "std_error", "target"},
               plot_rows);
    return reports;
}

// ---------------------------------------------------------------------------
// spectral preset: operators, kernels, ground states

namespace {

StatReport value_report(const std::string& test, const std::string& obs, double estimate,
                        double target, bool pass) {
    StatReport r;
    r.test_name = test;
    r.observable = obs;
    r.estimate = estimate;
    r.bound_or_target = target;
    r.pass = pass;
    return r;
}

}  // namespace

std::vector<StatReport> spectral_checks() {
    std::vector<StatReport> reports;

    const TargetGrid g1{8.0, 1599, 1};
    const auto op = build_operator_cached(g1, PotentialKind::harmonic, {}, 100);

    // harmonic ground energy, one Richardson refinement
    {
        const TargetGrid g1f{8.0, 3199, 1};
        const auto fine = build_operator_cached(g1f, PotentialKind::harmonic, {}, 1);
        const double e = richardson(op.ground_energy, fine.ground_energy);
        reports.push_back(value_report("ground_state", "harmonic_energy_refined", std::abs(e),
                                       1e-8, std::abs(e) < 1e-8));
    }
    // harmonic ground state against the Gaussian profile
    {
        double sup = 0.0;
        for (int i = 0; i < g1.n_u; ++i) {
            const double u = g1.point(i);
            const double exact = std::pow(M_PI, -0.25) * std::exp(-0.5 * u * u);
            sup = std::max(sup, std::abs(op.ground_state[i] - exact));
        }
        reports.push_back(
            value_report("ground_state", "harmonic_profile_sup", sup, 1e-5, sup < 1e-5));
    }
    // closed-form kernel vs the assembled semigroup on [-4,4]^2
    std::map<double, KernelTable> tables;
    for (double s : {0.25, 0.5, 1.0}) {
        tables.emplace(s, semigroup_kernel(op, s, 100));
        const KernelTable& K = tables.at(s);
        double sup = 0.0;
        for (int a = 0; a < g1.n_u; ++a) {
            const double ua = g1.point(a);
            if (std::abs(ua) > 4.0) continue;
            for (int b = a; b < g1.n_u; ++b) {
                const double ub = g1.point(b);
                if (std::abs(ub) > 4.0) continue;
                sup = std::max(sup, std::abs(K.at(a, b) - mehler_kernel(s, ua, ub)));
            }
        }
        StatReport r = value_report("mehler", "sup_error", sup, 1e-4, sup < 1e-4);
        r.parameters["s"] = format_param(s);
        reports.push_back(std::move(r));
    }
    // Chapman-Kolmogorov: K_{1/4} * K_{1/4} = K_{1/2}
    {
        const auto comp = compose(tables.at(0.25), tables.at(0.25));
        const KernelTable& K = tables.at(0.5);
        double sup = 0.0;
        for (std::size_t i = 0; i < K.values.size(); ++i)
            sup = std::max(sup, std::abs(comp.values[i] - K.values[i]));
        reports.push_back(
            value_report("mehler", "chapman_kolmogorov", sup, 1e-6, sup < 1e-6));
    }
    // quartic pipeline ground energy E(V): value and refinement stability
    {
        auto energy = [](int n_u) {
            const TargetGrid g{5.0, n_u, 2};
            return ground_energy_only(g, gibbs_potential(g, 0.5), 600);
        };
        const double e64 = energy(64), e129 = energy(129), e259 = energy(259);
        const double r1 = richardson(e64, e129), r2 = richardson(e129, e259);
        reports.push_back(value_report("ground_state", "quartic_energy", r2, 0.0, true));
        reports.back().note = "informational: extrapolated E(V)";
        const double stab = std::abs(r2 - r1);
        reports.push_back(value_report("ground_state", "quartic_energy_stability", stab, 1e-4,
                                       stab < 1e-4));
    }
    // WKB tail of the quartic 1D ground state
    {
        const TargetGrid gq{6.0, 1199, 1};
        const auto opq =
            build_operator_cached(gq, PotentialKind::harmonic_plus_quartic, {}, 4);
        reports.push_back(check_wkb_decay(opq, 2.5, 4.0));
    }
    // kernel envelope estimates over x in [0.01, 10], 1000 off-diagonal points
    {
        std::vector<double> xs;
        for (int i = 0; i < 24; ++i)
            xs.push_back(0.01 * std::pow(1000.0, i / 23.0));
        std::vector<std::pair<double, double>> pts;
        const double phi1 = 0.6180339887498949, phi2 = 0.7548776662466927;
        for (int i = 0; pts.size() < 1000; ++i) {
            const double a = -4.0 + 8.0 * std::fmod(0.5 + (i + 1) * phi1, 1.0);
            const double b = -4.0 + 8.0 * std::fmod(0.25 + (i + 1) * phi2, 1.0);
            if (std::abs(a - b) >= 0.01) pts.push_back({a, b});
        }
        reports.push_back(check_kernel_estimates(xs, pts));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// gibbs preset: pCN marginal at the origin against the squared ground state

namespace {

// Exact radial KS distance between the mu_N marginal at an interior point and
// the squared ground state, from the eigendecomposition: the marginal density
// is proportional to (e^{-N(L_V - E)} Omega_0)^2 with Omega_0 the prior
// (harmonic) ground state, so the distance follows from the mode expansion
// with no Monte Carlo error (quadrature only). This resolves decreases far
// below the sampling resolution of any feasible ensemble.
double exact_marginal_ks(const SpectralOperator& op_v, const SpectralOperator& op_prior,
                         double N) {
    const TargetGrid& g = op_v.grid;
    const int n = g.n_states();
    std::vector<double> h(n, 0.0);
    for (int m = 0; m < op_v.n_modes(); ++m) {
        const double decay = std::exp(-N * (op_v.eigenvalues[m] - op_v.eigenvalues[0]));
        if (decay < 1e-15) break;
        const double* psi = op_v.mode(m);
        double c = 0.0;
        for (int s = 0; s < n; ++s) c += psi[s] * op_prior.ground_state[s];
        c *= g.cell_volume() * decay;
        for (int s = 0; s < n; ++s) h[s] += c * psi[s];
    }
    struct Atom {
        double r, p, q;
    };
    std::vector<Atom> atoms(n);
    double sp = 0.0, sq = 0.0;
    for (int s = 0; s < n; ++s) {
        const double p = h[s] * h[s];
        const double q = op_v.ground_state[s] * op_v.ground_state[s];
        atoms[s] = {std::sqrt(g.radius2(s)), p, q};
        sp += p;
        sq += q;
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.r < b.r; });
    double cp = 0.0, cq = 0.0, d = 0.0;
    for (const auto& a : atoms) {
        cp += a.p / sp;
        cq += a.q / sq;
        d = std::max(d, std::abs(cp - cq));
    }
    return d;
}

}  // namespace

std::vector<StatReport> marginal_checks(const TestPlan& plan, long pcn_samples,
                                        const std::string& out_dir) {
    plan.validate();
    const TargetGrid tg{5.0, 64, 2};
    const auto op = build_gibbs_operator_cached(tg, plan.quartic_coefficient, 250);
    const auto cdf = ground_state_radial_cdf(op);

    std::vector<StatReport> reports;
    std::vector<std::vector<std::string>> plot_rows;
    struct KsPoint {
        double N, d, se, n_eff;
    };
    std::vector<KsPoint> ks_by_n;
    std::vector<double> sorted_n = plan.N_values;
    std::sort(sorted_n.begin(), sorted_n.end());

    SeedStream base = plan.seed.derive(kSeedMarginal);
    std::uint64_t salt = 0;
    for (double N : sorted_n) {
        const double half = N + 6.0;
        const int n_pts = static_cast<int>(std::lround(2.0 * half / plan.line_spacing)) + 1;
        const Grid1D grid{-half, half, n_pts, false};
        MeasureSpec spec;
        spec.kind = MeasureSpec::Kind::mu_N;
        spec.cutoff = build_sharp_cutoff(N, grid);
        spec.quartic_coefficient = plan.quartic_coefficient;
        const auto res = sample_gibbs_pcn(spec, grid, pcn_samples, plan.pcn_step,
                                          plan.pcn_burn_in, plan.pcn_thinning,
                                          base.derive(++salt));
        const int i0 = static_cast<int>(std::lround((0.0 - grid.x_min) / grid.spacing()));
        std::vector<double> r_series(res.samples.size());
        for (std::size_t m = 0; m < res.samples.size(); ++m)
            r_series[m] = std::sqrt(std::norm(res.samples[m].values[i0]));

        const double n_eff = effective_sample_size(r_series);
        const auto ks = ks_test(r_series, cdf);
        // conservative sampling error of the KS statistic: the empirical CDF
        // ordinate has binomial error at most 0.5/sqrt(n_eff)
        const double se = 0.5 / std::sqrt(n_eff);

        StatReport r;
        r.test_name = "marginal_ks";
        r.observable = "abs_u_at_0";
        r.parameters["N"] = format_param(N);
        r.estimate = ks.statistic;
        r.error = se;
        r.bound_or_target = 0.05;
        if (N == sorted_n.back()) {
            r.pass = ks.statistic < 0.05;
        } else {
            r.pass = true;
            r.note = "informational: the distance gate applies at the largest N";
        }
        if (!res.warning.empty()) r.note += (r.note.empty() ? "" : "; ") + res.warning;
        reports.push_back(std::move(r));

        StatReport e;
        e.test_name = "marginal_ks";
        e.observable = "effective_samples";
        e.parameters["N"] = format_param(N);
        e.estimate = n_eff;
        e.bound_or_target = 10000.0;
        e.pass = n_eff >= 10000.0;
        reports.push_back(std::move(e));

        ks_by_n.push_back({N, ks.statistic, se, n_eff});

        // marginal histogram on [0,4] against the squared-ground-state density
        const int n_bins = 40;
        const double bw = 4.0 / n_bins;
        std::vector<long> counts(n_bins, 0);
        for (double v : r_series) {
            const int b = static_cast<int>(v / bw);
            if (b >= 0 && b < n_bins) ++counts[b];
        }
        for (int b = 0; b < n_bins; ++b) {
            const double center = (b + 0.5) * bw;
            const double dens =
                static_cast<double>(counts[b]) / (static_cast<double>(r_series.size()) * bw);
            const double omega = (cdf(center + 0.5 * bw) - cdf(center - 0.5 * bw)) / bw;
            plot_rows.push_back({format_double(N), format_double(center),
                                 format_double(dens), format_double(omega)});
        }
    }
    for (std::size_t i = 0; i + 1 < ks_by_n.size(); ++i) {
        const KsPoint& lo = ks_by_n[i];
        const KsPoint& hi = ks_by_n[i + 1];
        StatReport r;
        r.test_name = "marginal_ks_decrease";
        r.observable = "abs_u_at_0";
        r.parameters["N"] = format_param(hi.N);
        r.parameters["N_prev"] = format_param(lo.N);
        r.estimate = lo.d - hi.d;
        r.error = std::hypot(lo.se, hi.se);
        // sampling resolution of a one-sample KS distance: the statistic
        // concentrates near 0.87/sqrt(n) under the null, so distances below
        // this floor are indistinguishable from zero and the decrease cannot
        // be resolved by the ensemble; the exact spectral rows below decide it
        const double floor_lo = 1.5 / std::sqrt(lo.n_eff);
        const double floor_hi = 1.5 / std::sqrt(hi.n_eff);
        if (lo.d < floor_lo && hi.d < floor_hi) {
            r.inconclusive = true;
            r.pass = true;
            r.note = "both distances below the sampling resolution floor; "
                     "the exact marginal_ks_exact rows decide the decrease";
        } else {
            r.pass = r.estimate > r.error;
        }
        reports.push_back(std::move(r));
    }
    // exact (Monte-Carlo-free) distances from the transfer-operator spectrum
    {
        const auto op_prior = build_operator_cached(tg, PotentialKind::harmonic, {}, 10);
        double prev = -1.0;
        for (std::size_t i = 0; i < sorted_n.size(); ++i) {
            const double N = sorted_n[i];
            const double d = exact_marginal_ks(op, op_prior, N);
            StatReport r;
            r.test_name = "marginal_ks_exact";
            r.observable = "abs_u_at_0";
            r.parameters["N"] = format_param(N);
            r.estimate = d;
            r.bound_or_target = i ? prev : 0.0;
            r.pass = i == 0 ? true : d < prev;
            if (i == 0) r.note = "informational: decrease gates start at the second N";
            reports.push_back(std::move(r));
            prev = d;
        }
    }
    write_rows(out_dir, "marginal_vs_omega.csv", {"N", "r", "density", "omega_sq_density"},
               plot_rows);
    return reports;
}

// ---------------------------------------------------------------------------
// suite-backed presets

std::vector<StatReport> feynman_kac_checks(const TestPlan& plan, const std::string& out_dir) {
    auto reports = test_measure_proximity(plan);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        if (r.test_name != "feynman_kac_gap") continue;
        const auto it = r.parameters.find("N");
        rows.push_back({r.observable, it == r.parameters.end() ? "" : it->second,
                        format_double(r.estimate), format_double(r.error),
                        format_double(r.bound_or_target)});
    }
    write_rows(out_dir, "gap_vs_N.csv", {"observable", "N", "gap", "std_error", "bound"},
               rows);
    return reports;
}

std::vector<StatReport> nonlocalization_checks(const TestPlan& plan,
                                               const std::string& out_dir) {
    auto reports = test_nonlocalization(plan);
    if (!out_dir.empty()) {
        // window-mass profile of the limit process for plotting
        const TargetGrid tg{5.0, 64, 2};
        const auto op = build_gibbs_operator_cached(tg, plan.quartic_coefficient, 250);
        const int n_windows = 12;
        const int n_pts =
            static_cast<int>(std::lround(n_windows / plan.rho_spacing)) + 1;
        const Grid1D grid{0.0, static_cast<double>(n_windows), n_pts, false};
        const Ensemble ens = sample_rho_exact(op, grid, plan.n_samples,
                                              plan.seed.derive(kSeedPlotWindows), 250);
        const double h = grid.spacing();
        std::vector<std::vector<double>> window(n_windows), cumulative(n_windows);
        for (const auto& f : ens) {
            std::vector<double> w(n_windows, 0.0);
            for (int i = 0; i + 1 < grid.n_points; ++i) {
                const int k = static_cast<int>(grid.point(i) + 0.5 * h);
                if (k < 0 || k >= n_windows) continue;
                w[k] += 0.5 * h * (std::norm(f.values[i]) + std::norm(f.values[i + 1]));
            }
            double run = 0.0;
            for (int k = 0; k < n_windows; ++k) {
                window[k].push_back(w[k]);
                run += w[k];
                cumulative[k].push_back(run);
            }
        }
        std::vector<std::vector<std::string>> rows;
        for (int k = 0; k < n_windows; ++k) {
            const auto wm = mean_estimate(window[k]);
            const auto cm = mean_estimate(cumulative[k]);
            rows.push_back({format_double(k + 1.0), format_double(wm.value),
                            format_double(wm.std_error), format_double(cm.value),
                            format_double(cm.std_error)});
        }
        write_rows(out_dir, "window_mass_vs_R.csv",
                   {"R", "window_mean", "window_se", "cumulative_mean", "cumulative_se"},
                   rows);
    }
    return reports;
}

std::vector<StatReport> tightness_checks(const TestPlan& plan, const std::string& out_dir) {
    auto mb = test_moment_bounds(plan);
    auto reports = mb.reports;
    auto tight = test_tightness_bounds(plan, mb.tables);
    reports.insert(reports.end(), tight.begin(), tight.end());
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const WeightSpec weight = weight_from_moment_bounds(mb.tables);
        write_weight_csv((fs::path(out_dir) / "weight.csv").string(), weight, 20.0, 401);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < mb.tables.x.size(); ++i)
            rows.push_back({format_double(mb.tables.x[i]), format_double(mb.tables.phi2[i]),
                            format_double(mb.tables.phi6[i]),
                            format_double(mb.tables.phi2s[i])});
        write_rows(out_dir, "moment_tables.csv", {"x", "phi2", "phi6", "phi2s"}, rows);
    }
    return reports;
}

// ---------------------------------------------------------------------------
// orchestration

namespace {

std::string resolve_output_dir(const std::string& base) {
    if (!fs::exists(base)) {
        fs::create_directories(base);
        return base;
    }
    for (int i = 1;; ++i) {
        const std::string candidate = base + "-run" + std::to_string(i);
        if (!fs::exists(candidate)) {
            fs::create_directories(candidate);
            return candidate;
        }
    }
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<StatReport> run_one(const std::string& name, const TestPlan& plan,
                                const PresetScales& scales, const std::string& dir) {
    std::vector<StatReport> reports;
    if (name == "covariance") {
        reports = covariance_checks(scales.covariance_replicas,
                                    plan.seed.derive(kSeedCovariance), dir);
        demote_underpowered(reports, scales.covariance_replicas < kCovarianceReplicaFloor);
    } else if (name == "spectral") {
        reports = spectral_checks();
    } else if (name == "gibbs") {
        reports = marginal_checks(plan, scales.pcn_samples, dir);
        demote_underpowered(reports, scales.pcn_samples < kPcnSampleFloor);
    } else if (name == "feynman_kac") {
        reports = feynman_kac_checks(plan, dir);
        demote_underpowered(reports, plan.n_samples < kSuiteSampleFloor);
    } else if (name == "invariance") {
        reports = test_invariance(plan);
        demote_underpowered(reports, plan.n_samples < kSuiteSampleFloor);
    } else if (name == "nonlocalization") {
        reports = nonlocalization_checks(plan, dir);
        demote_underpowered(reports, plan.n_samples < kSuiteSampleFloor);
    } else if (name == "tightness") {
        reports = tightness_checks(plan, dir);
        demote_underpowered(reports, plan.n_samples < kSuiteSampleFloor);
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return reports;
}

void write_report_files(const std::string& dir, const std::vector<StatReport>& reports) {
    write_stat_reports_csv((fs::path(dir) / "reports.csv").string(), reports);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        auto get = [&](const char* k) {
            const auto it = r.parameters.find(k);
            return it == r.parameters.end() ? std::string() : it->second;
        };
        rows.push_back({r.test_name, r.observable, get("N"), format_double(r.estimate),
                        format_double(r.error), format_double(r.bound_or_target),
                        r.inconclusive ? "inconclusive" : (r.pass ? "pass" : "fail"),
                        get("seed"), get("config_hash"), r.note});
    }
    write_csv((fs::path(dir) / "reports_full.csv").string(),
              {"test", "observable", "N", "estimate", "error", "bound", "verdict", "seed",
               "config_hash", "note"},
              rows);
    std::ofstream summary(fs::path(dir) / "summary.txt");
    summary << summarize_reports(reports);
    int n_fail = 0, n_inconclusive = 0;
    for (const auto& r : reports) {
        if (r.inconclusive)
            ++n_inconclusive;
        else if (!r.pass)
            ++n_fail;
    }
    summary << "\nVERDICT: " << (n_fail ? "FAIL" : "PASS") << " (" << n_fail
            << " failures, " << n_inconclusive << " inconclusive, " << reports.size()
            << " checks)\n";
    if (!n_fail && n_inconclusive)
        summary << "warning: some checks were inconclusive; see the rows above\n";
}

}  // namespace

PresetRun run_preset(const ExperimentConfig& config) {
    config.validate();
    const TestPlan plan = plan_from_config(config.overrides, config.seed);
    const PresetScales scales = scales_from_config(config.overrides);

    PresetRun run;
    run.directory = resolve_output_dir(config.output_dir);

    const std::vector<std::string> sequence =
        config.preset == "all"
            ? std::vector<std::string>{"covariance", "spectral",        "gibbs",
                                       "feynman_kac", "invariance",     "nonlocalization",
                                       "tightness"}
            : std::vector<std::string>{config.preset};

    const std::string config_hash = hash_hex(content_hash(config.overrides.canonical_text()));
    for (const auto& name : sequence) {
        const std::string dir =
            config.preset == "all" ? (fs::path(run.directory) / name).string()
                                   : run.directory;
        fs::create_directories(dir);
        auto reports = run_one(name, plan, scales, dir);
        for (auto& r : reports) {
            r.parameters["seed"] = std::to_string(config.seed);
            r.parameters["config_hash"] = config_hash;
        }
        write_report_files(dir, reports);
        run.reports.insert(run.reports.end(), reports.begin(), reports.end());
    }
    if (config.preset == "all") write_report_files(run.directory, run.reports);

    std::map<std::string, std::string> meta{
        {"preset", config.preset},
        {"seed", std::to_string(config.seed)},
        {"config_hash", config_hash},
        {"config", config.overrides.canonical_text()},
        {"jobs", std::to_string(config.jobs)},
        {"timestamp_utc", iso_timestamp()},
        {"library", "gibbsflow"},
    };
    write_metadata((fs::path(run.directory) / "metadata.json").string(), meta);

    try {
        emit_plot_data(run.directory);
    } catch (const std::runtime_error&) {
        // presets without plot-ready outputs (spectral, invariance) are fine
    }
    run.exit_code = any_failure(run.reports) ? 1 : 0;
    return run;
}

void emit_plot_data(const std::string& report_dir) {
    static const std::vector<std::string> expected{
        "covariance_vs_lag.csv", "marginal_vs_omega.csv", "gap_vs_N.csv",
        "window_mass_vs_R.csv",  "weight.csv",            "moment_tables.csv"};
    if (!fs::exists(report_dir))
        throw std::runtime_error("emit_plot_data: no such directory " + report_dir);
    const fs::path plots = fs::path(report_dir) / "plots";
    std::vector<std::pair<fs::path, std::string>> found;
    for (const auto& entry : fs::recursive_directory_iterator(report_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (entry.path().parent_path() == plots) continue;
        if (std::find(expected.begin(), expected.end(), name) != expected.end()) {
            const auto parent = entry.path().parent_path().filename().string();
            const bool nested = entry.path().parent_path() != fs::path(report_dir);
            found.push_back({entry.path(), nested ? parent + "_" + name : name});
        }
    }
    if (found.empty()) {
        std::string msg = "emit_plot_data: no plot-ready CSVs under " + report_dir +
                          "; expected one of:";
        for (const auto& e : expected) msg += " " + e;
        throw std::runtime_error(msg);
    }
    fs::create_directories(plots);
    for (const auto& [src, name] : found)
        fs::copy_file(src, plots / name, fs::copy_options::overwrite_existing);
}

}  // namespace gibbsflow
