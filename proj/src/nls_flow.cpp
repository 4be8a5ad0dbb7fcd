#include "gibbsflow/nls_flow.hpp"

#include "gibbsflow/fft.hpp"
#include "gibbsflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gibbsflow {

namespace {

double max_retained_wavenumber(const Grid1D& grid, double dealias_fraction) {
    const int n = grid.n_points;
    const double keep = dealias_fraction * (n / 2);
    double kmax = 0.0;
    for (int m = 0; m < n; ++m) {
        const int signed_bin = (m <= n / 2) ? m : m - n;
        if (std::abs(signed_bin) <= keep)
            kmax = std::max(kmax, std::abs(Fft1D::wavenumber(m, n, grid.length())));
    }
    return kmax;
}

}  // namespace

void FlowConfig::validate(const Grid1D& grid) const {
    grid.validate();
    if (!grid.periodic) throw std::invalid_argument("FlowConfig: periodic grid required");
    if (!(dt > 0.0)) throw std::invalid_argument("FlowConfig: dt must be positive");
    if (!(t_final >= 0.0)) throw std::invalid_argument("FlowConfig: t_final must be >= 0");
    if (!(dealias_fraction > 0.0) || !(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
        throw std::invalid_argument("FlowConfig: dealias_fraction must lie in (0, 1]");
    if (cutoff && !(cutoff->grid == grid))
        throw std::invalid_argument("FlowConfig: cutoff grid does not match the field grid");
    const double kmax = max_retained_wavenumber(grid, dealias_fraction);
    if (dt * kmax * kmax > 3.14159265358979323846 + 1e-12)
        throw std::invalid_argument(
            "FlowConfig: dt does not resolve the highest retained frequency "
            "(dt * k_max^2 must be <= pi)");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        if (std::abs(snapshot_times[i]) > t_final + 1e-12)
            throw std::invalid_argument("FlowConfig: snapshot time outside [-t_final, t_final]");
        if (i && !(snapshot_times[i] > snapshot_times[i - 1]))
            throw std::invalid_argument("FlowConfig: snapshot times must be increasing");
        const double steps = std::abs(snapshot_times[i]) / dt;
        if (std::abs(steps - std::round(steps)) > 1e-6)
            throw std::invalid_argument(
                "FlowConfig: snapshot times must be integer multiples of dt");
    }
}

double field_mass(const LatticeField& u) {
    return u.grid.spacing() *
           kernels().sum_abs2(u.values.data(), u.values.size());
}

double hamiltonian(const LatticeField& u, const CutoffProfile* cutoff) {
    u.grid.validate();
    if (!u.grid.periodic) throw std::invalid_argument("hamiltonian: periodic grid required");
    const int n = u.grid.n_points;
    const double box = u.grid.length();
    std::vector<cplx> hat(u.values);
    fft_plan(n).forward(hat.data());
    double kinetic = 0.0;
    for (int m = 0; m < n; ++m) {
        const double k = Fft1D::wavenumber(m, n, box);
        kinetic += k * k * std::norm(hat[m]);
    }
    kinetic *= box / (static_cast<double>(n) * n);

    const double h = u.grid.spacing();
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.5 * h * (cutoff ? cutoff->values[i] : 1.0);
    return kinetic + kernels().sum_abs4_weighted(u.values.data(), w.data(), w.size());
}

namespace {

// One Strang step with signed time step: exact nonlinear phase rotation for
// dt/2, linear multiplier e^{-i k^2 dt} (+ dealias mask), rotation for dt/2.
struct Stepper {
    const Grid1D& grid;
    const std::vector<double>* chi;  // nullptr = constant 1; all-zero = linear
    bool nonlinear = true;
    std::vector<double> k2;       // wavenumber squared per bin
    std::vector<bool> keep_mode;  // dealias mask

    Stepper(const Grid1D& g, const FlowConfig& cfg)
        : grid(g), chi(cfg.cutoff ? &cfg.cutoff->values : nullptr) {
        const int n = g.n_points;
        k2.resize(n);
        keep_mode.resize(n);
        const double keep = cfg.dealias_fraction * (n / 2);
        for (int m = 0; m < n; ++m) {
            const double k = Fft1D::wavenumber(m, n, g.length());
            k2[m] = k * k;
            const int signed_bin = (m <= n / 2) ? m : m - n;
            keep_mode[m] = std::abs(signed_bin) <= keep;
        }
        if (chi) {
            nonlinear = false;
            for (double c : *chi)
                if (c != 0.0) nonlinear = true;
        }
    }

    void rotate(LatticeField& u, double half_dt) const {
        if (!nonlinear) return;
        for (int i = 0; i < grid.n_points; ++i) {
            const double c = chi ? (*chi)[i] : 1.0;
            if (c == 0.0) continue;
            const double phase = -half_dt * c * std::norm(u.values[i]);
            u.values[i] *= cplx{std::cos(phase), std::sin(phase)};
        }
    }

    void project(LatticeField& u) const {
        const int n = grid.n_points;
        std::vector<cplx> hat(u.values);
        const Fft1D& plan = fft_plan(n);
        plan.forward(hat.data());
        for (int m = 0; m < n; ++m) hat[m] = keep_mode[m] ? hat[m] / double(n) : cplx{0.0, 0.0};
        plan.backward(hat.data());
        u.values = std::move(hat);
    }

    void step(LatticeField& u, double dt) const {
        rotate(u, 0.5 * dt);
        const int n = grid.n_points;
        std::vector<cplx> hat(u.values);
        const Fft1D& plan = fft_plan(n);
        plan.forward(hat.data());
        for (int m = 0; m < n; ++m) {
            if (!keep_mode[m]) {
                hat[m] = cplx{0.0, 0.0};
                continue;
            }
            const double phase = -dt * k2[m];
            hat[m] *= cplx{std::cos(phase), std::sin(phase)} / double(n);
        }
        plan.backward(hat.data());
        u.values = std::move(hat);
        rotate(u, 0.5 * dt);
    }
};

}  // namespace

Trajectory evolve(const LatticeField& u0, const FlowConfig& config) {
    config.validate(u0.grid);
    if (!u0.finite()) throw std::invalid_argument("evolve: non-finite initial data");

    Stepper stepper(u0.grid, config);
    Trajectory traj;

    auto record = [&](double t, const LatticeField& u) {
        traj.snapshots.emplace_back(t, u);
        traj.mass.push_back(field_mass(u));
        traj.hamiltonian.push_back(hamiltonian(u, config.cutoff ? &*config.cutoff : nullptr));
    };

    LatticeField start(u0);
    if (config.dealias_fraction < 1.0) stepper.project(start);  // initial projection
    const double mass0 = field_mass(start);

    // run each sign branch outward from t = 0
    std::vector<double> times = config.snapshot_times;
    if (times.empty()) times = {config.t_final};
    std::vector<std::pair<double, LatticeField>> collected;

    for (int sign : {-1, +1}) {
        std::vector<double> targets;
        for (double t : times)
            if ((sign < 0 && t < 0.0) || (sign > 0 && t >= 0.0)) targets.push_back(t);
        if (sign < 0) std::reverse(targets.begin(), targets.end());
        if (targets.empty()) continue;

        LatticeField u(start);
        double t = 0.0;
        for (double target : targets) {
            const long n_steps = std::lround(std::abs(target - t) / config.dt);
            for (long s = 0; s < n_steps; ++s) stepper.step(u, sign * config.dt);
            t = target;
            if (!u.finite()) {
                traj.aborted = true;
                break;
            }
            const double drift = std::abs(field_mass(u) - mass0) / std::max(mass0, 1e-300);
            if (drift > config.mass_tolerance)
                throw std::runtime_error("evolve: relative mass drift " + format_double(drift) +
                                         " exceeds the configured tolerance");
            collected.emplace_back(t, u);
        }
        if (traj.aborted) break;
    }

    std::sort(collected.begin(), collected.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [t, u] : collected) record(t, u);
    return traj;
}

PushforwardResult pushforward_ensemble(const Ensemble& initial, const FlowConfig& config) {
    if (initial.empty()) throw std::invalid_argument("pushforward_ensemble: empty ensemble");
    PushforwardResult out;
    long aborted = 0;
    for (const auto& u0 : initial) {
        Trajectory t = evolve(u0, config);
        if (t.aborted)
            ++aborted;
        else
            out.trajectories.push_back(std::move(t));
    }
    out.abort_fraction = static_cast<double>(aborted) / initial.size();
    if (out.abort_fraction > 0.01)
        throw std::runtime_error("pushforward_ensemble: abort fraction " +
                                 format_double(out.abort_fraction) + " exceeds 1%");
    return out;
}

}  // namespace gibbsflow
