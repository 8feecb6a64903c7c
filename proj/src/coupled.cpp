#include "vnfp/coupled.hpp"

#include <cmath>
#include <stdexcept>

namespace vnfp {

namespace {

RadialGrid build_grid(const SimConfig& cfg)
{
    return cfg.grid_growth == 1.0
               ? RadialGrid::uniform(cfg.q_max, cfg.n)
               : RadialGrid::stretched(cfg.q_max, cfg.n, cfg.grid_growth);
}

DiagnosticsRecord make_record(const SimConfig& cfg, const Trajectory& traj,
                              const DensityState& f, const FieldState& s, double source)
{
    DiagnosticsRecord r;
    r.t = s.t;
    const Moments m = moments(f, traj.grid);
    r.mass = m.mass;
    r.l2 = m.l2;
    r.first_abs_moment = m.first_abs_moment;
    r.energy = energy(f, traj.grid, s);
    r.energy_residual = r.energy - traj.energy0 - 3.0 * cfg.sigma * traj.mass0 * s.tau;
    r.nonvanish = nonvanishing_measure(f, cfg.nonvanish_eps, traj.grid);
    r.phi = s.phi;
    r.phidot = s.phidot;
    r.margin_source_nonneg = source;
    r.margin_source_cap = traj.mass0 * std::exp(s.phi) - source;
    r.phiddot_sign_ok = source >= -1e-12 * std::max(1.0, traj.mass0);
    return r;
}

}  // namespace

void SimConfig::validate() const
{
    if (!(t_end > 0))
        throw std::invalid_argument("t_end: must be positive");
    if (!(dt > 0) || dt > t_end)
        throw std::invalid_argument("dt: must lie in (0, t_end]");
    if (!(q_max > 0))
        throw std::invalid_argument("q_max: must be positive");
    if (n < 2)
        throw std::invalid_argument("n: need at least 2 cells");
    if (!(grid_growth > 0))
        throw std::invalid_argument("growth: must be positive");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("theta: must lie in [0, 1]");
    if (!(sigma > 0))
        throw std::invalid_argument("sigma: must be positive");
    if (diagnostics_every < 1)
        throw std::invalid_argument("diagnostics_every: must be >= 1");
    if (snapshot_every < 0)
        throw std::invalid_argument("snapshot_every: must be >= 0");
    if (!(nonvanish_eps > 0))
        throw std::invalid_argument("nonvanish_eps: must be positive");
    if (!f_in.eval)
        throw std::invalid_argument("profile: no initial profile set");
}

Trajectory run_coupled(const SimConfig& cfg)
{
    cfg.validate();
    Trajectory traj;
    traj.grid = build_grid(cfg);
    DensityState f = sample_profile(traj.grid, cfg.f_in.eval);
    FieldState s{0.0, cfg.phi_in, cfg.psi_in, 0.0};
    traj.mass0 = moments(f, traj.grid).mass;
    traj.energy0 = energy(f, traj.grid, s);

    const auto src = [&](double, double ph) {
        return field_source(FieldValue::make(ph), f, traj.grid);
    };

    const int n_steps = int(std::lround(cfg.t_end / cfg.dt));
    traj.field.dt = cfg.dt;
    traj.field.states.reserve(n_steps + 1);
    traj.field.sources.reserve(n_steps + 1);
    traj.field.states.push_back(s);
    traj.field.sources.push_back(src(0.0, s.phi));
    traj.diagnostics.push_back(make_record(cfg, traj, f, s, traj.field.sources.back()));
    traj.density_snapshots.push_back(f);

    for (int k = 0; k < n_steps; ++k) {
        try {
            const FieldState s_half = advance_field(s, src, 0.5 * cfg.dt);
            f = step_theta(f, FieldValue::make(s_half.phi), cfg.sigma * cfg.dt, traj.grid,
                           cfg.theta, cfg.mode);
            f.t = (k + 1) * cfg.dt;  // sigma rescales the operator, not the clock
            s = advance_field(s_half, src, 0.5 * cfg.dt);
        } catch (const std::exception& e) {
            throw std::runtime_error("run_coupled: step " + std::to_string(k) + ": " +
                                     e.what());
        }
        traj.field.states.push_back(s);
        traj.field.sources.push_back(src(s.t, s.phi));
        const bool last = k + 1 == n_steps;
        if ((k + 1) % cfg.diagnostics_every == 0 || last)
            traj.diagnostics.push_back(
                make_record(cfg, traj, f, s, traj.field.sources.back()));
        if ((cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0) || last)
            traj.density_snapshots.push_back(f);
    }
    return traj;
}

FixedPointResult run_fixed_point(const SimConfig& cfg, int n_iter, double T)
{
    cfg.validate();
    if (n_iter < 1)
        throw std::invalid_argument("n_iter: must be >= 1");
    if (!(T > 0) || T < cfg.dt)
        throw std::invalid_argument("T: must be >= dt");
    const int n_steps = int(std::lround(T / cfg.dt));
    if (double(n_steps + 1) * double(cfg.n) > 5e7)
        throw std::invalid_argument("T: density history too large for the iteration mode");

    FixedPointResult out;
    RadialGrid grid = build_grid(cfg);
    const DensityState f0 = sample_profile(grid, cfg.f_in.eval);
    const double mass0 = moments(f0, grid).mass;

    std::vector<double> prev_phi(n_steps + 1, cfg.phi_in);
    std::vector<double> prev_final = f0.values;

    for (int iter = 0; iter < n_iter; ++iter) {
        // Density solve in the frozen previous field.
        std::vector<std::vector<double>> history(n_steps + 1);
        history[0] = f0.values;
        DensityState f = f0;
        for (int k = 0; k < n_steps; ++k) {
            const double phi_mid = 0.5 * (prev_phi[k] + prev_phi[k + 1]);
            f = step_theta(f, FieldValue::make(phi_mid), cfg.sigma * cfg.dt, grid, cfg.theta,
                           cfg.mode);
            f.t = (k + 1) * cfg.dt;
            history[k + 1] = f.values;
        }

        // Field solve driven by the new density, linear in time between nodes.
        DensityState scratch;
        scratch.values.resize(grid.n);
        const auto density_at = [&](double t) -> const DensityState& {
            const double x = std::min(std::max(t / cfg.dt, 0.0), double(n_steps));
            const int k = std::min(int(x), n_steps - 1);
            const double w = x - k;
            for (int j = 0; j < grid.n; ++j)
                scratch.values[j] =
                    (1.0 - w) * history[k][j] + w * history[k + 1][j];
            return scratch;
        };
        FieldTrajectory ft = integrate_field(
            cfg.phi_in, cfg.psi_in,
            [&](double t, double ph) {
                return field_source(FieldValue::make(ph), density_at(t), grid);
            },
            T, cfg.dt);

        double phi_diff = 0;
        for (int k = 0; k <= n_steps; ++k)
            phi_diff = std::max(phi_diff, std::abs(ft.states[k].phi - prev_phi[k]));
        double l2sq = 0;
        for (int j = 0; j < grid.n; ++j) {
            const double d = history[n_steps][j] - prev_final[j];
            l2sq += grid.vol_weights[j] * d * d;
        }
        out.phi_diffs.push_back(phi_diff);
        out.f_diffs.push_back(std::sqrt(l2sq));

        // Assemble the iterate's trajectory with diagnostics at the cadence.
        Trajectory traj;
        traj.grid = grid;
        traj.field = ft;
        traj.mass0 = mass0;
        traj.energy0 = energy(f0, grid, ft.states.front());
        for (int k = 0; k <= n_steps; ++k) {
            prev_phi[k] = ft.states[k].phi;
            if (k % cfg.diagnostics_every == 0 || k == n_steps) {
                DensityState fk;
                fk.values = history[k];
                fk.t = k * cfg.dt;
                traj.diagnostics.push_back(
                    make_record(cfg, traj, fk, ft.states[k], ft.sources[k]));
            }
        }
        DensityState ff;
        ff.values = history[n_steps];
        ff.t = T;
        traj.density_snapshots.push_back(f0);
        traj.density_snapshots.push_back(ff);
        prev_final = history[n_steps];
        out.iterates.push_back(std::move(traj));
    }
    return out;
}

double energy_identity_residual(const Trajectory& traj)
{
    double r = 0;
    for (const auto& d : traj.diagnostics)
        r = std::max(r, std::abs(d.energy_residual));
    return r;
}

}  // namespace vnfp
