#include "vnfp/nordstrom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vnfp {

double FieldTrajectory::phi_at(double t) const
{
    if (states.empty())
        throw std::logic_error("FieldTrajectory: empty");
    if (t <= states.front().t)
        return states.front().phi;
    if (t >= states.back().t)
        return states.back().phi;
    const auto it = std::upper_bound(states.begin(), states.end(), t,
                                     [](double v, const FieldState& s) { return v < s.t; });
    const FieldState& hi = *it;
    const FieldState& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return lo.phi + w * (hi.phi - lo.phi);
}

double field_source(const FieldValue& fv, const DensityState& density, const RadialGrid& grid)
{
    double fmax = 0, fmin = 0;
    for (double v : density.values) {
        fmax = std::max(fmax, v);
        fmin = std::min(fmin, v);
    }
    if (fmin < -1e-12 * fmax)
        throw std::invalid_argument("field_source: density has negative entries");

    double integral = 0;
    for (int j = 0; j < grid.n; ++j)
        integral += density.values[j] * grid.vol_weights[j] /
                    std::sqrt(fv.exp2phi + grid.centers[j] * grid.centers[j]);
    return fv.exp2phi * integral;
}

FieldState advance_field(const FieldState& state,
                         const std::function<double(double, double)>& source, double dt)
{
    if (!(dt > 0))
        throw std::invalid_argument("advance_field: dt must be positive");
    const double t = state.t, phi = state.phi, psi = state.phidot;

    auto accel = [&](double tt, double ph) {
        const double h = source(tt, ph);
        if (!std::isfinite(h))
            throw std::runtime_error("advance_field: non-finite source");
        return -h;
    };

    const double a1 = accel(t, phi);
    const double k1p = psi;
    const double a2 = accel(t + 0.5 * dt, phi + 0.5 * dt * k1p);
    const double k2p = psi + 0.5 * dt * a1;
    const double a3 = accel(t + 0.5 * dt, phi + 0.5 * dt * k2p);
    const double k3p = psi + 0.5 * dt * a2;
    const double a4 = accel(t + dt, phi + dt * k3p);
    const double k4p = psi + dt * a3;

    FieldState out;
    out.t = t + dt;
    out.phi = phi + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    out.phidot = psi + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    out.tau = state.tau + 0.5 * dt * (std::exp(2.0 * phi) + std::exp(2.0 * out.phi));
    return out;
}

double energy(const DensityState& density, const RadialGrid& grid, const FieldState& state)
{
    const double e2 = std::exp(2.0 * state.phi);
    double kinetic = 0;
    for (int j = 0; j < grid.n; ++j)
        kinetic += density.values[j] * grid.vol_weights[j] *
                   std::sqrt(e2 + grid.centers[j] * grid.centers[j]);
    return kinetic + 0.5 * state.phidot * state.phidot;
}

FieldTrajectory integrate_field(double phi_in, double psi_in,
                                const std::function<double(double, double)>& source,
                                double T, double dt)
{
    const int n_steps = int(std::lround(T / dt));
    FieldTrajectory traj;
    traj.dt = dt;
    traj.states.reserve(n_steps + 1);
    traj.sources.reserve(n_steps + 1);
    FieldState s{0.0, phi_in, psi_in, 0.0};
    traj.states.push_back(s);
    traj.sources.push_back(source(0.0, phi_in));
    for (int k = 0; k < n_steps; ++k) {
        s = advance_field(s, source, dt);
        traj.states.push_back(s);
        traj.sources.push_back(source(s.t, s.phi));
    }
    return traj;
}

FieldBoundsReport check_field_bounds(const FieldTrajectory& traj, double mass, double E0)
{
    FieldBoundsReport rep;
    if (traj.states.empty())
        return rep;
    const FieldState& s0 = traj.states.front();
    auto flag = [&](double t, const char* name, double margin) {
        rep.ok = false;
        rep.violations.push_back({t, name, margin});
    };

    int anchor = -1;
    for (size_t i = 0; i < traj.states.size(); ++i) {
        const FieldState& s = traj.states[i];
        const double h = traj.sources[i];

        // -mass e^{phi} <= phiddot <= 0, i.e. 0 <= h <= mass e^{phi}.
        const double hmax = mass * std::exp(s.phi);
        if (h < -1e-12 * std::max(1.0, hmax))
            flag(s.t, "phiddot_nonpositive", -h);
        if (h > hmax * (1.0 + 1e-12))
            flag(s.t, "phiddot_lower", h - hmax);

        // phidot nonincreasing, phi below the free-streaming line.
        if (i > 0 && s.phidot > traj.states[i - 1].phidot + 1e-12)
            flag(s.t, "phidot_monotone", s.phidot - traj.states[i - 1].phidot);
        const double line = s0.phi + s0.phidot * s.t;
        if (s.phi > line + 1e-9 * std::max(1.0, std::abs(line)))
            flag(s.t, "phi_linear_upper", s.phi - line);

        // Logarithmic phidot bound from the energy identity.
        const double logbound =
            s0.phidot - (mass / 3.0) * std::log((E0 + 3.0 * mass * s.tau) / E0);
        if (s.phidot > logbound + 1e-6 * std::max(1.0, std::abs(logbound)))
            flag(s.t, "phidot_log_bound", s.phidot - logbound);

        if (anchor < 0 && s.phidot < 0) {
            anchor = int(i);
            rep.phidot_crossed_zero = true;
            if (i > 0) {
                const FieldState& prev = traj.states[i - 1];
                const double dpsi = prev.phidot - s.phidot;
                rep.t0 = dpsi > 0 ? prev.t + (s.t - prev.t) * prev.phidot / dpsi : s.t;
            }
        }
        // Linear decay envelope anchored at the first negative-phidot sample.
        if (anchor >= 0 && int(i) > anchor) {
            const FieldState& a = traj.states[anchor];
            const double env = a.phi - std::abs(a.phidot) * (s.t - a.t);
            if (s.phi > env + 1e-9 * std::max(1.0, std::abs(env)))
                flag(s.t, "phi_decay_envelope", s.phi - env);
        }
    }
    return rep;
}

}  // namespace vnfp
