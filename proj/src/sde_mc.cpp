#include "vnfp/sde_mc.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace vnfp {

namespace {

// Pairwise (cascade) sum over [lo, hi); fixed association independent of the
// thread count, so parallel and serial estimates agree bitwise.
double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi)
{
    const std::size_t n = hi - lo;
    if (n <= 8) {
        double s = 0;
        for (std::size_t i = lo; i < hi; ++i)
            s += v[i];
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

McEstimate reduce(std::vector<double>& vals)
{
    McEstimate e;
    e.n_effective = std::int64_t(vals.size());
    e.mean = pairwise_sum(vals, 0, vals.size()) / double(vals.size());
    if (vals.size() > 1) {
        for (double& v : vals)
            v = (v - e.mean) * (v - e.mean);
        const double var = pairwise_sum(vals, 0, vals.size()) / double(vals.size() - 1);
        e.std_error = std::sqrt(var / double(vals.size()));
    }
    return e;
}

void check_cfg(const PathConfig& cfg)
{
    if (cfg.n_paths < 1 || !(cfg.dt > 0))
        throw std::invalid_argument("PathConfig: need n_paths >= 1 and dt > 0");
    if (cfg.antithetic && cfg.n_paths % 2 != 0)
        throw std::invalid_argument("PathConfig: antithetic pairing needs even n_paths");
}

// One path value including the time grid setup shared by both front ends.
double path_value(const std::function<double(double)>& f_in, const Vec3& p, double t,
                  const FieldTrajectory& traj, const PathConfig& cfg, RadialMode mode,
                  std::int64_t path_index)
{
    const std::uint64_t stream = cfg.antithetic ? std::uint64_t(path_index / 2)
                                                : std::uint64_t(path_index);
    const double sign = (cfg.antithetic && path_index % 2 == 1) ? -1.0 : 1.0;
    const Vec3 q = simulate_path(p, t, traj, cfg, RandomStream(cfg.seed, stream), mode, sign);
    return f_in(q.norm());
}

}  // namespace

Vec3 simulate_path(const Vec3& p0, double t, const FieldTrajectory& phi_traj,
                   const PathConfig& cfg, const RandomStream& rng, RadialMode mode,
                   double noise_sign)
{
    if (!(t >= 0))
        throw std::invalid_argument("simulate_path: t must be nonnegative");
    if (t == 0)
        return p0;
    const int n_steps = int(std::ceil(t / cfg.dt - 1e-12));
    const double h = t / n_steps;
    const double sqrt_h = std::sqrt(h);

    Vec3 q = p0;
    for (int k = 0; k < n_steps; ++k) {
        const double s = k * h;
        const FieldValue fv = FieldValue::make(phi_traj.phi_at(t - s));
        double z0, z1, z2, z3;
        rng.normal_pair(2 * std::uint64_t(k), z0, z1);
        rng.normal_pair(2 * std::uint64_t(k) + 1, z2, z3);
        const Vec3 xi{noise_sign * z0, noise_sign * z1, noise_sign * z2};

        if (mode == RadialMode::ultra) {
            const double qn = q.norm();
            if (qn > 0) {
                const Vec3 dir = q * (1.0 / qn);
                const double radial = 3.0 * fv.exp2phi * h +
                                      std::sqrt(2.0 * fv.exp2phi * qn) * sqrt_h * dir.dot(xi);
                const double qn_new = qn + radial;
                // The origin absorbs: an overshooting increment parks the path at 0.
                q = qn_new > 0 ? dir * qn_new : Vec3{0, 0, 0};
            }
        } else {
            const MomentumPoint mp = MomentumPoint::make(q);
            Vec3 drift;
            Mat3 noise;
            sde_coefficients(fv, mp, drift, noise);
            q += drift * h + (noise * xi) * sqrt_h;
        }
        if (!std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z))
            throw std::runtime_error("simulate_path: non-finite state, reduce dt");
    }
    return q;
}

McEstimate feynman_kac_estimate(const std::function<double(double)>& f_in, const Vec3& p,
                                double t, const FieldTrajectory& phi_traj,
                                const PathConfig& cfg, RadialMode mode)
{
    check_cfg(cfg);
    const std::int64_t n = cfg.n_paths;
    std::vector<double> vals(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i)
        vals[std::size_t(i)] = path_value(f_in, p, t, phi_traj, cfg, mode, i);

    if (cfg.antithetic) {
        std::vector<double> pairs(std::size_t(n / 2));
        for (std::int64_t k = 0; k < n / 2; ++k)
            pairs[std::size_t(k)] =
                0.5 * (vals[std::size_t(2 * k)] + vals[std::size_t(2 * k + 1)]);
        return reduce(pairs);
    }
    return reduce(vals);
}

McEstimate feynman_kac_estimate_serial(const std::function<double(double)>& f_in,
                                       const Vec3& p, double t,
                                       const FieldTrajectory& phi_traj, const PathConfig& cfg,
                                       RadialMode mode)
{
    check_cfg(cfg);
    const std::int64_t n = cfg.n_paths;
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        vals[std::size_t(i)] = path_value(f_in, p, t, phi_traj, cfg, mode, i);

    if (cfg.antithetic) {
        std::vector<double> pairs(std::size_t(n / 2));
        for (std::int64_t k = 0; k < n / 2; ++k)
            pairs[std::size_t(k)] =
                0.5 * (vals[std::size_t(2 * k)] + vals[std::size_t(2 * k + 1)]);
        return reduce(pairs);
    }
    return reduce(vals);
}

}  // namespace vnfp
