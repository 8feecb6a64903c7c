#pragma once
#include <cstdint>
#include <functional>

#include "vnfp/fp_radial.hpp"
#include "vnfp/nordstrom.hpp"
#include "vnfp/rng.hpp"

namespace vnfp {

struct PathConfig {
    std::int64_t n_paths = 1;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    bool antithetic = false;
};

struct McEstimate {
    double mean = 0;
    double std_error = 0;
    std::int64_t n_effective = 0;
};

/// Euler-Maruyama integration of one path of
///   dQ_s = d(phi(t-s), Q) ds + G(phi(t-s), Q) dW,   Q_0 = p0,
/// to s = t; the field is read backward along the stored trajectory. In ultra
/// mode the coefficients degenerate to the radial ray through p0 (rank-one
/// noise) and the origin is absorbing. noise_sign = -1 drives the antithetic
/// partner. Throws std::runtime_error on non-finite state (dt too large).
Vec3 simulate_path(const Vec3& p0, double t, const FieldTrajectory& phi_traj,
                   const PathConfig& cfg, const RandomStream& rng_stream, RadialMode mode,
                   double noise_sign = 1.0);

/// Sample mean of f_in(|endpoint|) over cfg.n_paths paths: the probabilistic
/// solution value at (t, p). Paths run on all available OpenMP threads; the
/// reduction is pairwise in path order, so the result is bit-identical to the
/// serial reference for every thread count and schedule.
McEstimate feynman_kac_estimate(const std::function<double(double)>& f_in, const Vec3& p,
                                double t, const FieldTrajectory& phi_traj,
                                const PathConfig& cfg, RadialMode mode);

/// Single-threaded reference implementation with the identical contract;
/// kept for equivalence tests and as the benchmark baseline.
McEstimate feynman_kac_estimate_serial(const std::function<double(double)>& f_in,
                                       const Vec3& p, double t,
                                       const FieldTrajectory& phi_traj, const PathConfig& cfg,
                                       RadialMode mode);

}  // namespace vnfp
