#pragma once
#include <functional>
#include <vector>

#include "vnfp/nordstrom.hpp"

namespace vnfp {

/// Nonnegative radial datum. tail_hint marks where the profile has decayed to
/// numerical irrelevance; quadrature truncation combines it with the kernel's
/// own Gaussian falloff. Data must have a finite q (1+q)^2 moment.
struct RadialProfile {
    std::function<double(double)> eval;
    double tail_hint = 50.0;
};

/// 4 pi * integral q (1+q)^2 profile dq; the integrability gate for the
/// asymptotic-profile machinery.
double profile_moment(const RadialProfile& p);

/// Monotone time change tau(t) = integral of e^{2 phi} with its finite limit.
struct TimeChange {
    std::function<double(double)> tau_of_t;
    double tau_infinity = 0;
};

/// H(tau,q,z) = tau^{-1} e^{-(q+z)/tau} I_2(2 sqrt(qz)/tau), evaluated as
/// tau^{-1} e^{-(sqrt q - sqrt z)^2/tau} [e^{-x} I_2(x)] so no factor
/// overflows. Symmetric in (q, z); integral of H q dq over (0,inf) equals z.
double ultra_kernel(double tau, double q, double z);

/// Exact radial solution of d_t g = q g'' + 3 g' from datum g_in:
/// g(t,q) = q^{-1} * integral g_in(z) z H(t,q,z) dz by adaptive quadrature.
/// Throws std::runtime_error if the quadrature fails to converge.
double ultra_solution(const RadialProfile& g_in, double t, double q);

/// Spherically symmetric 6-D heat evolution of u_in, the change of variables
/// behind ultra_solution: u(t,r) = (1/2)(e^{-r^2/4t}/(r^2 t)) *
/// integral u_in(s) e^{-s^2/4t} s^3 I_2(rs/2t) ds, with the finite r = 0 limit
/// taken analytically.
double heat6d_solution(const RadialProfile& u_in, double t, double r);

/// Builds tau(t) from a stored field trajectory (piecewise-linear in the
/// stored tau samples) and estimates tau_infinity by fitting the linear decay
/// slope of phi on the last quarter and integrating the tail analytically.
/// Throws std::runtime_error when phi is not decaying (tail not estimable).
TimeChange time_change(const FieldTrajectory& traj);

/// Long-time profile T[h_in](q) = ultra_solution(h_in, tau_infinity, q).
double asymptotic_profile(const RadialProfile& h_in, const TimeChange& tc, double q);

/// For each requested time: e(t) = sup_q |h(t,q) - T[h_in](q)| over a dense
/// q-sample, the tail r(t) = tau_infinity - tau(t), and their ratio. The
/// ratios should be bounded by one constant across times.
struct AsymptoticReport {
    std::vector<double> times;
    std::vector<double> errors;
    std::vector<double> tails;
    std::vector<double> ratios;
    double ratio_max = 0;
    double ratio_min = 0;
};

AsymptoticReport verify_asymptotic_bound(const RadialProfile& h_in, const FieldTrajectory& traj,
                                         const std::vector<double>& times);

}  // namespace vnfp
