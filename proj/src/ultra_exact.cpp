#include "vnfp/ultra_exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vnfp/quadrature.hpp"
#include "vnfp/specialfn.hpp"

namespace vnfp {

namespace {

// e^{-(sqrt q - sqrt z)^2 / tau} < 1e-43 past this many Gaussian widths.
constexpr double kKernelWidths = 10.0;

void check_positive(double v, const char* what)
{
    if (!(v > 0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("ultra_exact: ") + what + " must be positive");
}

}  // namespace

double profile_moment(const RadialProfile& p)
{
    const double upper = std::max(1.0, p.tail_hint);
    const auto r = integrate_adaptive(
        [&](double q) { return q * (1.0 + q) * (1.0 + q) * p.eval(q); }, 0.0, upper, 1e-8,
        1e-12);
    return 4.0 * M_PI * r.value;
}

double ultra_kernel(double tau, double q, double z)
{
    check_positive(tau, "tau");
    check_positive(q, "q");
    check_positive(z, "z");
    const double sq = std::sqrt(q), sz = std::sqrt(z);
    const double x = 2.0 * sq * sz / tau;
    const double gap = (sq - sz) * (sq - sz) / tau;
    return std::exp(-gap) * bessel_i_scaled(BesselOrder::i2, x) / tau;
}

double ultra_solution(const RadialProfile& g_in, double t, double q)
{
    check_positive(t, "t");
    check_positive(q, "q");
    const double sq = std::sqrt(q), st = std::sqrt(t);
    const double z_max = (sq + kKernelWidths * st) * (sq + kKernelWidths * st);
    const auto r = integrate_adaptive(
        [&](double z) { return z <= 0 ? 0.0 : g_in.eval(z) * z * ultra_kernel(t, q, z); },
        0.0, z_max, 1e-11, 1e-300);
    return r.value / q;
}

double heat6d_solution(const RadialProfile& u_in, double t, double r)
{
    check_positive(t, "t");
    if (!(r >= 0) || !std::isfinite(r))
        throw std::invalid_argument("ultra_exact: r must be nonnegative");
    const double s_max = r + 2.0 * kKernelWidths * std::sqrt(t);
    if (r == 0.0) {
        // I_2(x) ~ x^2/8 cancels the r^{-2} prefactor.
        const auto res = integrate_adaptive(
            [&](double s) {
                return u_in.eval(s) * std::pow(s, 5) * std::exp(-s * s / (4.0 * t));
            },
            0.0, s_max, 1e-11, 1e-300);
        return res.value / (64.0 * t * t * t);
    }
    const auto res = integrate_adaptive(
        [&](double s) {
            const double x = r * s / (2.0 * t);
            const double gap = (r - s) * (r - s) / (4.0 * t);
            return u_in.eval(s) * s * s * s * std::exp(-gap) *
                   bessel_i_scaled(BesselOrder::i2, x);
        },
        0.0, s_max, 1e-11, 1e-300);
    return 0.5 * res.value / (r * r * t);
}

TimeChange time_change(const FieldTrajectory& traj)
{
    const auto& st = traj.states;
    if (st.size() < 8)
        throw std::invalid_argument("time_change: trajectory too short");

    // Least-squares slope of phi on the last quarter of the samples.
    const size_t lo = st.size() - st.size() / 4;
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = lo; i < st.size(); ++i) {
        n += 1;
        sx += st[i].t;
        sy += st[i].phi;
        sxx += st[i].t * st[i].t;
        sxy += st[i].t * st[i].phi;
    }
    const double beta = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (!(beta > 1e-8))
        throw std::runtime_error("time_change: phi is not decaying, tail not estimable");

    const double t_end = st.back().t;
    const double tail = std::exp(2.0 * st.back().phi) / (2.0 * beta);

    std::vector<double> ts(st.size()), taus(st.size());
    for (size_t i = 0; i < st.size(); ++i) {
        ts[i] = st[i].t;
        taus[i] = st[i].tau;
    }
    TimeChange tc;
    tc.tau_infinity = st.back().tau + tail;
    // Beyond the stored range the fitted decay extends the integral:
    // tau(t) = tau_inf - tail e^{-2 beta (t - t_end)}, continuous at t_end.
    tc.tau_of_t = [ts = std::move(ts), taus = std::move(taus), t_end, tail, beta,
                   tau_inf = tc.tau_infinity](double t) {
        if (t <= ts.front())
            return taus.front();
        if (t >= t_end)
            return tau_inf - tail * std::exp(-2.0 * beta * (t - t_end));
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const size_t k = size_t(it - ts.begin());
        const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
        return taus[k - 1] + w * (taus[k] - taus[k - 1]);
    };
    return tc;
}

double asymptotic_profile(const RadialProfile& h_in, const TimeChange& tc, double q)
{
    return ultra_solution(h_in, tc.tau_infinity, q);
}

AsymptoticReport verify_asymptotic_bound(const RadialProfile& h_in, const FieldTrajectory& traj,
                                         const std::vector<double>& times)
{
    const TimeChange tc = time_change(traj);
    // Dense q-sample: log-spaced through the profile's support.
    std::vector<double> qs;
    const double q_lo = 1e-2, q_hi = std::max(30.0, h_in.tail_hint);
    const int nq = 160;
    for (int i = 0; i <= nq; ++i)
        qs.push_back(q_lo * std::pow(q_hi / q_lo, double(i) / nq));

    std::vector<double> limit(qs.size());
    for (size_t i = 0; i < qs.size(); ++i)
        limit[i] = ultra_solution(h_in, tc.tau_infinity, qs[i]);

    AsymptoticReport rep;
    rep.times = times;
    for (double t : times) {
        const double tau = tc.tau_of_t(t);
        double err = 0;
        for (size_t i = 0; i < qs.size(); ++i)
            err = std::max(err, std::abs(ultra_solution(h_in, tau, qs[i]) - limit[i]));
        const double tail = tc.tau_infinity - tau;
        rep.errors.push_back(err);
        rep.tails.push_back(tail);
        rep.ratios.push_back(tail > 0 ? err / tail : 0.0);
    }
    rep.ratio_max = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.ratio_min = *std::min_element(rep.ratios.begin(), rep.ratios.end());
    return rep;
}

}  // namespace vnfp
