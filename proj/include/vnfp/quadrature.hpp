#pragma once
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vnfp {

struct QuadResult {
    double value = 0;
    double error = 0;      // accumulated local error estimates
    int evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1,1] (QUADPACK dqk15 constants).
constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kGk15WeightsK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGk15WeightsG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
void gk15(F& f, double a, double b, double& kronrod, double& err)
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resk = kGk15WeightsK[7] * f(c);
    double resg = kGk15WeightsG[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGk15Nodes[i];
        const double fsum = f(c - dx) + f(c + dx);
        resk += kGk15WeightsK[i] * fsum;
        if (i % 2 == 1)
            resg += kGk15WeightsG[i / 2] * fsum;
    }
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
/// Bisects until each subinterval's error estimate fits its proportional share
/// of the requested tolerance; throws std::runtime_error on non-convergence.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                              double abs_tol = 0.0, int max_depth = 40)
{
    if (!(b >= a) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integrate_adaptive: bad interval");
    if (a == b)
        return {0.0, 0.0, 0};

    struct Interval {
        double a, b;
        int depth;
    };
    // First whole-interval pass fixes the scale for the relative tolerance.
    double whole, whole_err;
    detail::gk15(f, a, b, whole, whole_err);
    const double span = b - a;

    QuadResult out;
    out.evaluations = 15;
    std::vector<Interval> stack{{a, b, 0}};
    while (!stack.empty()) {
        const Interval iv = stack.back();
        stack.pop_back();
        double val, err;
        detail::gk15(f, iv.a, iv.b, val, err);
        out.evaluations += 15;
        const double budget =
            std::max(abs_tol, rel_tol * std::abs(whole)) * (iv.b - iv.a) / span;
        if (err <= budget || err <= 1e-17 * std::abs(whole)) {
            out.value += val;
            out.error += err;
            continue;
        }
        if (iv.depth >= max_depth)
            throw std::runtime_error("integrate_adaptive: failed to converge");
        const double m = 0.5 * (iv.a + iv.b);
        stack.push_back({m, iv.b, iv.depth + 1});
        stack.push_back({iv.a, m, iv.depth + 1});
    }
    return out;
}

}  // namespace vnfp
