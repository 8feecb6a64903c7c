#include "vnfp/specialfn.hpp"

#include <cmath>
#include <stdexcept>

namespace vnfp {

namespace {

// Largest x with e^x representable in double.
constexpr double kMaxExpArg = 709.782712893384;

// Series/asymptotic crossover; both branches agree to ~1e-13 here.
constexpr double kSeriesCutoff = 15.0;

// sum_k (x/2)^{2k+nu} / (k! (k+nu)!); every term positive, no cancellation.
double series_sum(int nu, double x)
{
    const double half = 0.5 * x;
    const double r = half * half;
    double term = (nu == 1) ? half : 0.5 * r;  // (x/2)^nu / nu!
    double sum = term;
    for (int k = 1; k <= 200; ++k) {
        term *= r / (double(k) * double(k + nu));
        sum += term;
        if (term <= 1e-17 * sum)
            break;
    }
    return sum;
}

// e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum_k t_k with t_0 = 1 and
// t_{k+1} = -t_k (mu - (2k+1)^2) / (8 x (k+1)), mu = 4 nu^2.
// Terms decrease from the start for x > kSeriesCutoff; truncation at the
// smallest term leaves a relative error ~1e-15 at the crossover.
double asymptotic_scaled(int nu, double x)
{
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0, prev = 1.0;
    for (int k = 0; k < 40; ++k) {
        const double o = 2.0 * k + 1.0;
        term *= -(mu - o * o) / (8.0 * x * (k + 1));
        if (std::abs(term) >= prev)
            break;
        sum += term;
        prev = std::abs(term);
        if (prev <= 1e-17 * std::abs(sum))
            break;
    }
    return sum / std::sqrt(2.0 * M_PI * x);
}

void check_domain(double x)
{
    if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("bessel_i: argument must be finite and nonnegative");
}

}  // namespace

double bessel_i(BesselOrder order, double x)
{
    check_domain(x);
    const int nu = static_cast<int>(order);
    if (x <= kSeriesCutoff)
        return series_sum(nu, x);
    if (x > kMaxExpArg)
        throw std::overflow_error("bessel_i: e^x overflows, use bessel_i_scaled");
    return std::exp(x) * asymptotic_scaled(nu, x);
}

double bessel_i_scaled(BesselOrder order, double x)
{
    check_domain(x);
    const int nu = static_cast<int>(order);
    if (x <= kSeriesCutoff)
        return std::exp(-x) * series_sum(nu, x);
    return asymptotic_scaled(nu, x);
}

}  // namespace vnfp
