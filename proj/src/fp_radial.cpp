#include "vnfp/fp_radial.hpp"

#include <cmath>
#include <stdexcept>

namespace vnfp {

namespace {

constexpr double kFourPiOver3 = 4.18879020478639098;

void finish_grid(RadialGrid& g)
{
    g.centers.resize(g.n);
    g.vol_weights.resize(g.n);
    for (int j = 0; j < g.n; ++j) {
        const double a = g.faces[j], b = g.faces[j + 1];
        g.centers[j] = 0.5 * (a + b);
        g.vol_weights[j] = kFourPiOver3 * (b * b * b - a * a * a);
    }
}

// Face transport coefficient q^2 Psi(q) / (center spacing), zero at both ends.
std::vector<double> face_coefficients(const FieldValue& fv, const RadialGrid& g,
                                      RadialMode mode)
{
    std::vector<double> c(g.n + 1, 0.0);
    for (int j = 1; j < g.n; ++j) {
        const double q = g.faces[j];
        const double psi = mode == RadialMode::relativistic
                               ? std::sqrt(fv.exp2phi + q * q)
                               : q;
        c[j] = q * q * psi / (g.centers[j] - g.centers[j - 1]);
    }
    return c;
}

}  // namespace

RadialGrid RadialGrid::uniform(double q_max, int n)
{
    if (!(q_max > 0) || n < 2)
        throw std::invalid_argument("RadialGrid: need q_max > 0 and n >= 2");
    RadialGrid g;
    g.q_max = q_max;
    g.n = n;
    g.faces.resize(n + 1);
    for (int j = 0; j <= n; ++j)
        g.faces[j] = q_max * double(j) / double(n);
    finish_grid(g);
    return g;
}

RadialGrid RadialGrid::stretched(double q_max, int n, double growth)
{
    if (!(q_max > 0) || n < 2 || !(growth > 0))
        throw std::invalid_argument("RadialGrid: bad stretched parameters");
    const double r = std::pow(growth, 1.0 / double(n - 1));
    RadialGrid g;
    g.q_max = q_max;
    g.n = n;
    g.faces.resize(n + 1);
    g.faces[0] = 0.0;
    // Widths w, w r, ..., w r^{n-1} summing to q_max.
    double sum = 0;
    for (int j = 0; j < n; ++j)
        sum += std::pow(r, j);
    const double w0 = q_max / sum;
    for (int j = 0; j < n; ++j)
        g.faces[j + 1] = g.faces[j] + w0 * std::pow(r, j);
    g.faces[n] = q_max;
    finish_grid(g);
    return g;
}

DensityState sample_profile(const RadialGrid& grid, const std::function<double(double)>& profile)
{
    DensityState f;
    f.values.resize(grid.n);
    for (int j = 0; j < grid.n; ++j)
        f.values[j] = profile(grid.centers[j]);
    return f;
}

std::vector<double> radial_operator_apply(const DensityState& f, const FieldValue& fv,
                                          const RadialGrid& grid, RadialMode mode)
{
    const int n = grid.n;
    const auto c = face_coefficients(fv, grid, mode);
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) {
        const double flux_hi = j + 1 <= n - 1 ? c[j + 1] * (f.values[j + 1] - f.values[j]) : 0.0;
        const double flux_lo = j >= 1 ? c[j] * (f.values[j] - f.values[j - 1]) : 0.0;
        out[j] = fv.exp2phi * (flux_hi - flux_lo) * (4.0 * M_PI) / grid.vol_weights[j];
    }
    return out;
}

DensityState step_theta(const DensityState& f, const FieldValue& fv_mid, double dt,
                        const RadialGrid& grid, double theta, RadialMode mode)
{
    if (!(dt > 0))
        throw std::invalid_argument("step_theta: dt must be positive");
    const int n = grid.n;
    const auto c = face_coefficients(fv_mid, grid, mode);

    // Scaled rate r_j = e^{2phi} dt 4pi / vol_weights[j]; the tridiagonal rows
    // are then [-(theta r c_j), 1 + theta r (c_j + c_{j+1}), -(theta r c_{j+1})].
    std::vector<double> lower(n), diag(n), upper(n), rhs(n);
    for (int j = 0; j < n; ++j) {
        const double r = fv_mid.exp2phi * dt * (4.0 * M_PI) / grid.vol_weights[j];
        const double lo = c[j], hi = c[j + 1];
        lower[j] = -theta * r * lo;
        upper[j] = -theta * r * hi;
        diag[j] = 1.0 + theta * r * (lo + hi);
        const double apply = (j >= 1 ? lo * (f.values[j - 1] - f.values[j]) : 0.0) +
                             (j + 1 <= n - 1 ? hi * (f.values[j + 1] - f.values[j]) : 0.0);
        rhs[j] = f.values[j] + (1.0 - theta) * r * apply;
    }

    // Thomas sweep; diagonal dominance (by exactly 1) keeps pivots positive.
    for (int j = 1; j < n; ++j) {
        if (!(diag[j - 1] > 0))
            throw std::runtime_error("step_theta: singular tridiagonal system");
        const double m = lower[j] / diag[j - 1];
        diag[j] -= m * upper[j - 1];
        rhs[j] -= m * rhs[j - 1];
    }
    DensityState out;
    out.t = f.t + dt;
    out.values.resize(n);
    out.values[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int j = n - 2; j >= 0; --j)
        out.values[j] = (rhs[j] - upper[j] * out.values[j + 1]) / diag[j];
    return out;
}

DensityState evolve_fixed_field(const DensityState& f0, const FieldValue& fv,
                                const RadialGrid& grid, double t, double dt, double theta,
                                RadialMode mode)
{
    const int n_steps = int(std::lround(t / dt));
    DensityState f = f0;
    for (int k = 0; k < n_steps; ++k)
        f = step_theta(f, fv, dt, grid, theta, mode);
    return f;
}

Moments moments(const DensityState& f, const RadialGrid& grid)
{
    Moments m;
    double l2sq = 0;
    for (int j = 0; j < grid.n; ++j) {
        const double w = grid.vol_weights[j], v = f.values[j];
        m.mass += w * v;
        l2sq += w * v * v;
        const double a = grid.faces[j], b = grid.faces[j + 1];
        m.first_abs_moment += M_PI * (b * b * b * b - a * a * a * a) * std::abs(v);
    }
    m.l2 = std::sqrt(l2sq);
    return m;
}

double lq_norm(const DensityState& f, const RadialGrid& grid, double gamma)
{
    if (!(gamma >= 1))
        throw std::invalid_argument("lq_norm: gamma must be >= 1");
    double s = 0;
    for (int j = 0; j < grid.n; ++j)
        s += grid.vol_weights[j] * std::pow(std::abs(f.values[j]), gamma);
    return std::pow(s, 1.0 / gamma);
}

double weighted_moment(const DensityState& f, const RadialGrid& grid, const FieldValue& fv,
                       double gamma)
{
    double s = 0;
    for (int j = 0; j < grid.n; ++j) {
        const double q = grid.centers[j];
        s += grid.vol_weights[j] * std::pow(fv.exp2phi + q * q, gamma) * f.values[j];
    }
    return s;
}

double nonvanishing_measure(const DensityState& f, double eps, const RadialGrid& grid)
{
    if (!(eps > 0))
        throw std::invalid_argument("nonvanishing_measure: eps must be positive");
    double s = 0;
    for (int j = 0; j < grid.n; ++j)
        if (f.values[j] > eps)
            s += grid.vol_weights[j];
    return s;
}

}  // namespace vnfp
