#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "vnfp/fp_radial.hpp"
#include "vnfp/ultra_exact.hpp"

using namespace vnfp;

namespace {
const RadialProfile kExp{[](double q) { return std::exp(-q); }, 50.0};
}

TEST_CASE("uniform grid geometry")
{
    const RadialGrid g = RadialGrid::uniform(40.0, 200);
    CHECK(g.faces.front() == 0.0);
    CHECK(g.faces.back() == 40.0);
    CHECK(int(g.centers.size()) == 200);
    double total = 0;
    for (double w : g.vol_weights) {
        CHECK(w > 0);
        total += w;
    }
    CHECK(std::abs(total / (4.18879020478639098 * 40.0 * 40.0 * 40.0) - 1) < 1e-14);
    CHECK(std::abs(g.centers[0] - 0.1) < 1e-15);
}

TEST_CASE("stretched grid geometry")
{
    const RadialGrid g = RadialGrid::stretched(40.0, 128, 8.0);
    CHECK(g.faces.front() == 0.0);
    CHECK(g.faces.back() == 40.0);
    for (int j = 0; j < g.n; ++j)
        CHECK(g.faces[j + 1] > g.faces[j]);
    const double first = g.faces[1] - g.faces[0];
    const double last = g.faces[g.n] - g.faces[g.n - 1];
    CHECK(std::abs(last / first / 8.0 - 1) < 1e-12);
    CHECK_THROWS_AS(RadialGrid::uniform(-1, 10), std::invalid_argument);
    CHECK_THROWS_AS(RadialGrid::stretched(1, 1, 2), std::invalid_argument);
}

TEST_CASE("generator is exact on linear radial data in ultra mode")
{
    // For f = q the flux is q_f^3 on any grid, so L f = 3 exactly.
    for (const RadialGrid& g :
         {RadialGrid::uniform(10.0, 64), RadialGrid::stretched(10.0, 64, 5.0)}) {
        DensityState f = sample_profile(g, [](double q) { return q; });
        const auto Lf = radial_operator_apply(f, FieldValue::make(0), g, RadialMode::ultra);
        for (int j = 1; j < g.n - 1; ++j)
            CHECK(std::abs(Lf[j] - 3.0) < 1e-11);
    }
}

TEST_CASE("generator is second order on quadratic data")
{
    // Ultra mode, f = q^2: L f = 8 q. The error at fixed q scales as the
    // cell width squared; near the origin the leading term is h^2/q, so the
    // window stays away from the first cells.
    double err_coarse = 0, err_fine = 0;
    for (int n : {100, 200}) {
        const RadialGrid g = RadialGrid::uniform(10.0, n);
        DensityState f = sample_profile(g, [](double q) { return q * q; });
        const auto Lf = radial_operator_apply(f, FieldValue::make(0), g, RadialMode::ultra);
        double worst = 0;
        for (int j = 1; j < g.n - 1; ++j)
            if (g.centers[j] >= 2.0 && g.centers[j] <= 8.0)
                worst = std::max(worst, std::abs(Lf[j] - 8 * g.centers[j]));
        (n == 100 ? err_coarse : err_fine) = worst;
    }
    CHECK(err_coarse / err_fine > 3.2);
    CHECK(err_coarse / err_fine < 4.8);
}

TEST_CASE("generator annihilates constants and conserves discrete mass")
{
    const RadialGrid g = RadialGrid::uniform(8.0, 77);
    const FieldValue fv = FieldValue::make(-0.4);
    DensityState c = sample_profile(g, [](double) { return 1.7; });
    for (RadialMode mode : {RadialMode::relativistic, RadialMode::ultra}) {
        const auto Lc = radial_operator_apply(c, fv, g, mode);
        for (double v : Lc)
            CHECK(std::abs(v) < 1e-13);
        DensityState f = sample_profile(g, [](double q) { return std::exp(-q) * (1 + std::sin(3 * q)); });
        const auto Lf = radial_operator_apply(f, fv, g, mode);
        double total = 0;
        for (int j = 0; j < g.n; ++j)
            total += g.vol_weights[j] * Lf[j];
        CHECK(std::abs(total) < 1e-12 * moments(f, g).mass);
    }
}

TEST_CASE("theta step conserves mass to round-off")
{
    const RadialGrid g = RadialGrid::uniform(20.0, 300);
    const FieldValue fv = FieldValue::make(0.2);
    // The explicit step needs dt below the parabolic stability limit, or the
    // blown-up iterates lose the telescoped mass to cancellation.
    const std::pair<double, double> cases[] = {{0.0, 2e-6}, {0.5, 1e-3}, {1.0, 1e-3}};
    for (const auto& [theta, dt] : cases) {
        DensityState f = sample_profile(g, kExp.eval);
        const double m0 = moments(f, g).mass;
        for (int k = 0; k < 50; ++k)
            f = step_theta(f, fv, dt, g, theta, RadialMode::relativistic);
        CHECK(std::abs(moments(f, g).mass / m0 - 1) < 1e-13);
        CHECK(f.t == doctest::Approx(50 * dt).epsilon(1e-12));
    }
}

TEST_CASE("implicit step preserves nonnegativity and contracts norms")
{
    const RadialGrid g = RadialGrid::uniform(20.0, 250);
    const FieldValue fv = FieldValue::make(0);
    DensityState f = sample_profile(g, [](double q) { return q < 1.0 ? 1.0 : 0.0; });
    double l2 = lq_norm(f, g, 2), l4 = lq_norm(f, g, 4);
    for (int k = 0; k < 200; ++k) {
        f = step_theta(f, fv, 5e-3, g, 1.0, RadialMode::ultra);
        for (double v : f.values)
            CHECK(v >= 0.0);
        const double n2 = lq_norm(f, g, 2), n4 = lq_norm(f, g, 4);
        CHECK(n2 <= l2 * (1 + 1e-12));
        CHECK(n4 <= l4 * (1 + 1e-12));
        l2 = n2;
        l4 = n4;
    }
}

TEST_CASE("trapezoidal stepping converges to the exact ultra solution")
{
    // Datum e^{-q} evolves to e^{-q/(1+t)} / (1+t)^3 under the ultra operator.
    const double t = 0.5;
    double err_coarse = 0, err_fine = 0;
    for (int n : {200, 400}) {
        const RadialGrid g = RadialGrid::uniform(40.0, n);
        DensityState f = sample_profile(g, kExp.eval);
        f = evolve_fixed_field(f, FieldValue::make(0), g, t, 2.5e-4, 0.5, RadialMode::ultra);
        double worst = 0;
        for (int j = 0; j < g.n; ++j) {
            const double q = g.centers[j];
            if (q > 10)
                continue;
            const double exact = std::exp(-q / (1 + t)) / std::pow(1 + t, 3);
            worst = std::max(worst, std::abs(f.values[j] - exact));
        }
        (n == 200 ? err_coarse : err_fine) = worst;
    }
    CHECK(err_fine < err_coarse);
    CHECK(err_coarse / err_fine > 2.5);  // spatial order limit, boundary-degraded
}

TEST_CASE("relativistic mode matches a quadrature reference on one step")
{
    // One explicit Euler step against L f computed by smooth quadrature:
    // (d/dt) integral f chi = - integral Psi f' chi' on test chi with
    // chi'(0) = chi'(q_max) = 0; backs the discrete flux form at order dq^2.
    const double phi = -0.3;
    const FieldValue fv = FieldValue::make(phi);
    const auto chi = [](double q) { return std::cos(q); };      // chi'(0) = 0
    const auto dchi = [](double q) { return -std::sin(q); };
    const double q_max = M_PI;  // chi'(q_max) = 0 as well
    double prev = 0;
    for (int n : {100, 200}) {
        const RadialGrid g = RadialGrid::uniform(q_max, n);
        DensityState f = sample_profile(g, [](double q) { return std::exp(-q * q); });
        const auto Lf = radial_operator_apply(f, fv, g, RadialMode::relativistic);
        double lhs = 0;
        for (int j = 0; j < g.n; ++j)
            lhs += g.vol_weights[j] * Lf[j] * chi(g.centers[j]);
        const double rhs =
            -fv.exp2phi * 4 * M_PI *
            oracle::integrate(
                [&](double q) {
                    return q * q * std::sqrt(fv.exp2phi + q * q) *
                           (-2 * q * std::exp(-q * q)) * dchi(q);
                },
                0.0, q_max);
        const double err = std::abs(lhs - rhs);
        if (n == 200)
            CHECK(err < 0.35 * prev);  // second-order decay
        prev = err;
    }
}

TEST_CASE("moments and norms on exactly integrable data")
{
    const RadialGrid g = RadialGrid::uniform(5.0, 400);
    DensityState one = sample_profile(g, [](double) { return 1.0; });
    const Moments m = moments(one, g);
    CHECK(std::abs(m.mass / (4.18879020478639098 * 125.0) - 1) < 1e-14);
    CHECK(std::abs(m.first_abs_moment / (M_PI * 625.0) - 1) < 1e-14);
    CHECK(std::abs(m.l2 / std::sqrt(m.mass) - 1) < 1e-14);
    CHECK(std::abs(lq_norm(one, g, 2) / m.l2 - 1) < 1e-14);
    CHECK(std::abs(weighted_moment(one, g, FieldValue::make(0), 0.0) / m.mass - 1) <
          1e-14);
    CHECK_THROWS_AS(lq_norm(one, g, 0.5), std::invalid_argument);
}

TEST_CASE("super-level-set measure tracks the profile")
{
    const RadialGrid g = RadialGrid::uniform(20.0, 2000);
    DensityState f = sample_profile(g, kExp.eval);
    // { e^{-q} > e^{-1} } is the ball of radius 1.
    const double measure = nonvanishing_measure(f, std::exp(-1.0), g);
    CHECK(std::abs(measure - 4.18879020478639098) < 0.1);
    CHECK(nonvanishing_measure(f, 2.0, g) == 0.0);
    CHECK_THROWS_AS(nonvanishing_measure(f, 0.0, g), std::invalid_argument);
    CHECK_THROWS_AS(nonvanishing_measure(f, -1.0, g), std::invalid_argument);
}

TEST_CASE("step rejects nonpositive dt")
{
    const RadialGrid g = RadialGrid::uniform(5.0, 10);
    DensityState f = sample_profile(g, kExp.eval);
    CHECK_THROWS_AS(step_theta(f, FieldValue::make(0), 0.0, g, 0.5, RadialMode::ultra),
                    std::invalid_argument);
    CHECK_THROWS_AS(step_theta(f, FieldValue::make(0), -1e-3, g, 0.5, RadialMode::ultra),
                    std::invalid_argument);
}
