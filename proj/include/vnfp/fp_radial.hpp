#pragma once
#include <functional>
#include <vector>

#include "vnfp/geometry.hpp"

namespace vnfp {

enum class RadialMode { relativistic, ultra };

/// Cell-centered radial momentum grid on [0, q_max].
/// vol_weights[j] = 4 pi * integral of q^2 over cell j, exact per cell, so
/// discrete mass Sum_j vol_weights[j] f_j matches the continuum integral of
/// piecewise-constant data and flux telescoping conserves it to round-off.
struct RadialGrid {
    double q_max = 0;
    int n = 0;
    std::vector<double> centers;      // n cell midpoints
    std::vector<double> faces;        // n+1 edges, faces[0] = 0, faces[n] = q_max
    std::vector<double> vol_weights;  // n positive weights

    static RadialGrid uniform(double q_max, int n);
    /// Geometrically stretched cells; growth = width ratio of last to first cell.
    static RadialGrid stretched(double q_max, int n, double growth);
};

/// Cell-average density sample at one time.
struct DensityState {
    std::vector<double> values;
    double t = 0;
};

/// values[j] = profile(centers[j]) at t = 0.
DensityState sample_profile(const RadialGrid& grid, const std::function<double(double)>& profile);

/// Applies the radial diffusion generator
///   L f = e^{2 phi} q^{-2} d_q [ q^2 Psi(q) d_q f ],
/// Psi = sqrt(e^{2 phi} + q^2) in relativistic mode, Psi = q in ultra mode,
/// by centered face fluxes with zero flux at q = 0 and q = q_max.
std::vector<double> radial_operator_apply(const DensityState& f, const FieldValue& fv,
                                          const RadialGrid& grid, RadialMode mode);

/// One theta-scheme step: solves (I - theta dt L) f' = (I + (1-theta) dt L) f
/// with a tridiagonal solve. theta = 1/2 is trapezoidal, theta = 1 fully
/// implicit (nonnegativity-preserving). Mass is conserved exactly by flux
/// telescoping. Throws std::runtime_error on a singular system (cannot happen
/// for dt > 0, theta in [0,1]; checked anyway).
DensityState step_theta(const DensityState& f, const FieldValue& fv_mid, double dt,
                        const RadialGrid& grid, double theta, RadialMode mode);

/// Repeated step_theta with a frozen field; n_steps = round(t / dt).
DensityState evolve_fixed_field(const DensityState& f0, const FieldValue& fv,
                                const RadialGrid& grid, double t, double dt, double theta,
                                RadialMode mode);

struct Moments {
    double mass = 0;             // Sum vol_weights f
    double l2 = 0;               // sqrt(Sum vol_weights f^2)
    double first_abs_moment = 0; // 4 pi * integral q^3 f dq, exact cell moments
};

Moments moments(const DensityState& f, const RadialGrid& grid);

/// (Sum vol_weights |f|^gamma)^{1/gamma}.
double lq_norm(const DensityState& f, const RadialGrid& grid, double gamma);

/// 4 pi * integral (e^{2 phi} + q^2)^gamma f q^2 dq with midpoint weights.
double weighted_moment(const DensityState& f, const RadialGrid& grid, const FieldValue& fv,
                       double gamma);

/// Lebesgue measure (momentum volume) of the super-level set { f > eps }.
double nonvanishing_measure(const DensityState& f, double eps, const RadialGrid& grid);

}  // namespace vnfp
