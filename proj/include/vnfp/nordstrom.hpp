#pragma once
#include <functional>
#include <string>
#include <vector>

#include "vnfp/fp_radial.hpp"

namespace vnfp {

/// One sample of the scalar field: value, velocity, accumulated time change
/// tau = integral of e^{2 phi} from 0 to t.
struct FieldState {
    double t = 0;
    double phi = 0;
    double phidot = 0;
    double tau = 0;
};

/// Time-ordered field history with the source value recorded at each sample
/// (sources[i] = H at states[i], so phiddot = -sources[i]).
struct FieldTrajectory {
    std::vector<FieldState> states;
    std::vector<double> sources;
    double dt = 0;

    /// Linear interpolation of phi, clamped to the sampled range.
    double phi_at(double t) const;
    const FieldState& back() const { return states.back(); }
};

/// Source H_f = e^{2 phi} 4 pi * integral f(q) q^2 / sqrt(e^{2 phi} + q^2) dq
/// by midpoint grid quadrature. Nonnegative, bounded by e^{phi} * mass.
/// Throws std::invalid_argument when the density dips below
/// -1e-12 * max f (not a physical state).
double field_source(const FieldValue& fv, const DensityState& density, const RadialGrid& grid);

/// Classical 4th-order one-step advance of (phi, phidot) under
/// phi_ddot = -source(t, phi); tau advances by trapezoid on e^{2 phi}.
/// Exact for source = 0 and source = const. Throws std::runtime_error on
/// non-finite source evaluations.
FieldState advance_field(const FieldState& state,
                         const std::function<double(double, double)>& source, double dt);

/// E = 4 pi * integral f sqrt(e^{2 phi} + q^2) q^2 dq + phidot^2 / 2.
double energy(const DensityState& density, const RadialGrid& grid, const FieldState& state);

/// Repeated advance_field from (phi_in, psi_in) over [0, T]; records every step.
FieldTrajectory integrate_field(double phi_in, double psi_in,
                                const std::function<double(double, double)>& source,
                                double T, double dt);

struct BoundViolation {
    double t = 0;
    std::string bound;
    double margin = 0;  // amount by which the inequality failed
};

/// Pointwise field estimates along a trajectory of the coupled system:
/// concavity -mass e^{phi} <= phiddot <= 0, monotone phidot, the logarithmic
/// phidot bound, and after the first sign change of phidot the linear decay
/// envelope on phi. Reports violations instead of aborting.
struct FieldBoundsReport {
    bool ok = true;
    bool phidot_crossed_zero = false;
    double t0 = 0;  // sign-change time, refined by linear interpolation
    std::vector<BoundViolation> violations;
};

FieldBoundsReport check_field_bounds(const FieldTrajectory& traj, double mass, double E0);

}  // namespace vnfp
