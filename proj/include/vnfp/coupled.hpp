#pragma once
#include <string>
#include <vector>

#include "vnfp/fp_radial.hpp"
#include "vnfp/nordstrom.hpp"
#include "vnfp/ultra_exact.hpp"

namespace vnfp {

/// Full configuration of one self-consistent run. Defaults are the frozen
/// reference preset: f_in = e^{-q}, phi_in = psi_in = 0, q_max = 40, n = 2000,
/// dt = 1e-3, t_end = 20, ultra mode.
struct SimConfig {
    RadialProfile f_in{[](double q) { return std::exp(-q); }, 50.0};
    std::string f_in_name = "exp";
    double phi_in = 0;
    double psi_in = 0;
    double t_end = 20;
    double dt = 1e-3;
    double q_max = 40;
    int n = 2000;
    double grid_growth = 1.0;  // 1 = uniform cells, > 1 geometric stretching
    RadialMode mode = RadialMode::ultra;
    double theta = 0.5;
    double sigma = 1.0;  // scalar multiplying the diffusion operator
    int diagnostics_every = 10;
    int snapshot_every = 0;  // 0 keeps only the first and last profiles
    double nonvanish_eps = 0.2;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Scalar observables sampled at the diagnostics cadence.
struct DiagnosticsRecord {
    double t = 0;
    double mass = 0;
    double l2 = 0;
    double first_abs_moment = 0;
    double energy = 0;
    double energy_residual = 0;  // E(t) - E(0) - 3 M sigma tau(t)
    double nonvanish = 0;
    double phi = 0;
    double phidot = 0;
    bool phiddot_sign_ok = true;
    double margin_source_nonneg = 0;  // H itself; nonnegative on valid runs
    double margin_source_cap = 0;     // mass e^{phi} - H; nonnegative on valid runs
};

struct Trajectory {
    RadialGrid grid;
    std::vector<DensityState> density_snapshots;
    FieldTrajectory field;
    std::vector<DiagnosticsRecord> diagnostics;
    double mass0 = 0;
    double energy0 = 0;
};

/// Strang splitting: field half step with frozen density, density full step
/// with the field frozen at the half-step value, field half step. Emits
/// diagnostics at the configured cadence. Errors from the sub-integrators are
/// rethrown with the step index attached.
Trajectory run_coupled(const SimConfig& cfg);

/// The constructive fixed-point iteration: starting from the constant-in-time
/// seed field phi_0 = phi_in, alternately solve the linear density problem in
/// the previous field and the field equation driven by the new density, on
/// [0, T]. Returns every iterate plus the successive differences
/// sup_t |phi_{k+1} - phi_k| and the final-time L2 density differences.
struct FixedPointResult {
    std::vector<Trajectory> iterates;
    std::vector<double> phi_diffs;
    std::vector<double> f_diffs;
};

FixedPointResult run_fixed_point(const SimConfig& cfg, int n_iter, double T);

/// max over records of |E(t) - E(0) - 3 M tau(t)|.
double energy_identity_residual(const Trajectory& traj);

}  // namespace vnfp
