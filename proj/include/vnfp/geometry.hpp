#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vnfp/linalg.hpp"

namespace vnfp {

/// Momentum point with cached norm; build through make() to keep q = |p|.
struct MomentumPoint {
    Vec3 p;
    double q = 0;

    static MomentumPoint make(const Vec3& p) { return {p, p.norm()}; }
};

/// Field value with cached conformal factor e^{2 phi}.
struct FieldValue {
    double phi = 0;
    double exp2phi = 1;

    static FieldValue make(double phi) { return {phi, std::exp(2.0 * phi)}; }
};

/// Every tensor derived from the diffusion matrix at one (phi, p) point.
/// Index convention: dD[k](i,j) = d_k D^{ij}, d2D[k][l](i,j) = d_l d_k D^{ij}.
struct DiffusionTensors {
    Mat3 D;
    std::array<Mat3, 3> dD{};
    std::array<std::array<Mat3, 3>, 3> d2D{};
    Mat3 lapD;
    Mat3 A;
    Mat3 B;
    Vec3 drift;
    Mat3 noise;
};

/// D^{ij} = (e^{2phi} delta^{ij} + p^i p^j) / sqrt(e^{2phi} + |p|^2);
/// symmetric positive definite, operator norm sqrt(e^{2phi} + |p|^2).
Mat3 diffusion_matrix(const FieldValue& fv, const MomentumPoint& mp);

/// Full bundle: D, first/second derivatives, Laplacian, the auxiliary
/// matrices A and B, drift and noise, sharing one evaluation of the
/// subexpression s = sqrt(e^{2phi} + |p|^2).
DiffusionTensors diffusion_derivatives(const FieldValue& fv, const MomentumPoint& mp);

/// d^i = 3 e^{2phi} p^i / sqrt(e^{2phi} + |p|^2); equals e^{2phi} times the
/// row divergence of D.
Vec3 drift_vector(const FieldValue& fv, const MomentumPoint& mp);

/// Symmetric positive definite G with G G^T = 2 e^{2phi} D.
Mat3 noise_matrix(const FieldValue& fv, const MomentumPoint& mp);

/// Drift and noise in one pass; the Monte Carlo inner loop calls this.
void sde_coefficients(const FieldValue& fv, const MomentumPoint& mp, Vec3& drift, Mat3& noise);

/// Jacobian J(j,k) = d_k (div D)^j of the row divergence (div D)^j = 3 p^j / s.
Mat3 div_diffusion_jacobian(const FieldValue& fv, const MomentumPoint& mp);

/// Hessian H[j](k,l) = d_l d_k (div D)^j.
std::array<Mat3, 3> div_diffusion_hessian(const FieldValue& fv, const MomentumPoint& mp);

/// Gradient of the noise matrix, dG[k](i,j) = d_k G^{ij}.
std::array<Mat3, 3> noise_jacobian(const FieldValue& fv, const MomentumPoint& mp);

/// One certified inequality from the derivative-bound sweep.
struct BoundReport {
    std::string name;
    double observed = 0;  // worst ratio seen over the sweep
    double limit = 0;     // frozen constant the ratio must stay under
    bool ok = false;
};

/// Deterministic sweep over phi in [-10, 2], |p| in [0, 100] checking the
/// uniform derivative bounds and the factorization G G^T = 2 e^{2phi} D.
/// The limits are empirical constants frozen against this sampler.
std::vector<BoundReport> certify_bounds(int n_samples, std::uint64_t seed);

}  // namespace vnfp
