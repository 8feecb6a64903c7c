#pragma once
// Reference routes for the tests, deliberately independent of the library:
// the defining Bessel series in extended precision, Gauss-Kronrod quadrature
// from Boost, and dense eigendecompositions from Eigen. The constants were
// frozen from a 50-digit arbitrary-precision computation.
#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "vnfp/linalg.hpp"

namespace oracle {

/// I_nu(x) summed straight from the defining series in long double.
inline long double bessel_series(int nu, long double x)
{
    const long double half = x / 2;
    long double term = 1.0L;
    for (int k = 1; k <= nu; ++k)
        term *= half / k;
    long double sum = term;
    const long double r2 = half * half;
    for (int k = 1; k < 500; ++k) {
        term *= r2 / (static_cast<long double>(k) * (k + nu));
        sum += term;
        if (term < sum * 1e-25L)
            break;
    }
    return sum;
}

template <class F>
double integrate(F f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 12,
                                                                         1e-12);
}

inline Eigen::Matrix3d to_eigen(const vnfp::Mat3& m)
{
    Eigen::Matrix3d e;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            e(r, c) = m(r, c);
    return e;
}

/// Sorted eigenvalues of a symmetric 3x3.
inline Eigen::Vector3d sym_eigenvalues(const vnfp::Mat3& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(m));
    return es.eigenvalues();
}

// Frozen high-precision constants.
inline constexpr double kI1At2 = 1.590636854637329063;
inline constexpr double kI2At2 = 0.688948447698738204;
inline constexpr double kI2At1 = 0.135747669767038281;
inline constexpr double kScaledI2At2 = 0.09323903330473338037;
inline constexpr double kScaledI2At1 = 0.049938776894223539;
inline constexpr double kScaledI1At50 = 0.05599312389289540;
inline constexpr double kScaledI1At15 = 0.100374175045166655;
inline constexpr double kScaledI2At15 = 0.090516308109467167;
inline constexpr double kScaledI1At700 = 0.015070519444716847;
inline constexpr double kSourceExpPhi0 = 9.8552045430507273;  // H for f = e^{-q}, phi = 0
inline constexpr double kKineticExpPhi0 = 80.8078118359111353;
inline constexpr double kMassExp = 25.1327412287183459;  // 8 pi

}  // namespace oracle
