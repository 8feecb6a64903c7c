#pragma once

namespace vnfp {

/// Orders of the modified Bessel functions needed by the radial heat kernel.
enum class BesselOrder : int { i1 = 1, i2 = 2 };

/// Modified Bessel function of the first kind I_nu(x) for nu in {1,2}, x >= 0.
/// Power series up to the crossover x = 15, asymptotic expansion beyond.
/// Throws std::overflow_error once e^x is not representable in double;
/// use bessel_i_scaled there.
double bessel_i(BesselOrder order, double x);

/// Exponentially scaled variant e^{-x} I_nu(x), finite for every x >= 0 and
/// asymptotically ~ 1/sqrt(2 pi x).
double bessel_i_scaled(BesselOrder order, double x);

}  // namespace vnfp
