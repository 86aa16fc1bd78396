#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace darklattice {

// Lengths are measured in units of the transition wavelength, rates in units
// of the single-atom decay rate.
using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double k0 = 2.0 * kPi;
inline constexpr cplx I{0.0, 1.0};

} // namespace darklattice
