#pragma once

#include "darklattice/types.hpp"

namespace darklattice {

using GreenTensor = Eigen::Matrix3cd;

// Circular polarization (x + i y)/sqrt(2).
CVec3 circular_polarization();

// Free-space dyadic Green's tensor in units where G(0) is the identity.
GreenTensor dyadic_green(const Vec3& r);

// p^* . G(r) . p
cplx scalar_green(const Vec3& r, const CVec3& p);
cplx scalar_green(const Vec3& r);  // circular polarization

// Paraxial propagator; throws std::domain_error for z == 0.
cplx paraxial_green(const Vec3& r);

} // namespace darklattice
