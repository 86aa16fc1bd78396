#include "darklattice/greens.hpp"

#include <cmath>
#include <stdexcept>

namespace darklattice {

CVec3 circular_polarization()
{
    return CVec3(1.0, I, 0.0) / std::sqrt(2.0);
}

namespace {

// Prefactor and the two radial coefficients of the closed form:
// G = pref * (a * 1 + b * rhat rhat).
struct GreenCoeffs {
    cplx a, b;
};

GreenCoeffs green_coeffs(double r)
{
    const double kr = k0 * r;
    const cplx pref = 3.0 * std::polar(1.0, kr) / (2.0 * I * kr * kr * kr);
    return {pref * cplx(kr * kr - 1.0, kr), pref * cplx(3.0 - kr * kr, -3.0 * kr)};
}

} // namespace

GreenTensor dyadic_green(const Vec3& r)
{
    const double d = r.norm();
    if (d == 0.0)
        return GreenTensor::Identity();
    const Vec3 rh = r / d;
    const auto [a, b] = green_coeffs(d);
    return a * GreenTensor::Identity() + b * (rh * rh.transpose()).cast<cplx>();
}

cplx scalar_green(const Vec3& r, const CVec3& p)
{
    const double d = r.norm();
    if (d == 0.0)
        return p.squaredNorm();
    const Vec3 rh = r / d;
    const auto [a, b] = green_coeffs(d);
    const cplx pr = rh.cast<cplx>().dot(p);  // conj(rhat) . p, rhat real
    return a * p.squaredNorm() + b * std::norm(pr);
}

cplx scalar_green(const Vec3& r)
{
    const double d = r.norm();
    if (d == 0.0)
        return 1.0;
    const auto [a, b] = green_coeffs(d);
    const double rho2 = r.x() * r.x() + r.y() * r.y();
    return a + b * (0.5 * rho2 / (d * d));
}

cplx paraxial_green(const Vec3& r)
{
    const double z = std::abs(r.z());
    if (z == 0.0)
        throw std::domain_error("paraxial Green's function is singular at z = 0");
    const double rho2 = r.x() * r.x() + r.y() * r.y();
    return k0 / (2.0 * kPi * I * z) * std::polar(1.0, k0 * (z + 0.5 * rho2 / z));
}

} // namespace darklattice
