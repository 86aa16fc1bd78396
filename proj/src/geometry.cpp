#include "darklattice/geometry.hpp"

#include <cmath>
#include <sstream>

namespace darklattice {

void LatticeSpec::validate() const
{
    if (n_perp < 2)
        throw GeometryError("n_perp must be >= 2");
    if (!(spacing > 0.0))
        throw GeometryError("spacing must be positive");
    if (!(separation > 0.0))
        throw GeometryError("separation must be positive");
    if (curvature == Curvature::Gaussian && !(waist > 0.0))
        throw GeometryError("waist must be positive for Gaussian curvature");
}

LatticeSpec LatticeSpec::flat(int n, double spacing, double separation)
{
    return LatticeSpec{n, spacing, separation, Curvature::Flat, 0.0};
}

LatticeSpec LatticeSpec::curved(int n, double spacing, double separation, double waist)
{
    return LatticeSpec{n, spacing, separation, Curvature::Gaussian, waist};
}

double GaussianMode::width(double z) const
{
    const double u = z / rayleigh();
    return waist * std::sqrt(1.0 + u * u);
}

double GaussianMode::inv_radius(double z) const
{
    const double zr = rayleigh();
    return z / (z * z + zr * zr);
}

double GaussianMode::gouy(int j, int k, double z) const
{
    return (j + k + 1) * std::atan(z / rayleigh());
}

namespace {

// Phase of E(r) on a transverse ring of radius^2 rho2 at height z > 0,
// measured against the target k0*L/2.
struct PhaseCondition {
    double rho2, zr, target;

    double f(double z) const
    {
        return k0 * z + 0.5 * k0 * rho2 * z / (z * z + zr * zr) - std::atan(z / zr) - target;
    }
    double df(double z) const
    {
        const double s = z * z + zr * zr;
        return k0 + 0.5 * k0 * rho2 * (zr * zr - z * z) / (s * s) - zr / s;
    }
};

double solve_curved_z(double rho2, const LatticeSpec& spec)
{
    const double half = 0.5 * spec.separation;
    const double zr = kPi * spec.waist * spec.waist;
    const PhaseCondition cond{rho2, zr, k0 * half};

    const double lp2 = spec.l_perp() * spec.l_perp();
    double width = std::max(lp2 / spec.separation, 0.5);
    double lo = std::max(half - width, 1e-12), hi = half + width;
    for (int expand = 0; cond.f(lo) > 0.0 || cond.f(hi) < 0.0; ++expand) {
        if (expand > 40) {
            std::ostringstream msg;
            msg << "curved-array root not bracketed (w0=" << spec.waist << ", rho^2=" << rho2 << ")";
            throw GeometryError(msg.str());
        }
        width *= 2.0;
        lo = std::max(half - width, 1e-12);
        hi = half + width;
    }

    for (int it = 0; it < 200 && hi - lo > 1e-6; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cond.f(mid) > 0.0 ? hi : lo) = mid;
    }
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        const double step = cond.f(z) / cond.df(z);
        double next = z - step;
        if (next < lo || next > hi)
            next = 0.5 * (lo + hi);
        (cond.f(next) > 0.0 ? hi : lo) = next;
        z = next;
        if (std::abs(step) < 1e-15 * std::max(1.0, z))
            break;
    }
    if (std::abs(cond.f(z)) > 1e-10)
        throw GeometryError("curved-array root solve did not converge");
    return z;
}

} // namespace

std::vector<AtomSite> build_arrays(const LatticeSpec& spec)
{
    spec.validate();
    const int n = spec.n_perp;
    const double c = 0.5 * (n - 1);
    std::vector<AtomSite> sites(spec.num_sites());

    for (int ix = 0; ix < n; ++ix) {
        for (int iy = 0; iy < n; ++iy) {
            const double x = spec.spacing * (ix - c);
            const double y = spec.spacing * (iy - c);
            double z = 0.5 * spec.separation;
            if (spec.curvature == Curvature::Gaussian)
                z = solve_curved_z(x * x + y * y, spec);

            const int idx = ix * n + iy;
            sites[idx] = AtomSite{ix + 1, iy + 1, 1, Vec3(x, y, -z)};
            sites[idx + n * n] = AtomSite{ix + 1, iy + 1, 2, Vec3(x, y, z)};
        }
    }
    return sites;
}

double curvature_residual(const AtomSite& site, const LatticeSpec& spec)
{
    const double z = site.pos.z();
    const double sign = site.jz == 2 ? 1.0 : -1.0;
    if (spec.curvature == Curvature::Flat)
        return z - sign * 0.5 * spec.separation;
    const GaussianMode mode{spec.waist};
    const double rho2 = site.pos.x() * site.pos.x() + site.pos.y() * site.pos.y();
    const double lhs = k0 * z + 0.5 * k0 * rho2 * mode.inv_radius(z) - mode.gouy(0, 0, z);
    return lhs - sign * 0.5 * k0 * spec.separation;
}

double hermite(int n, double x)
{
    if (n == 0)
        return 1.0;
    double hm = 1.0, h = 2.0 * x;
    for (int m = 1; m < n; ++m) {
        const double next = 2.0 * x * h - 2.0 * m * hm;
        hm = h;
        h = next;
    }
    return h;
}

cplx tem_mode(int j, int k, const GaussianMode& mode, const Vec3& r)
{
    const double w = mode.width(r.z());
    const double x = r.x(), y = r.y();
    const double rho2 = x * x + y * y;
    const double norm = std::sqrt(2.0 / (kPi * w * w)
        / (std::ldexp(1.0, j + k) * std::tgamma(j + 1.0) * std::tgamma(k + 1.0)));
    const double amp = norm * hermite(j, std::sqrt(2.0) * x / w) * hermite(k, std::sqrt(2.0) * y / w)
        * std::exp(-rho2 / (w * w));
    const double phase = 0.5 * k0 * rho2 * mode.inv_radius(r.z()) - mode.gouy(j, k, r.z());
    return amp * std::polar(1.0, phase);
}

cplx mode_field(const GaussianMode& mode, const Vec3& r)
{
    return tem_mode(0, 0, mode, r) * std::polar(1.0, k0 * r.z());
}

double gouy_mismatch(int j, int k, double L, double z_r)
{
    return 2.0 * (j + k) * std::atan(L / (2.0 * z_r));
}

std::vector<Vec3> positions(const std::vector<AtomSite>& sites)
{
    std::vector<Vec3> out;
    out.reserve(sites.size());
    for (const auto& s : sites)
        out.push_back(s.pos);
    return out;
}

} // namespace darklattice
