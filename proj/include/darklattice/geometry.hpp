#pragma once

#include <stdexcept>
#include <vector>

#include "darklattice/types.hpp"

namespace darklattice {

enum class Curvature { Flat, Gaussian };

struct LatticeSpec {
    int n_perp = 2;
    double spacing = 0.5;
    double separation = 1.0;
    Curvature curvature = Curvature::Flat;
    double waist = 0.0;  // only used for Gaussian curvature

    double l_perp() const { return n_perp * spacing; }
    int sites_per_array() const { return n_perp * n_perp; }
    int num_sites() const { return 2 * n_perp * n_perp; }
    void validate() const;

    static LatticeSpec flat(int n, double spacing, double separation);
    static LatticeSpec curved(int n, double spacing, double separation, double waist);
};

// Site indices are 1-based as in (j_x, j_y, j_z).
struct AtomSite {
    int jx = 1, jy = 1, jz = 1;
    Vec3 pos = Vec3::Zero();
};

struct GaussianMode {
    double waist = 1.0;

    double rayleigh() const { return kPi * waist * waist; }
    double width(double z) const;
    // Inverse radius of curvature, so that z = 0 is regular.
    double inv_radius(double z) const;
    double gouy(int j, int k, double z) const;
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ordering: j_x major, then j_y, array 1 (z < 0) first.
std::vector<AtomSite> build_arrays(const LatticeSpec& spec);

// Phase mismatch of the curved-array condition for a site; zero for exact roots.
double curvature_residual(const AtomSite& site, const LatticeSpec& spec);

double hermite(int n, double x);
cplx tem_mode(int j, int k, const GaussianMode& mode, const Vec3& r);

// E(r) = TEM00(r) exp(i k0 z), the mode that fixes the array curvature.
cplx mode_field(const GaussianMode& mode, const Vec3& r);

double gouy_mismatch(int j, int k, double L, double z_r);

std::vector<Vec3> positions(const std::vector<AtomSite>& sites);

} // namespace darklattice
