#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "darklattice/geometry.hpp"

namespace darklattice {

enum class Variant { Scalar, Vector, TwoExcitation };

// Basis label: a site index; for the vector variant also a dipole axis
// (0,1,2 = x,y,z); for the two-excitation variant the second site of the pair.
struct BasisLabel {
    int site = 0;
    int axis = -1;
    int second = -1;
};

struct EffectiveHamiltonian {
    CMatrix matrix;
    std::vector<BasisLabel> basis;
    Variant variant = Variant::Scalar;

    Eigen::Index dim() const { return matrix.rows(); }
};

class HamiltonianError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

EffectiveHamiltonian build_scalar(const std::vector<Vec3>& pos, const CVec3& p);
EffectiveHamiltonian build_scalar(const std::vector<Vec3>& pos);  // circular polarization
EffectiveHamiltonian build_scalar(const std::vector<AtomSite>& sites);

// Verifies the first half of the sites is the z-mirror image of the second half.
bool is_mirror_symmetric(const std::vector<Vec3>& pos, double tol = 1e-9);

// Within-array (H0) and cross-array (H1) blocks of a mirror-symmetric system.
std::pair<CMatrix, CMatrix> parity_blocks(const EffectiveHamiltonian& H, const std::vector<Vec3>& pos);

// Adds d1 to array-1 sites and d2 to array-2 sites (array from the z sign of pos).
EffectiveHamiltonian add_detuning(const EffectiveHamiltonian& H, const std::vector<Vec3>& pos,
                                  double d1, double d2);

struct DefectMask {
    std::vector<int> missing;  // sorted site indices
    double probability = 0.0;
    std::uint64_t seed = 0;
};

// Independent Bernoulli(p) removal of each site, deterministic in the seed.
DefectMask sample_defects(int num_sites, double p, std::uint64_t seed);

// Deletes rows/columns of missing sites; basis labels keep original site ids.
EffectiveHamiltonian apply_defects(const EffectiveHamiltonian& H, const DefectMask& mask);

// 3x3 blocks -(i/2) G_ab(r_j - r_j'), axis order x, y, z.
EffectiveHamiltonian build_vector(const std::vector<Vec3>& pos);

inline constexpr int kMaxTwoExcitationAtoms = 80;

// Pairs (j < k) in lexicographic order.
EffectiveHamiltonian build_two_excitation(const EffectiveHamiltonian& H);

// Mirror-even sector of the two-excitation space for a mirror-symmetric
// system of 2N sites (site j <-> j + N). Basis: orbits {P, mirror(P)},
// normalized symmetric combinations; the label stores the representative.
EffectiveHamiltonian build_two_excitation_even(const EffectiveHamiltonian& H);

// Writes "row,col,re,im" lines (17 significant digits).
void dump_matrix_csv(const CMatrix& M, const std::string& path);

} // namespace darklattice
