#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "darklattice/geometry.hpp"
#include "darklattice/hamiltonian.hpp"

namespace darklattice {

struct EigenMode {
    cplx eps{0.0, 0.0};
    CVector vector;  // unit 2-norm, largest component real positive
    int parity = 0;  // +1, -1, or 0 when not mirror-definite
    double qbar = std::numeric_limits<double>::quiet_NaN();
    double ipr = std::numeric_limits<double>::quiet_NaN();
    double overlap = std::numeric_limits<double>::quiet_NaN();

    double rate() const { return -2.0 * eps.imag(); }
    double shift() const { return eps.real(); }
};

// Complete eigendecomposition, sorted by ascending decay rate.
std::vector<EigenMode> diagonalize(const EffectiveHamiltonian& H);
std::vector<EigenMode> diagonalize(const CMatrix& H);

// Eigenmodes of H through the blocks H0 +/- H1; vectors are returned on the
// full 2N-site basis and carry their parity.
std::vector<EigenMode> diagonalize_parity(const EffectiveHamiltonian& H, const std::vector<Vec3>& pos);

// |q|-weighted mean over the 2D DFT of a single-array vector (normalized inside).
double quasi_momentum(const CVector& v, int n_perp, double spacing);

// sum |v|^4 of the normalized single-array vector.
double inverse_participation(const CVector& v);

// |sum_j E(r_j) conj(v_j)|^2 / sum_j |E(r_j)|^2 over array-1 sites.
double gaussian_overlap(const CVector& v, const GaussianMode& mode, const std::vector<AtomSite>& sites);

// Array-1 half of a full-basis vector.
CVector array_half(const CVector& v);

// Fills parity (when undetermined), qbar, ipr and overlap. For flat arrays the
// overlap reference is the uniform profile (the w0 -> infinity limit).
void classify(std::vector<EigenMode>& modes, const LatticeSpec& spec, const std::vector<AtomSite>& sites);

struct DarkBrightPair {
    EigenMode dark;
    EigenMode bright;
    double ratio = 0.0;
    double shift = 0.0;
    bool ambiguous = false;
};

DarkBrightPair find_dark_bright(const std::vector<EigenMode>& modes);

// Build, parity-diagonalize, classify and select for one geometry.
DarkBrightPair dark_bright(const LatticeSpec& spec);

struct WaistOptimum {
    double waist = 0.0;
    DarkBrightPair pair;
    bool at_lower = false;
    bool at_upper = false;
};

// Minimizes gamma_d/gamma_b over w0 in [lo, hi]; hi <= 0 means L_perp.
WaistOptimum optimize_waist(const LatticeSpec& tmpl, double lo = 0.5, double hi = 0.0, int jobs = 1);

struct DefectStats {
    double mean_dark = 0.0, stderr_dark = 0.0;
    double mean_bright = 0.0, stderr_bright = 0.0;
    int realizations = 0;
    int resampled = 0;
    std::vector<double> dark_rates, bright_rates;
};

DefectStats defect_monte_carlo(const LatticeSpec& spec, double p, int realizations, std::uint64_t seed,
                               int jobs = 1);

struct TwoExcitationResult {
    double exact = std::numeric_limits<double>::quiet_NaN();  // per-excitation rate
    double perturbative = 0.0;
    double rayleigh = 0.0;      // per-excitation rate of the product state
    double gamma_d = 0.0;
    double ipr = 0.0;
    double overlap = 0.0;       // |<target|selected>| of the chosen eigenstate
    Eigen::Index dim = 0;
    bool refined = false;       // true when the iterative path was used
};

double two_excitation_perturbative(double gamma_d, double p);

// Normalized (sigma_v^+)^2 |G> on the pair basis of H2 (full or mirror-even).
CVector pair_product_state(const CVector& v, const EffectiveHamiltonian& H2, int num_sites);

// psi^H M psi / psi^H psi
cplx rayleigh_quotient(const CMatrix& M, const CVector& psi);

// Two-excitation action on a symmetric amplitude matrix (zero diagonal).
CMatrix apply_two_excitation(const CMatrix& H, const CMatrix& psi);

TwoExcitationResult two_excitation_rate(const LatticeSpec& spec, bool exact = true);

struct FourLevelPair {
    EigenMode dark[2];    // degenerate in-plane dark pair
    EigenMode bright[2];  // degenerate in-plane bright pair
    double dark_splitting = 0.0;    // |eps_0 - eps_1| within each pair
    double bright_splitting = 0.0;
    double inplane_dark = 0.0;      // smallest in-plane weight of the pair members
    double inplane_bright = 0.0;
};

// Vector-dipole (four-level) model: the four in-plane modes of lowest
// quasi-momentum, split by decay rate into a dark and a bright pair.
FourLevelPair four_level_dark_bright(const LatticeSpec& spec);

// psi(r) = sum_j c_j p^* . G(r - r_j) . p; rejects points within 1e-3 of an atom.
CVector field_profile(const CVector& c, const std::vector<Vec3>& pos, const std::vector<Vec3>& grid,
                      const CVec3& p);

} // namespace darklattice
