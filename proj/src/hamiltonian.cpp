#include "darklattice/hamiltonian.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>

#include "darklattice/greens.hpp"

namespace darklattice {

EffectiveHamiltonian build_scalar(const std::vector<Vec3>& pos, const CVec3& p)
{
    const auto n = static_cast<Eigen::Index>(pos.size());
    if (n < 1)
        throw HamiltonianError("build_scalar: no sites");
    EffectiveHamiltonian H;
    H.variant = Variant::Scalar;
    H.matrix.resize(n, n);
    H.basis.resize(n);
    const cplx self = -0.5 * I * p.squaredNorm();
    for (Eigen::Index j = 0; j < n; ++j) {
        H.basis[j].site = static_cast<int>(j);
        H.matrix(j, j) = self;
        for (Eigen::Index k = 0; k < j; ++k) {
            const Vec3 r = pos[j] - pos[k];
            if (r.norm() == 0.0)
                throw HamiltonianError("build_scalar: duplicate atom positions");
            const cplx v = -0.5 * I * scalar_green(r, p);
            H.matrix(j, k) = v;
            H.matrix(k, j) = v;
        }
    }
    return H;
}

EffectiveHamiltonian build_scalar(const std::vector<Vec3>& pos)
{
    const auto n = static_cast<Eigen::Index>(pos.size());
    if (n < 1)
        throw HamiltonianError("build_scalar: no sites");
    EffectiveHamiltonian H;
    H.variant = Variant::Scalar;
    H.matrix.resize(n, n);
    H.basis.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        H.basis[j].site = static_cast<int>(j);
        H.matrix(j, j) = -0.5 * I;
        for (Eigen::Index k = 0; k < j; ++k) {
            const Vec3 r = pos[j] - pos[k];
            if (r.norm() == 0.0)
                throw HamiltonianError("build_scalar: duplicate atom positions");
            const cplx v = -0.5 * I * scalar_green(r);
            H.matrix(j, k) = v;
            H.matrix(k, j) = v;
        }
    }
    return H;
}

EffectiveHamiltonian build_scalar(const std::vector<AtomSite>& sites)
{
    return build_scalar(positions(sites));
}

bool is_mirror_symmetric(const std::vector<Vec3>& pos, double tol)
{
    if (pos.size() % 2 != 0)
        return false;
    const std::size_t n = pos.size() / 2;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3& a = pos[j];
        const Vec3& b = pos[j + n];
        if (std::abs(a.x() - b.x()) > tol || std::abs(a.y() - b.y()) > tol || std::abs(a.z() + b.z()) > tol)
            return false;
    }
    return true;
}

std::pair<CMatrix, CMatrix> parity_blocks(const EffectiveHamiltonian& H, const std::vector<Vec3>& pos)
{
    if (H.variant != Variant::Scalar || static_cast<std::size_t>(H.dim()) != pos.size())
        throw HamiltonianError("parity_blocks: expects a scalar Hamiltonian over the given sites");
    if (!is_mirror_symmetric(pos))
        throw HamiltonianError("parity_blocks: geometry is not mirror symmetric");
    const Eigen::Index n = H.dim() / 2;
    return {H.matrix.topLeftCorner(n, n), H.matrix.topRightCorner(n, n)};
}

EffectiveHamiltonian add_detuning(const EffectiveHamiltonian& H, const std::vector<Vec3>& pos,
                                  double d1, double d2)
{
    if (H.variant != Variant::Scalar)
        throw HamiltonianError("add_detuning: scalar variant only");
    EffectiveHamiltonian out = H;
    for (Eigen::Index j = 0; j < out.dim(); ++j) {
        const Vec3& r = pos[out.basis[j].site];
        out.matrix(j, j) += r.z() < 0.0 ? d1 : d2;
    }
    return out;
}

DefectMask sample_defects(int num_sites, double p, std::uint64_t seed)
{
    DefectMask mask;
    mask.probability = p;
    mask.seed = seed;
    std::mt19937_64 rng(seed);
    for (int j = 0; j < num_sites; ++j) {
        // 53-bit uniform in [0,1); spelled out so the stream is portable.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < p)
            mask.missing.push_back(j);
    }
    return mask;
}

EffectiveHamiltonian apply_defects(const EffectiveHamiltonian& H, const DefectMask& mask)
{
    if (mask.missing.empty())
        return H;
    std::vector<char> gone(H.basis.size(), 0);
    for (int s : mask.missing) {
        for (std::size_t b = 0; b < H.basis.size(); ++b)
            if (H.basis[b].site == s || H.basis[b].second == s)
                gone[b] = 1;
    }
    std::vector<Eigen::Index> keep;
    for (std::size_t b = 0; b < H.basis.size(); ++b)
        if (!gone[b])
            keep.push_back(static_cast<Eigen::Index>(b));
    if (keep.empty())
        throw HamiltonianError("apply_defects: every site is missing");

    EffectiveHamiltonian out;
    out.variant = H.variant;
    const auto m = static_cast<Eigen::Index>(keep.size());
    out.matrix.resize(m, m);
    for (Eigen::Index c = 0; c < m; ++c)
        for (Eigen::Index r = 0; r < m; ++r)
            out.matrix(r, c) = H.matrix(keep[r], keep[c]);
    for (auto k : keep)
        out.basis.push_back(H.basis[k]);
    return out;
}

EffectiveHamiltonian build_vector(const std::vector<Vec3>& pos)
{
    const auto n = static_cast<Eigen::Index>(pos.size());
    if (n < 1)
        throw HamiltonianError("build_vector: no sites");
    EffectiveHamiltonian H;
    H.variant = Variant::Vector;
    H.matrix.resize(3 * n, 3 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (int a = 0; a < 3; ++a)
            H.basis.push_back(BasisLabel{static_cast<int>(j), a, -1});
        for (Eigen::Index k = 0; k <= j; ++k) {
            const Vec3 r = pos[j] - pos[k];
            if (j != k && r.norm() == 0.0)
                throw HamiltonianError("build_vector: duplicate atom positions");
            const Eigen::Matrix3cd blk = -0.5 * I * dyadic_green(r);
            H.matrix.block<3, 3>(3 * j, 3 * k) = blk;
            H.matrix.block<3, 3>(3 * k, 3 * j) = blk.transpose();
        }
    }
    return H;
}

namespace {

// Matrix element between pair states (j<k) and (l<m).
inline cplx pair_element(const CMatrix& h, int j, int k, int l, int m)
{
    cplx v = 0.0;
    if (k == m)
        v += h(j, l);
    if (k == l)
        v += h(j, m);
    if (j == m)
        v += h(k, l);
    if (j == l)
        v += h(k, m);
    return v;
}

void check_two_excitation(const EffectiveHamiltonian& H)
{
    if (H.variant != Variant::Scalar)
        throw HamiltonianError("two-excitation builder expects a scalar Hamiltonian");
    if (H.dim() < 2)
        throw HamiltonianError("two-excitation sector needs at least two sites");
    if (H.dim() > kMaxTwoExcitationAtoms)
        throw HamiltonianError("two-excitation dense build capped at 80 atoms");
}

} // namespace

EffectiveHamiltonian build_two_excitation(const EffectiveHamiltonian& H)
{
    check_two_excitation(H);
    const int n = static_cast<int>(H.dim());
    std::vector<std::pair<int, int>> pairs;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
            pairs.emplace_back(j, k);

    const auto np = static_cast<Eigen::Index>(pairs.size());
    EffectiveHamiltonian out;
    out.variant = Variant::TwoExcitation;
    out.matrix = CMatrix::Zero(np, np);
    std::map<std::pair<int, int>, Eigen::Index> index;
    for (Eigen::Index a = 0; a < np; ++a) {
        index[pairs[a]] = a;
        out.basis.push_back(BasisLabel{H.basis[pairs[a].first].site, -1, H.basis[pairs[a].second].site});
    }
    // Only pairs sharing a site couple; enumerate them directly.
    for (Eigen::Index a = 0; a < np; ++a) {
        const auto [j, k] = pairs[a];
        for (int l = 0; l < n; ++l) {
            for (int keep : {j, k}) {
                if (l == keep)
                    continue;
                const auto key = std::minmax(l, keep);
                const Eigen::Index b = index.at({key.first, key.second});
                if (b < a)
                    continue;
                const cplx v = pair_element(H.matrix, j, k, key.first, key.second);
                out.matrix(a, b) = v;
                out.matrix(b, a) = pair_element(H.matrix, key.first, key.second, j, k);
            }
        }
    }
    return out;
}

EffectiveHamiltonian build_two_excitation_even(const EffectiveHamiltonian& H)
{
    check_two_excitation(H);
    const int n2 = static_cast<int>(H.dim());
    if (n2 % 2 != 0)
        throw HamiltonianError("mirror-even sector needs an even number of sites");
    const int half = n2 / 2;
    auto mirror = [half](int j) { return j < half ? j + half : j - half; };
    auto canon = [](int a, int b) { return std::pair<int, int>(std::min(a, b), std::max(a, b)); };

    // Orbit representatives: the lexicographically smaller of P and mirror(P).
    std::vector<std::pair<int, int>> reps;
    std::vector<double> weight;  // 1/sqrt(orbit size)
    for (int j = 0; j < n2; ++j) {
        for (int k = j + 1; k < n2; ++k) {
            const auto p = std::pair<int, int>(j, k);
            const auto mp = canon(mirror(j), mirror(k));
            if (mp < p)
                continue;
            reps.push_back(p);
            weight.push_back(mp == p ? 1.0 : std::sqrt(0.5));
        }
    }
    const auto ne = static_cast<Eigen::Index>(reps.size());
    EffectiveHamiltonian out;
    out.variant = Variant::TwoExcitation;
    out.matrix.resize(ne, ne);
    for (Eigen::Index a = 0; a < ne; ++a)
        out.basis.push_back(BasisLabel{reps[a].first, -1, reps[a].second});

    const CMatrix& h = H.matrix;
    for (Eigen::Index b = 0; b < ne; ++b) {
        const auto [l, m] = reps[b];
        const auto mq = canon(mirror(l), mirror(m));
        const bool q_self = mq == reps[b];
        for (Eigen::Index a = 0; a < ne; ++a) {
            const auto [j, k] = reps[a];
            const auto mp = canon(mirror(j), mirror(k));
            const bool p_self = mp == reps[a];
            // <P+mP| H |Q+mQ> with mirror invariance of H:
            // = 2 (H_PQ + H_P,mQ) for distinct orbits, fewer terms for self-orbits.
            cplx v = pair_element(h, j, k, l, m);
            if (!q_self)
                v += pair_element(h, j, k, mq.first, mq.second);
            if (!p_self) {
                v += pair_element(h, mp.first, mp.second, l, m);
                if (!q_self)
                    v += pair_element(h, mp.first, mp.second, mq.first, mq.second);
            }
            out.matrix(a, b) = v * weight[a] * weight[b];
        }
    }
    return out;
}

void dump_matrix_csv(const CMatrix& M, const std::string& path)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f)
        throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "row,col,re,im\n");
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c)
            std::fprintf(f, "%lld,%lld,%.17g,%.17g\n", static_cast<long long>(r), static_cast<long long>(c),
                         M(r, c).real(), M(r, c).imag());
    std::fclose(f);
}

} // namespace darklattice
