#include "darklattice/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "darklattice/greens.hpp"
#include "darklattice/linalg.hpp"
#include "darklattice/parallel.hpp"
#include "darklattice/seeding.hpp"

namespace darklattice {

namespace {

void fix_gauge(CVector& v)
{
    const double nrm = v.norm();
    if (nrm == 0.0)
        return;
    v /= nrm;
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // Ties resolved toward the lowest index, with a tolerance so that
        // degenerate magnitudes (mirror partners) pick deterministically.
        const double a = std::abs(v[i]);
        if (a > best * (1.0 + 1e-12)) {
            best = a;
            imax = i;
        }
    }
    v *= std::conj(v[imax]) / std::abs(v[imax]);
    v[imax] = cplx(v[imax].real(), 0.0);
}

std::vector<EigenMode> to_modes(const EigenDecomposition& d)
{
    std::vector<EigenMode> modes(static_cast<std::size_t>(d.values.size()));
    for (Eigen::Index i = 0; i < d.values.size(); ++i) {
        modes[i].eps = d.values[i];
        modes[i].vector = d.vectors.col(i);
        fix_gauge(modes[i].vector);
    }
    return modes;
}

void sort_by_rate(std::vector<EigenMode>& modes)
{
    std::stable_sort(modes.begin(), modes.end(),
                     [](const EigenMode& a, const EigenMode& b) { return a.rate() < b.rate(); });
}

} // namespace

std::vector<EigenMode> diagonalize(const CMatrix& H)
{
    auto modes = to_modes(eig(H, true));
    sort_by_rate(modes);
    return modes;
}

std::vector<EigenMode> diagonalize(const EffectiveHamiltonian& H)
{
    return diagonalize(H.matrix);
}

std::vector<EigenMode> diagonalize_parity(const EffectiveHamiltonian& H, const std::vector<Vec3>& pos)
{
    const auto [h0, h1] = parity_blocks(H, pos);
    const Eigen::Index n = h0.rows();
    std::vector<EigenMode> modes;
    modes.reserve(2 * n);
    for (int parity : {+1, -1}) {
        const auto d = eig(h0 + double(parity) * h1, true);
        for (Eigen::Index i = 0; i < n; ++i) {
            EigenMode m;
            m.eps = d.values[i];
            m.parity = parity;
            m.vector.resize(2 * n);
            m.vector.head(n) = d.vectors.col(i);
            m.vector.tail(n) = double(parity) * d.vectors.col(i);
            fix_gauge(m.vector);
            modes.push_back(std::move(m));
        }
    }
    sort_by_rate(modes);
    return modes;
}

CVector array_half(const CVector& v)
{
    return v.head(v.size() / 2);
}

double quasi_momentum(const CVector& v, int n_perp, double spacing)
{
    if (v.size() != static_cast<Eigen::Index>(n_perp) * n_perp)
        throw std::invalid_argument("quasi_momentum: vector size must be n_perp^2");
    const double lp = n_perp * spacing;
    const double nrm2 = v.squaredNorm();
    if (nrm2 == 0.0)
        return 0.0;

    std::vector<double> q(n_perp);
    CMatrix F(n_perp, n_perp);  // F(n, j) = exp(i delta q_n j)/sqrt(N), j = 1..N
    for (int a = 0; a < n_perp; ++a) {
        q[a] = -kPi / spacing + 2.0 * kPi * a / lp;
        for (int j = 0; j < n_perp; ++j)
            F(a, j) = std::polar(1.0 / std::sqrt(double(n_perp)), spacing * q[a] * (j + 1));
    }
    // v is stored j_x-major: V(jx, jy) = v[jx*N + jy].
    CMatrix V(n_perp, n_perp);
    for (int ix = 0; ix < n_perp; ++ix)
        for (int iy = 0; iy < n_perp; ++iy)
            V(ix, iy) = v[ix * n_perp + iy];
    const CMatrix Vt = F * V * F.transpose();

    double acc = 0.0;
    for (int a = 0; a < n_perp; ++a)
        for (int b = 0; b < n_perp; ++b)
            acc += std::norm(Vt(a, b)) * std::hypot(q[a], q[b]);
    return acc / nrm2;
}

double inverse_participation(const CVector& v)
{
    const double nrm2 = v.squaredNorm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += std::norm(v[i]) * std::norm(v[i]);
    return s / (nrm2 * nrm2);
}

double gaussian_overlap(const CVector& v, const GaussianMode& mode, const std::vector<AtomSite>& sites)
{
    cplx num = 0.0;
    double den = 0.0;
    Eigen::Index k = 0;
    for (const auto& s : sites) {
        if (s.jz != 1)
            continue;
        const cplx e = mode_field(mode, s.pos);
        num += e * std::conj(v[k++]);
        den += std::norm(e);
    }
    return std::norm(num) / (den * v.squaredNorm());
}

namespace {

double uniform_overlap(const CVector& v)
{
    return std::norm(v.sum()) / (double(v.size()) * v.squaredNorm());
}

int detect_parity(const CVector& v)
{
    const Eigen::Index n = v.size() / 2;
    const double scale = v.norm();
    if ((v.head(n) - v.tail(n)).norm() < 1e-6 * scale)
        return +1;
    if ((v.head(n) + v.tail(n)).norm() < 1e-6 * scale)
        return -1;
    return 0;
}

} // namespace

void classify(std::vector<EigenMode>& modes, const LatticeSpec& spec, const std::vector<AtomSite>& sites)
{
    const bool gaussian = spec.curvature == Curvature::Gaussian;
    const GaussianMode mode{spec.waist};
    for (auto& m : modes) {
        if (m.vector.size() != static_cast<Eigen::Index>(sites.size()))
            throw std::invalid_argument("classify: mode size does not match the site list");
        if (m.parity == 0)
            m.parity = detect_parity(m.vector);
        const CVector h = array_half(m.vector);
        m.qbar = quasi_momentum(h, spec.n_perp, spec.spacing);
        m.ipr = inverse_participation(h);
        m.overlap = gaussian ? gaussian_overlap(h, mode, sites) : uniform_overlap(h);
    }
}

DarkBrightPair find_dark_bright(const std::vector<EigenMode>& modes)
{
    if (modes.size() < 2)
        throw std::invalid_argument("find_dark_bright: need at least two modes");
    std::vector<std::size_t> order(modes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return modes[a].qbar < modes[b].qbar; });

    DarkBrightPair out;
    std::size_t first = order[0], second = order[1];
    if (modes.size() > 2) {
        const double q2 = modes[second].qbar;
        if (modes[order[2]].qbar <= 1.05 * q2) {
            out.ambiguous = true;
            // Overlap with the Gaussian profile breaks the tie.
            for (std::size_t i = 2; i < order.size() && modes[order[i]].qbar <= 1.05 * q2; ++i)
                if (modes[order[i]].overlap > modes[second].overlap)
                    second = order[i];
        }
    }
    const bool first_dark = modes[first].rate() <= modes[second].rate();
    out.dark = modes[first_dark ? first : second];
    out.bright = modes[first_dark ? second : first];
    out.ratio = out.dark.rate() / out.bright.rate();
    out.shift = out.dark.shift();
    return out;
}

DarkBrightPair dark_bright(const LatticeSpec& spec)
{
    const auto sites = build_arrays(spec);
    const auto pos = positions(sites);
    auto modes = diagonalize_parity(build_scalar(pos), pos);
    classify(modes, spec, sites);
    return find_dark_bright(modes);
}

WaistOptimum optimize_waist(const LatticeSpec& tmpl, double lo, double hi, int jobs)
{
    if (hi <= 0.0)
        hi = tmpl.l_perp();
    if (!(lo > 0.0) || !(hi > lo))
        throw std::invalid_argument("optimize_waist: need 0 < lo < hi");

    auto at = [&](double w) {
        LatticeSpec s = tmpl;
        s.curvature = Curvature::Gaussian;
        s.waist = w;
        return dark_bright(s);
    };

    constexpr int kGrid = 16;
    std::vector<double> ws(kGrid), ratios(kGrid);
    for (int i = 0; i < kGrid; ++i)
        ws[i] = lo + (hi - lo) * i / (kGrid - 1);
    parallel_for(kGrid, jobs, [&](int i) { ratios[i] = at(ws[i]).ratio; });
    const int best = static_cast<int>(std::min_element(ratios.begin(), ratios.end()) - ratios.begin());

    // Golden-section search on the bracket around the coarse minimum.
    double a = ws[std::max(best - 1, 0)], b = ws[std::min(best + 1, kGrid - 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = at(c).ratio, fd = at(d).ratio;
    while (b - a > 1e-3) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = at(c).ratio;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = at(d).ratio;
        }
    }
    WaistOptimum out;
    out.waist = 0.5 * (a + b);
    out.pair = at(out.waist);
    if (ratios[best] < out.pair.ratio) {
        out.waist = ws[best];
        out.pair = at(out.waist);
    }
    const double tol = 2e-3 * (hi - lo);
    out.at_lower = out.waist - lo < tol;
    out.at_upper = hi - out.waist < tol;
    return out;
}

namespace {

void mean_stderr(const std::vector<double>& x, double& mean, double& err)
{
    const double n = static_cast<double>(x.size());
    mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    err = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

Eigen::Index best_match(const std::vector<EigenMode>& modes, const CVector& target)
{
    Eigen::Index best = 0;
    double score = -1.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double s = std::abs(target.dot(modes[i].vector));
        if (s > score) {
            score = s;
            best = static_cast<Eigen::Index>(i);
        }
    }
    return best;
}

} // namespace

DefectStats defect_monte_carlo(const LatticeSpec& spec, double p, int realizations, std::uint64_t seed, int jobs)
{
    if (p < 0.0 || p > 0.5)
        throw std::invalid_argument("defect_monte_carlo: p must be in [0, 0.5]");
    if (realizations < 1)
        throw std::invalid_argument("defect_monte_carlo: need at least one realization");

    const auto sites = build_arrays(spec);
    const auto pos = positions(sites);
    const EffectiveHamiltonian H = build_scalar(pos);
    auto ideal_modes = diagonalize_parity(H, pos);
    classify(ideal_modes, spec, sites);
    const DarkBrightPair ideal = find_dark_bright(ideal_modes);
    const int n_sites = spec.num_sites();
    const int per_array = spec.sites_per_array();

    DefectStats out;
    out.realizations = realizations;
    out.dark_rates.resize(realizations);
    out.bright_rates.resize(realizations);
    std::vector<int> resampled(realizations, 0);

    parallel_for(realizations, jobs, [&](int r) {
        const std::uint64_t base = task_seed(seed, static_cast<std::uint64_t>(r));
        DefectMask mask;
        for (int attempt = 0;; ++attempt) {
            mask = sample_defects(n_sites, p, attempt == 0 ? base : task_seed(base, attempt));
            const auto lost1 = std::count_if(mask.missing.begin(), mask.missing.end(),
                                             [&](int s) { return s < per_array; });
            const auto lost2 = static_cast<long>(mask.missing.size()) - lost1;
            if (lost1 < per_array && lost2 < per_array)
                break;
            ++resampled[r];
        }
        if (mask.missing.empty()) {
            out.dark_rates[r] = ideal.dark.rate();
            out.bright_rates[r] = ideal.bright.rate();
            return;
        }
        const EffectiveHamiltonian Hd = apply_defects(H, mask);
        const auto modes = diagonalize(Hd);
        CVector vd(Hd.dim()), vb(Hd.dim());
        for (Eigen::Index k = 0; k < Hd.dim(); ++k) {
            vd[k] = ideal.dark.vector[Hd.basis[k].site];
            vb[k] = ideal.bright.vector[Hd.basis[k].site];
        }
        out.dark_rates[r] = modes[best_match(modes, vd)].rate();
        out.bright_rates[r] = modes[best_match(modes, vb)].rate();
    });

    out.resampled = std::accumulate(resampled.begin(), resampled.end(), 0);
    mean_stderr(out.dark_rates, out.mean_dark, out.stderr_dark);
    mean_stderr(out.bright_rates, out.mean_bright, out.stderr_bright);
    return out;
}

double two_excitation_perturbative(double gamma_d, double p)
{
    return 0.5 * (gamma_d * (1.0 - p) + gamma_d + p);
}

CVector pair_product_state(const CVector& v, const EffectiveHamiltonian& H2, int num_sites)
{
    const Eigen::Index full = static_cast<Eigen::Index>(num_sites) * (num_sites - 1) / 2;
    const bool even = H2.dim() != full;
    const int half = num_sites / 2;
    auto mirror = [half](int j) { return j < half ? j + half : j - half; };

    CVector psi(H2.dim());
    for (Eigen::Index a = 0; a < H2.dim(); ++a) {
        const int j = H2.basis[a].site, k = H2.basis[a].second;
        cplx amp = v[j] * v[k];
        if (even) {
            const int mj = mirror(j), mk = mirror(k);
            const bool self = std::min(mj, mk) == j && std::max(mj, mk) == k;
            if (!self)
                amp = (v[j] * v[k] + v[mj] * v[mk]) * std::sqrt(0.5);
        }
        psi[a] = amp;
    }
    return psi / psi.norm();
}

cplx rayleigh_quotient(const CMatrix& M, const CVector& psi)
{
    return psi.dot(M * psi) / psi.squaredNorm();
}

CMatrix apply_two_excitation(const CMatrix& H, const CMatrix& psi)
{
    const CMatrix hp = H * psi;
    CMatrix out = hp + hp.transpose();
    out.diagonal().setZero();
    return out;
}

namespace {

// Inner product over pairs j<k of symmetric amplitude matrices.
cplx pair_dot(const CMatrix& a, const CMatrix& b)
{
    return 0.5 * (a.conjugate().cwiseProduct(b)).sum();
}

// Restarted Arnoldi on the matrix-free two-excitation operator, tracking the
// Ritz vector closest to the target. Returns the Ritz value.
cplx refine_two_excitation(const CMatrix& H, const CMatrix& target, double& overlap)
{
    constexpr int kKrylov = 30;
    CMatrix x = target;
    x /= std::sqrt(pair_dot(x, x).real());
    cplx theta = pair_dot(x, apply_two_excitation(H, x));
    for (int restart = 0; restart < 20; ++restart) {
        std::vector<CMatrix> basis{x};
        CMatrix h = CMatrix::Zero(kKrylov + 1, kKrylov);
        int m = 0;
        for (; m < kKrylov; ++m) {
            CMatrix w = apply_two_excitation(H, basis[m]);
            for (int i = 0; i <= m; ++i) {
                h(i, m) = pair_dot(basis[i], w);
                w -= h(i, m) * basis[i];
            }
            const double beta = std::sqrt(pair_dot(w, w).real());
            h(m + 1, m) = beta;
            if (beta < 1e-14) {
                ++m;
                break;
            }
            basis.push_back(w / beta);
        }
        Eigen::ComplexEigenSolver<CMatrix> ces(h.topLeftCorner(m, m));
        int best = 0;
        double score = -1.0;
        CMatrix best_vec;
        for (int i = 0; i < m; ++i) {
            CMatrix ritz = CMatrix::Zero(H.rows(), H.cols());
            for (int k = 0; k < m; ++k)
                ritz += ces.eigenvectors()(k, i) * basis[k];
            ritz /= std::sqrt(pair_dot(ritz, ritz).real());
            const double s = std::abs(pair_dot(target, ritz));
            if (s > score) {
                score = s;
                best = i;
                best_vec = ritz;
            }
        }
        const cplx next = ces.eigenvalues()[best];
        overlap = score / std::sqrt(pair_dot(target, target).real());
        x = best_vec;
        const bool done = std::abs(next - theta) < 1e-6;
        theta = next;
        if (done)
            break;
    }
    return theta;
}

} // namespace

TwoExcitationResult two_excitation_rate(const LatticeSpec& spec, bool exact)
{
    const auto sites = build_arrays(spec);
    const auto pos = positions(sites);
    const EffectiveHamiltonian H = build_scalar(pos);
    auto modes = diagonalize_parity(H, pos);
    classify(modes, spec, sites);
    const DarkBrightPair pair = find_dark_bright(modes);
    const CVector& v = pair.dark.vector;
    const int n = static_cast<int>(pos.size());

    TwoExcitationResult out;
    out.gamma_d = pair.dark.rate();
    out.ipr = pair.dark.ipr;
    out.perturbative = two_excitation_perturbative(out.gamma_d, out.ipr);

    CMatrix target = CMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (j != k)
                target(j, k) = v[j] * v[k];
    {
        const CMatrix ht = apply_two_excitation(H.matrix, target);
        out.rayleigh = -(pair_dot(target, ht) / pair_dot(target, target)).imag();
    }

    if (exact && n <= kMaxTwoExcitationAtoms) {
        const EffectiveHamiltonian H2 = is_mirror_symmetric(pos) ? build_two_excitation_even(H)
                                                                  : build_two_excitation(H);
        out.dim = H2.dim();
        const CVector psi = pair_product_state(v, H2, n);
        const auto d = eig(H2.matrix, true);
        Eigen::Index best = 0;
        double score = -1.0;
        for (Eigen::Index i = 0; i < d.values.size(); ++i) {
            const CVector u = d.vectors.col(i).normalized();
            const double s = std::abs(psi.dot(u));
            if (s > score) {
                score = s;
                best = i;
            }
        }
        out.exact = -d.values[best].imag();
        out.overlap = score;
    } else {
        out.refined = true;
        out.dim = static_cast<Eigen::Index>(n) * (n - 1) / 2;
        out.exact = -refine_two_excitation(H.matrix, target, out.overlap).imag();
    }
    return out;
}

FourLevelPair four_level_dark_bright(const LatticeSpec& spec)
{
    const auto sites = build_arrays(spec);
    const auto pos = positions(sites);
    auto modes = diagonalize(build_vector(pos));
    const Eigen::Index half = spec.sites_per_array();

    std::vector<EigenMode> inplane;
    std::vector<double> weight;
    for (auto& m : modes) {
        double w = 0.0;
        for (Eigen::Index j = 0; j < 2 * half; ++j)
            w += std::norm(m.vector[3 * j]) + std::norm(m.vector[3 * j + 1]);
        if (w < 0.5)
            continue;
        double acc = 0.0, tot = 0.0;
        for (int a = 0; a < 2; ++a) {
            CVector h(half);
            for (Eigen::Index j = 0; j < half; ++j)
                h[j] = m.vector[3 * j + a];
            const double nh = h.squaredNorm();
            if (nh > 1e-14) {
                acc += nh * quasi_momentum(h, spec.n_perp, spec.spacing);
                tot += nh;
            }
        }
        m.qbar = tot > 0.0 ? acc / tot : std::numeric_limits<double>::infinity();
        inplane.push_back(std::move(m));
        weight.push_back(w);
    }
    if (inplane.size() < 4)
        throw std::runtime_error("four_level_dark_bright: fewer than four in-plane modes");

    std::vector<std::size_t> order(inplane.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return inplane[a].qbar < inplane[b].qbar; });
    order.resize(4);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return inplane[a].rate() < inplane[b].rate(); });

    FourLevelPair out;
    for (int i = 0; i < 2; ++i) {
        out.dark[i] = inplane[order[i]];
        out.bright[i] = inplane[order[i + 2]];
    }
    out.dark_splitting = std::abs(out.dark[0].eps - out.dark[1].eps);
    out.bright_splitting = std::abs(out.bright[0].eps - out.bright[1].eps);
    out.inplane_dark = std::min(weight[order[0]], weight[order[1]]);
    out.inplane_bright = std::min(weight[order[2]], weight[order[3]]);
    return out;
}

CVector field_profile(const CVector& c, const std::vector<Vec3>& pos, const std::vector<Vec3>& grid,
                      const CVec3& p)
{
    if (c.size() != static_cast<Eigen::Index>(pos.size()))
        throw std::invalid_argument("field_profile: amplitude/site size mismatch");
    CVector out(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < pos.size(); ++j) {
            const Vec3 r = grid[g] - pos[j];
            if (r.norm() < 1e-3)
                throw std::invalid_argument("field_profile: grid point coincides with an atom");
            acc += c[static_cast<Eigen::Index>(j)] * scalar_green(r, p);
        }
        out[static_cast<Eigen::Index>(g)] = acc;
    }
    return out;
}

} // namespace darklattice
