#include <doctest.h>

#include <random>

#include "darklattice/analytics.hpp"
#include "darklattice/dynamics.hpp"
#include "darklattice/greens.hpp"
#include "darklattice/hamiltonian.hpp"
#include "darklattice/seeding.hpp"
#include "darklattice/spectrum.hpp"
#include "oracles.hpp"

using namespace darklattice;
namespace an = darklattice::analytics;
using an::Scheme;

namespace {

std::vector<Vec3> random_cloud(int n, double box, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-box, box);
    std::vector<Vec3> pos(n);
    for (auto& p : pos)
        p = Vec3(u(rng), u(rng), u(rng));
    return pos;
}

LatticeSpec random_spec(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> n(2, 5);
    std::uniform_real_distribution<double> d(0.3, 0.9), L(0.4, 8.0), w(1.05, 3.0);
    std::bernoulli_distribution curved(0.5);
    return curved(rng) ? LatticeSpec::curved(n(rng), d(rng), L(rng), w(rng))
                       : LatticeSpec::flat(n(rng), d(rng), L(rng));
}

} // namespace

TEST_CASE("property: Green's tensor symmetry and evenness on random separations")
{
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 r(u(rng), u(rng), u(rng));
        const GreenTensor G = dyadic_green(r);
        CHECK((G - G.transpose()).norm() < 1e-12 * G.norm());
        CHECK((G - dyadic_green(-r)).norm() < 1e-12 * G.norm());
    }
}

TEST_CASE("property: sum rules and nonnegative rates on random geometries")
{
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pos = random_cloud(12 + trial, 1.5, rng);
        const EffectiveHamiltonian H = build_scalar(pos);
        CHECK((H.matrix - H.matrix.transpose()).norm() < 1e-14 * H.matrix.norm());
        const auto modes = diagonalize(H);
        double rate = 0.0, shift = 0.0, min_rate = 1e9;
        for (const auto& m : modes) {
            rate += m.rate();
            shift += m.shift();
            min_rate = std::min(min_rate, m.rate());
        }
        CHECK(rate == doctest::Approx(double(pos.size())).epsilon(1e-8));
        CHECK(std::abs(shift) < 1e-8 * pos.size());
        CHECK(min_rate >= -1e-9);
    }
}

TEST_CASE("property: spectra are invariant under rotations about z and translations")
{
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi), sh(-5.0, 5.0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto pos = random_cloud(10, 1.0, rng);
        const Eigen::Matrix3d R = Eigen::AngleAxisd(ang(rng), Vec3::UnitZ()).toRotationMatrix();
        const Vec3 t(sh(rng), sh(rng), sh(rng));
        std::vector<Vec3> moved;
        for (const auto& p : pos)
            moved.push_back(R * p + t);
        CHECK(oracle::multiset_distance(oracle::eigenvalues(build_scalar(pos).matrix),
                                        oracle::eigenvalues(build_scalar(moved).matrix)) < 1e-10);
    }
}

TEST_CASE("property: parity blocks reproduce the spectrum of random lattices")
{
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 8; ++trial) {
        const LatticeSpec spec = random_spec(rng);
        const auto pos = positions(build_arrays(spec));
        const EffectiveHamiltonian H = build_scalar(pos);
        const auto [h0, h1] = parity_blocks(H, pos);
        auto a = oracle::eigenvalues(h0 + h1);
        const auto b = oracle::eigenvalues(h0 - h1);
        a.insert(a.end(), b.begin(), b.end());
        CHECK(oracle::multiset_distance(a, oracle::eigenvalues(H.matrix)) < 1e-10);
    }
}

TEST_CASE("property: relabeling the arrays maps each mode to itself up to its parity")
{
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 5; ++trial) {
        const LatticeSpec spec = random_spec(rng);
        const auto pos = positions(build_arrays(spec));
        const auto modes = diagonalize_parity(build_scalar(pos), pos);
        const Eigen::Index n = spec.sites_per_array();
        for (const auto& m : modes) {
            CVector swapped(2 * n);
            swapped.head(n) = m.vector.tail(n);
            swapped.tail(n) = m.vector.head(n);
            CHECK((swapped - double(m.parity) * m.vector).norm() < 1e-10);
        }
    }
}

TEST_CASE("property: quasi-momentum is invariant under global phase and scale")
{
    std::mt19937_64 rng(606);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        CVector v(16);
        for (auto& x : v)
            x = {g(rng), g(rng)};
        const double q = quasi_momentum(v, 4, 0.6);
        CHECK(quasi_momentum(std::polar(2.5, g(rng)) * v, 4, 0.6) == doctest::Approx(q).epsilon(1e-12));
        CHECK(q == doctest::Approx(oracle::quasi_momentum(v, 4, 0.6)).epsilon(1e-10));
    }
}

TEST_CASE("property: four-mode norm never grows and amplitudes are linear")
{
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> gd(0.0, 0.05), gb(0.1, 2.0), om(0.01, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
        const an::TransferParams p{gd(rng), gb(rng), om(rng)};
        const auto a = dynamics::integrate_four_mode(p, 40.0, 80);
        dynamics::FourModeInit two;
        two.c1 = cplx(0.0, 2.0);
        const auto b = dynamics::integrate_four_mode(p, 40.0, 80, two);
        double prev = 1.0 + 1e-12;
        for (std::size_t i = 0; i < a.times.size(); ++i) {
            const double nrm = a.pop_s1[i] + a.pop_s2[i] + a.pop_e[i];
            CHECK(nrm <= prev + 1e-9);
            prev = nrm;
            CHECK(std::abs(b.c2[i] - cplx(0.0, 2.0) * a.c2[i]) < 1e-7);
        }
        CHECK(a.fidelity >= 0.0);
        CHECK(a.fidelity <= 1.0);
    }
}

TEST_CASE("property: delay traces are linear in the initial amplitude")
{
    const auto a = dynamics::integrate_delay(0.5, 0.01, 0.7, 0.2, an::Branch::Dark, 1.0, 30.0, 30);
    const auto b = dynamics::integrate_delay(0.5, 0.01, 0.7, 0.2, an::Branch::Dark, 2.0, 30.0, 30);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(std::abs(b.values[i] - 2.0 * a.values[i]) < 1e-12);
}

TEST_CASE("property: Markov limits of the retarded expressions")
{
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> G(0.1, 2.0), gd(0.0, 0.05), t(0.0, 50.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double g = G(rng), d = gd(rng), tt = t(rng);
        CHECK(an::nonmarkov_amplitude(tt, g, d, 0.0, 0.0, an::Branch::Dark) ==
              doctest::Approx(std::exp(-d * tt / 2)).epsilon(1e-10));
        CHECK(an::nonmarkov_amplitude(tt, g, d, 0.0, 0.0, an::Branch::Bright) ==
              doctest::Approx(std::exp(-(2 * g + d) * tt / 2)).epsilon(1e-10));
    }
}

TEST_CASE("property: closed-form reflectivities are passive and even")
{
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> gd(0.0, 0.1), gb(0.2, 3.0), D(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = gd(rng), b = gb(rng), x = D(rng);
        for (Scheme s : {Scheme::Symmetric, Scheme::Opposite}) {
            const double r = an::reflectivity_analytic(x, a + 1e-6, b, s);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            CHECK(r == doctest::Approx(an::reflectivity_analytic(-x, a + 1e-6, b, s)).epsilon(1e-14));
        }
    }
}

TEST_CASE("property: per-task seeds are deterministic and distinct")
{
    std::vector<std::uint64_t> seen;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        seen.push_back(task_seed(42, t));
        CHECK(task_seed(42, t) == seen.back());
    }
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    CHECK(task_seed(42, 0) != task_seed(43, 0));
    static_assert(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("property: four-level dark and bright modes come in degenerate in-plane pairs")
{
    const LatticeSpec spec = LatticeSpec::curved(4, 0.7, 6.0, 1.4);
    const auto fl = four_level_dark_bright(spec);
    CHECK(fl.dark_splitting < 1e-6);
    CHECK(fl.bright_splitting < 1e-6);
    CHECK(fl.inplane_dark > 0.99);
    CHECK(fl.inplane_bright > 0.99);
    CHECK(fl.dark[0].rate() < fl.bright[0].rate());
}
