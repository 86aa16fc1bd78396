#include <doctest.h>

#include <cmath>

#include "darklattice/analytics.hpp"
#include "oracles.hpp"

using namespace darklattice;
using namespace darklattice::analytics;

TEST_CASE("big_gamma examples")
{
    CHECK(big_gamma(0.5) == doctest::Approx(3.0 / kPi).epsilon(1e-14));
    CHECK(big_gamma(0.8) == doctest::Approx(0.3730).epsilon(1e-3));
    CHECK(2.0 * big_gamma(0.5) == doctest::Approx(1.9099).epsilon(1e-4));
    CHECK_THROWS_AS(big_gamma(0.0), DomainError);
    CHECK_THROWS_AS(big_gamma(-1.0), DomainError);
}

TEST_CASE("gamma_infinite examples")
{
    InfiniteArrayParams p;
    p.spacing = 0.5;
    p.separation = 1.0;
    p.parity = +1;
    REQUIRE(gamma_infinite(p).has_value());
    CHECK(*gamma_infinite(p) == doctest::Approx(2.0 * big_gamma(0.5)).epsilon(1e-12));
    p.parity = -1;
    CHECK(*gamma_infinite(p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    InfiniteArrayParams guided;
    guided.spacing = 0.4;
    guided.q = Eigen::Vector2d(2.0 * kPi * 1.3, 0.0);
    CHECK_FALSE(gamma_infinite(guided).has_value());

    // reduces to Gamma [1 + p cos(k0 L)] for any L at q = 0 and sub-wavelength spacing
    for (double L : {0.3, 1.25, 2.7}) {
        InfiniteArrayParams s;
        s.spacing = 0.6;
        s.separation = L;
        for (int par : {+1, -1}) {
            s.parity = par;
            CHECK(*gamma_infinite(s) ==
                  doctest::Approx(big_gamma(0.6) * (1.0 + par * std::cos(k0 * L))).epsilon(1e-12));
        }
    }
}

TEST_CASE("gamma_infinite rejects grazing orders")
{
    InfiniteArrayParams p;
    p.spacing = 0.5;
    p.q = Eigen::Vector2d(k0, 0.0);
    CHECK_THROWS_AS(gamma_infinite(p), GrazingOrder);
}

TEST_CASE("symmetric/antisymmetric shifts")
{
    const auto a = sym_antisym_shifts(1.0, 1.0, 0.3);
    CHECK(a.symmetric == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(a.antisymmetric == doctest::Approx(0.3).epsilon(1e-12));
    const auto b = sym_antisym_shifts(1.0 + 0.125, 1.0, 0.0);
    CHECK(b.symmetric == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-12));
    CHECK(b.antisymmetric == doctest::Approx(-std::sqrt(2.0) / 4.0).epsilon(1e-12));
    for (double L : {0.1, 0.77, 3.3}) {
        const auto s = sym_antisym_shifts(L, 0.7, -0.2);
        CHECK(s.symmetric + s.antisymmetric == doctest::Approx(-0.4).epsilon(1e-12));
    }
}

TEST_CASE("transfer_fidelity examples")
{
    const auto f = transfer_fidelity(2e-4, 1.0);
    CHECK(f.fidelity == doctest::Approx(std::exp(-kPi * 0.02)).epsilon(1e-12));
    CHECK(f.fidelity == doctest::Approx(0.9391).epsilon(1e-4));
    CHECK(f.omega_opt == doctest::Approx(std::sqrt(2e-4 / 8.0)));

    // small ratio: 1 - F ~ pi sqrt(2 gd/gb)
    const auto s = transfer_fidelity(1e-8, 1.0);
    CHECK(1.0 - s.fidelity == doctest::Approx(kPi * std::sqrt(2e-8)).epsilon(1e-3));
    CHECK(s.fidelity_linear == doctest::Approx(1.0 - kPi * std::sqrt(2e-8)));
    // gd -> 0: t_max -> pi/(4 Omega)
    CHECK(s.t_max == doctest::Approx(kPi / (4.0 * s.omega_opt)).epsilon(1e-3));

    double prev = 1.0;
    for (double r : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
        const double F = transfer_fidelity(r, 1.0).fidelity;
        CHECK(F < prev);
        prev = F;
    }
    CHECK_THROWS_AS(transfer_fidelity(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(transfer_fidelity(0.0, 1.0), DomainError);
}

TEST_CASE("four-mode closed form: initial condition and ODE oracle")
{
    TransferParams p;
    p.gamma_d = 1e-3;
    p.gamma_b = 1.0;
    p.omega = std::sqrt(p.gamma_d * p.gamma_b / 8.0);
    const auto v0 = four_mode_closed_form(0.0, p);
    CHECK(std::abs(v0.c2) < 1e-12);
    CHECK(v0.in_validity_window);

    const CMatrix M = oracle::four_mode_matrix(p.gamma_d, p.gamma_b, p.omega);
    CVector y0 = CVector::Zero(4);
    y0[0] = 1.0;
    const double t_peak = transfer_fidelity(p.gamma_d, p.gamma_b).t_peak;
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double t = 2.0 * t_peak * i / 200.0;
        const CVector y = oracle::expm_apply(M, y0, t);
        worst = std::max(worst, std::abs(four_mode_closed_form(t, p).c2 - y[1]));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("four-mode closed form peak matches the fidelity law")
{
    TransferParams p;
    p.gamma_d = 1e-4;
    p.gamma_b = 1.0;
    const auto tf = transfer_fidelity(p.gamma_d, p.gamma_b);
    p.omega = tf.omega_opt;
    double best = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double t = 2.0 * tf.t_peak * i / 4000.0;
        best = std::max(best, std::norm(four_mode_closed_form(t, p).c2));
    }
    CHECK(std::abs(std::norm(four_mode_closed_form(tf.t_peak, p).c2) - best) < 1e-6);
    CHECK(best == doctest::Approx(tf.fidelity).epsilon(1e-3));
}

TEST_CASE("four-mode closed form rejects degenerate branches")
{
    TransferParams p;
    p.gamma_d = 1e-3;
    p.gamma_b = 1.0;
    p.omega = 0.25;  // 16 Omega^2 = gamma_b^2
    CHECK_THROWS_AS(four_mode_closed_form(1.0, p), DomainError);
    p.omega = 1e-4;  // 4 Omega < gamma_d
    CHECK_THROWS_AS(four_mode_closed_form(1.0, p), DomainError);
    p.omega = 0.5;
    CHECK_FALSE(four_mode_closed_form(1.0, p).in_validity_window);
}

TEST_CASE("reflectivity closed forms")
{
    const double gd = 0.01, gb = 2.0;
    for (Scheme s : {Scheme::Symmetric, Scheme::Opposite}) {
        const double r0 = reflectivity_analytic(0.0, gd, gb, s);
        CHECK(r0 == doctest::Approx((gb - gd) * (gb - gd) / (gb * gb)));
        const double h = reflectivity_hwhm(gd, gb, s);
        CHECK(reflectivity_analytic(h, gd, gb, s) == doctest::Approx(0.5 * r0).epsilon(1e-12));
        for (double D : {0.01, 0.3, 4.0})
            CHECK(reflectivity_analytic(D, gd, gb, s) == doctest::Approx(reflectivity_analytic(-D, gd, gb, s)));
    }
    CHECK(reflectivity_hwhm(gd, gb, Scheme::Symmetric) == doctest::Approx(gb / 2.0));
    CHECK(reflectivity_hwhm(gd, gb, Scheme::Opposite) == doctest::Approx(0.32 * std::sqrt(gd * gb)).epsilon(0.01));
    CHECK(reflectivity_analytic(0.0, 1e-12, 1.0, Scheme::Symmetric) == doctest::Approx(1.0));
}

TEST_CASE("Lamb-Dicke renormalization")
{
    CHECK(lamb_dicke_renorm(0.02, 0.0, 3.0).value == doctest::Approx(0.02));
    const double eta = std::sqrt(1e-3);
    CHECK(lamb_dicke_renorm(0.0, eta, 0.0).value == doctest::Approx(1e-3));
    CHECK(lamb_dicke_renorm(1.0, 0.2, 5.0).value == doctest::Approx(1.0));
    CHECK_FALSE(lamb_dicke_renorm(0.01, 0.1, 1.0).warn);
    CHECK(lamb_dicke_renorm(0.01, 0.3, 1.0).warn);
}

TEST_CASE("defect renormalization")
{
    const cplx e(0.1, -5e-4);
    CHECK(defect_renorm(e, 0.0) == e);
    for (double p : {0.0, 0.2, 1.0})
        CHECK(std::abs(defect_renorm(cplx(0.0, -0.5), p) - cplx(0.0, -0.5)) < 1e-15);
    CHECK(-2.0 * defect_renorm(cplx(0.0, -0.5e-3), 0.01).imag() == doctest::Approx(0.01099).epsilon(1e-10));
    CHECK_THROWS_AS(defect_renorm(e, 1.5), DomainError);
    CHECK_THROWS_AS(defect_renorm(e, -0.1), DomainError);
}

TEST_CASE("first-order retardation amplitudes")
{
    const double G = 0.8, gd = 1e-3;
    for (double t : {0.0, 1.0, 7.5}) {
        CHECK(nonmarkov_amplitude(t, G, gd, 0.0, 0.0, Branch::Dark) == doctest::Approx(std::exp(-gd * t / 2)));
        CHECK(nonmarkov_amplitude(t, G, gd, 0.0, 0.0, Branch::Bright) ==
              doctest::Approx(std::exp(-(2 * G + gd) * t / 2)));
    }
    // dark exponent shrinks by 1/(1 + Gamma tau/2) at kappa L = 0
    const double gt = 0.4, t = 50.0;
    const double a = nonmarkov_amplitude(t, G, gd, gt, 0.0, Branch::Dark) * (2.0 + gt) / 2.0;
    CHECK(-std::log(a) / t == doctest::Approx(gd / 2.0 / (1.0 + gt / 2.0)).epsilon(1e-10));
    CHECK_THROWS_AS(nonmarkov_amplitude(1.0, G, gd, 2.0, 0.0, Branch::Bright), DomainError);
    CHECK_NOTHROW(nonmarkov_amplitude(1.0, G, gd, 2.0, 1.0, Branch::Bright));
}

TEST_CASE("photon number")
{
    CHECK(photon_number(0.0, cplx(1.0, 0.0)) == 0.0);
    CHECK(photon_number(0.2, cplx(1.0, 0.0)) == doctest::Approx(0.1));
    CHECK(photon_number(0.2, cplx(0.0, 1.0)) == doctest::Approx(0.1));
}

TEST_CASE("memory emission")
{
    const double om = 0.01, G = 0.5;
    const double k0L = kPi / 2.0;  // cos = 0
    const auto m = memory_emission(om, G, 0.0, k0L);
    CHECK(m.gamma_tilde == doctest::Approx(2.0 * om * om / G).epsilon(1e-12));
    CHECK(m.forward == 0.0);
    CHECK(m.backward == doctest::Approx(m.gamma_tilde).epsilon(1e-12));
    CHECK_FALSE(m.warn);

    for (double kl : {0.3, 1.1, 2.9}) {
        const auto x = memory_emission(om, G, 0.0, kl);
        CHECK(x.forward == 0.0);
        CHECK(x.backward == doctest::Approx(x.gamma_tilde).epsilon(1e-10));
    }
    CHECK(memory_emission(0.4, G, 0.0, k0L).warn);
    CHECK_THROWS_AS(memory_emission(om, G, 0.0, 0.0), DomainError);
}

TEST_CASE("Laplace transform has the right Markov limit")
{
    TransferParams p;
    p.gamma_d = 1e-3;
    p.omega = 0.02;
    const double G = 0.5;
    p.gamma_b = 2.0 * G + p.gamma_d;
    // Laplace transform of the closed form: sum C/(s + i w)
    const CMatrix M = oracle::four_mode_matrix(p.gamma_d, p.gamma_b, p.omega);
    for (cplx s : {cplx(0.3, 0.0), cplx(0.1, 2.0), cplx(1.0, -0.4)}) {
        const CMatrix R = (s * CMatrix::Identity(4, 4) - M).inverse();
        CHECK(std::abs(delayed_c2_laplace(s, G, p) - R(1, 0)) < 1e-10 * std::abs(R(1, 0)) + 1e-14);
    }
}

TEST_CASE("numeric Laplace inversion reproduces the Markovian closed form")
{
    TransferParams p;
    p.gamma_d = 1e-3;
    const double G = 0.5;
    p.gamma_b = 2.0 * G + p.gamma_d;
    p.omega = std::sqrt(p.gamma_d * p.gamma_b / 8.0);
    const double t_end = 2.0 * transfer_fidelity(p.gamma_d, p.gamma_b).t_peak;
    const auto inv = delayed_transfer_laplace(G, p, t_end, 400);
    CHECK(inv.converged);
    CHECK(inv.times.size() >= 400);
    double worst = 0.0;
    for (std::size_t i = 0; i < inv.times.size(); ++i)
        worst = std::max(worst, std::abs(inv.c2[i] - four_mode_closed_form(inv.times[i], p).c2));
    CHECK(worst < 1e-3);
    CHECK_THROWS_AS(delayed_transfer_laplace(G, p, 0.0, 400), DomainError);
}
