#include <doctest.h>

#include <cmath>

#include "darklattice/analytics.hpp"
#include "darklattice/probe.hpp"
#include "darklattice/spectrum.hpp"

using namespace darklattice;

namespace {

ProbeConfig small_config(Scheme scheme)
{
    ProbeConfig c;
    c.spec = LatticeSpec::curved(8, 0.8, 12.0, std::sqrt(12.0 / (2.0 * kPi)) * 1.2);
    c.mode = GaussianMode{c.spec.waist};
    c.delta_d = dark_bright(c.spec).shift;
    c.scheme = scheme;
    return c;
}

std::vector<double> grid(double span, int n)
{
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i)
        d[i] = -span + 2.0 * span * i / (n - 1);
    return d;
}

} // namespace

TEST_CASE("probe configuration validation")
{
    ProbeConfig c = small_config(Scheme::Symmetric);
    CHECK_THROWS_AS(reflectivity_numeric(c), ProbeError);  // empty grid
    c.detunings = {0.0};
    c.mode.waist = 0.8;
    CHECK_THROWS_AS(reflectivity_numeric(c), ProbeError);
}

TEST_CASE("reflectivity is even in the detuning and passive")
{
    for (Scheme s : {Scheme::Symmetric, Scheme::Opposite}) {
        ProbeConfig c = small_config(s);
        c.detunings = grid(1.0, 41);
        const auto curve = reflectivity_numeric(c);
        REQUIRE(curve.R.size() == 41);
        CHECK(curve.skipped.empty());
        for (std::size_t i = 0; i < 41; ++i) {
            CHECK(curve.R[i] >= 0.0);
            CHECK(curve.R[i] <= 1.0 + 1e-3);
            // Opposite detuning is even by the array-swap symmetry; the symmetric
            // scheme only approximately, through the off-resonant modes.
            CHECK(curve.R[i] == doctest::Approx(curve.R[40 - i]).epsilon(s == Scheme::Opposite ? 1e-6 : 0.05));
        }
    }
}

TEST_CASE("reflectivity peaks at zero detuning near the closed-form value")
{
    ProbeConfig c = small_config(Scheme::Symmetric);
    const auto pair = dark_bright(c.spec);
    const double gd = pair.dark.rate(), gb = pair.bright.rate();
    c.detunings = grid(2.0 * gb, 81);
    const auto curve = reflectivity_numeric(c);
    const auto peak = std::max_element(curve.R.begin(), curve.R.end()) - curve.R.begin();
    CHECK(std::abs(curve.detunings[peak]) <= 2.0 * gb / 40.0 + 1e-12);
    const double r0 = analytics::reflectivity_analytic(0.0, gd, gb, Scheme::Symmetric);
    CHECK(curve.R[40] == doctest::Approx(r0).epsilon(0.2));
}

TEST_CASE("opposite-scheme peak is much narrower than the symmetric one")
{
    ProbeConfig sym = small_config(Scheme::Symmetric);
    ProbeConfig opp = small_config(Scheme::Opposite);
    const auto pair = dark_bright(sym.spec);
    const double gb = pair.bright.rate();
    sym.detunings = opp.detunings = grid(gb, 201);
    const auto a = reflectivity_numeric(sym);
    const auto b = reflectivity_numeric(opp);
    auto width = [](const ReflectivityCurve& c) {
        const double half = 0.5 * c.R[c.R.size() / 2];
        int count = 0;
        for (double r : c.R)
            count += r >= half;
        return count;
    };
    CHECK(width(b) < width(a));
}

TEST_CASE("reflectivity is independent of the job count")
{
    ProbeConfig c = small_config(Scheme::Opposite);
    c.detunings = grid(0.5, 17);
    const auto a = reflectivity_numeric(c);
    c.jobs = 4;
    const auto b = reflectivity_numeric(c);
    CHECK(a.R == b.R);
}
