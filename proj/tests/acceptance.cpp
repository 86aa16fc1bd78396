#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "darklattice/analytics.hpp"
#include "darklattice/dynamics.hpp"
#include "darklattice/probe.hpp"
#include "darklattice/spectrum.hpp"
#include "oracles.hpp"

using namespace darklattice;
namespace an = darklattice::analytics;
namespace dyn = darklattice::dynamics;
namespace cli = darklattice::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, ...)
{
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// Collects sub-checks; the criterion passes only if all of them do.
struct Checks {
    Outcome out;
    void add(bool ok, const std::string& what)
    {
        out.pass = out.pass && ok;
        if (!out.detail.empty())
            out.detail += "; ";
        out.detail += (ok ? "" : "[x] ") + what;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

LatticeSpec optimized(int n, double spacing, double separation, WaistOptimum* opt = nullptr)
{
    const WaistOptimum w = optimize_waist(LatticeSpec::curved(n, spacing, separation, 1.0));
    if (opt)
        *opt = w;
    return LatticeSpec::curved(n, spacing, separation, w.waist);
}

struct SumRule {
    double rate_err = 0.0, shift_err = 0.0, min_rate = 0.0;
};

SumRule sum_rule(const std::vector<EigenMode>& modes)
{
    double rate = 0.0, shift = 0.0, min_rate = 1e300;
    for (const auto& m : modes) {
        rate += m.rate();
        shift += m.shift();
        min_rate = std::min(min_rate, m.rate());
    }
    const double n = double(modes.size());
    return {std::abs(rate - n) / n, std::abs(shift) / n, min_rate};
}

// ---------------------------------------------------------------------------

Outcome a1()
{
    Checks c;
    const auto t0 = std::chrono::steady_clock::now();
    WaistOptimum opt;
    const LatticeSpec spec = optimized(10, 0.75, 20.0, &opt);
    const double elapsed = seconds_since(t0);
    const double gd = opt.pair.dark.rate();
    c.add(gd >= 3e-4 && gd <= 3e-3, fmt("gamma_d=%.3e (w0=%.3f) in [3e-4,3e-3]", gd, spec.waist));
    c.add(elapsed < 60.0, fmt("runtime %.1fs < 60s", elapsed));
    return c.out;
}

Outcome a2()
{
    Checks c;
    const std::vector<std::pair<const char*, LatticeSpec>> cases = {
        {"flat N=8", LatticeSpec::flat(8, 0.5, 2.0)},
        {"curved N=10", LatticeSpec::curved(10, 0.75, 20.0, 2.2)},
        {"curved N=6", LatticeSpec::curved(6, 0.3, 0.7, 1.1)},
    };
    for (const auto& [name, spec] : cases) {
        const auto pos = positions(build_arrays(spec));
        const auto H = build_scalar(pos);
        for (const bool parity : {false, true}) {
            const auto modes = parity ? diagonalize_parity(H, pos) : diagonalize(H);
            const SumRule s = sum_rule(modes);
            c.add(s.rate_err < 1e-8 && s.shift_err < 1e-8 && s.min_rate >= -1e-9,
                  fmt("%s%s: rate %.1e shift %.1e min %.1e", name, parity ? " (parity)" : "", s.rate_err,
                      s.shift_err, s.min_rate));
        }
    }
    return c.out;
}

Outcome a3()
{
    Checks c;
    for (int n : {4, 8}) {
        for (const LatticeSpec& spec : {LatticeSpec::flat(n, 0.5, 1.3), LatticeSpec::curved(n, 0.75, 6.0, 1.5)}) {
            const auto pos = positions(build_arrays(spec));
            const auto H = build_scalar(pos);
            const auto [h0, h1] = parity_blocks(H, pos);
            auto blocks = oracle::eigenvalues(h0 + h1);
            const auto minus = oracle::eigenvalues(h0 - h1);
            blocks.insert(blocks.end(), minus.begin(), minus.end());
            const double d = oracle::multiset_distance(blocks, oracle::eigenvalues(H.matrix));
            c.add(d < 1e-10, fmt("N=%d %s: %.1e", n, spec.curvature == Curvature::Flat ? "flat" : "curved", d));
        }
    }
    return c.out;
}

Outcome a4()
{
    Checks c;
    const double G = an::big_gamma(0.5);
    // k0 L = 2 pi (cos = +1) and 3 pi (cos = -1)
    for (const double L : {1.0, 1.5}) {
        const double cosk = std::cos(k0 * L);
        const DarkBrightPair pair = dark_bright(LatticeSpec::flat(30, 0.5, L));
        const int bright_parity = cosk > 0 ? +1 : -1;
        c.add(pair.bright.parity == bright_parity, fmt("L=%.2f bright parity %+d", L, pair.bright.parity));
        c.add(rel(pair.bright.rate(), 2.0 * G) <= 0.1,
              fmt("L=%.2f bright %.4f vs 2Gamma=%.4f", L, pair.bright.rate(), 2.0 * G));
        c.add(pair.dark.rate() <= 0.02 * G, fmt("L=%.2f dark %.2e <= 0.02Gamma", L, pair.dark.rate()));
    }
    return c.out;
}

Outcome a5()
{
    Checks c;
    std::vector<double> x, y;
    std::string ratios;
    for (int n : {4, 6, 8, 10, 12}) {
        WaistOptimum opt;
        optimized(n, 0.5, 2.0, &opt);
        const DarkBrightPair& p = opt.pair;
        x.push_back(std::log(double(n)));
        y.push_back(std::log(p.ratio));
        ratios += fmt(" %.2e", p.ratio);
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    c.add(slope >= -4.5 && slope <= -3.5, fmt("slope %.3f in [-4.5,-3.5] (ratios%s)", slope, ratios.c_str()));
    return c.out;
}

Outcome a6()
{
    Checks c;
    for (const double r : {1e-4, 1e-3, 1e-2}) {
        const auto law = an::transfer_fidelity(r, 1.0);
        const an::TransferParams p{r, 1.0, law.omega_opt, 0.0, 0.0};
        const auto tr = dyn::integrate_four_mode(p, 1.5 * kPi / p.omega, 3000);
        c.add(std::abs(tr.fidelity - law.fidelity) <= 0.01,
              fmt("r=%.0e F=%.4f law=%.4f", r, tr.fidelity, law.fidelity));
        double dev = 0.0;
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            dev = std::max(dev, std::abs(an::four_mode_closed_form(tr.times[i], p).c2 - tr.c2[i]));
        c.add(dev <= 1e-3, fmt("closed form %.1e", dev));
    }
    return c.out;
}

Outcome a7()
{
    Checks c;
    const auto t0 = std::chrono::steady_clock::now();
    const LatticeSpec spec = optimized(12, 0.8, 30.0);
    const DarkBrightPair pair = dark_bright(spec);
    dyn::FullTransferSetup s;
    s.spec = spec;
    s.dark = pair.dark.vector;
    s.bright = pair.bright.vector;
    s.delta_d = pair.shift;
    s.omega = std::sqrt(pair.dark.rate() * pair.bright.rate() / 8.0);
    const auto tr = dyn::simulate_transfer_full(s, 1.5 * kPi / s.omega, 600);
    const double elapsed = seconds_since(t0);
    const an::TransferParams p{pair.dark.rate(), pair.bright.rate(), s.omega, 0.0, 0.0};
    const auto four = dyn::integrate_four_mode(p, 1.5 * kPi / s.omega, 600);
    c.add(tr.fidelity >= 0.9, fmt("peak s2=%.4f >= 0.9", tr.fidelity));
    c.add(rel(tr.t_at_max, kPi / s.omega) <= 0.1, fmt("t=%.3f pi/Omega", tr.t_at_max * s.omega / kPi));
    c.add(rel(tr.fidelity, four.fidelity) <= 0.05, fmt("four-mode %.4f", four.fidelity));
    c.add(elapsed < 300.0, fmt("runtime %.1fs < 300s", elapsed));
    return c.out;
}

double numeric_r(ProbeConfig cfg, double delta)
{
    cfg.detunings = {delta};
    return reflectivity_numeric(cfg).R.at(0);
}

// Half width at half maximum of the numeric curve by bisection.
double numeric_hwhm(const ProbeConfig& cfg, double guess)
{
    const double half = 0.5 * numeric_r(cfg, 0.0);
    double lo = 0.0, hi = guess;
    while (numeric_r(cfg, hi) > half)
        hi *= 2.0;
    for (int it = 0; it < 50 && hi - lo > 1e-6 * guess; ++it) {
        const double mid = 0.5 * (lo + hi);
        (numeric_r(cfg, mid) > half ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome a8()
{
    Checks c;
    const LatticeSpec spec = optimized(12, 0.8, 30.0);
    const DarkBrightPair pair = dark_bright(spec);
    const double gd = pair.dark.rate(), gb = pair.bright.rate();
    for (const Scheme s : {Scheme::Symmetric, Scheme::Opposite}) {
        const char* name = s == Scheme::Symmetric ? "symmetric" : "opposite";
        ProbeConfig cfg;
        cfg.spec = spec;
        cfg.mode = GaussianMode{spec.waist};
        cfg.delta_d = pair.shift;
        cfg.scheme = s;
        const double hw = an::reflectivity_hwhm(gd, gb, s);
        for (int i = 0; i <= 40; ++i)
            cfg.detunings.push_back(-hw + 2.0 * hw * i / 40);
        const auto curve = reflectivity_numeric(cfg);
        double worst = 0.0;
        for (std::size_t i = 0; i < curve.R.size(); ++i)
            worst = std::max(worst, rel(curve.R[i], an::reflectivity_analytic(curve.detunings[i], gd, gb, s)));
        c.add(worst <= 0.05, fmt("%s peak-region error %.3f", name, worst));
        const double w = numeric_hwhm(cfg, hw);
        c.add(rel(w, hw) <= 0.1, fmt("%s hwhm %.3e vs %.3e", name, w, hw));
    }
    return c.out;
}

Outcome a9()
{
    Checks c;
    for (int n : {8, 12}) {
        WaistOptimum opt;
        const LatticeSpec spec = optimized(n, 0.75, 20.0, &opt);
        const double gd = opt.pair.dark.rate();
        for (const double p : {0.01, 0.02, 0.05}) {
            const DefectStats st = defect_monte_carlo(spec, p, 100, 20240611);
            const double pred = gd * (1.0 - p) + p;
            c.add(rel(st.mean_dark, pred) <= 0.15,
                  fmt("N=%d p=%.2f mean %.4f pred %.4f", n, p, st.mean_dark, pred));
        }
    }
    return c.out;
}

Outcome a10()
{
    Checks c;
    for (int n : {4, 6}) {
        for (const double L : {2.0, 5.0, 10.0}) {
            const TwoExcitationResult r = two_excitation_rate(optimized(n, 0.5, L));
            c.add(rel(r.exact, r.perturbative) <= 0.2,
                  fmt("N=%d L=%g exact %.4f pert %.4f", n, L, r.exact, r.perturbative));
        }
    }
    return c.out;
}

Outcome a11()
{
    Checks c;
    const double G = 1.0;
    for (const double gt : {0.01, 0.05, 0.1}) {
        const double tau = gt / G;
        const auto tr = dyn::integrate_delay(G, 0.0, gt, 0.0, an::Branch::Dark, 1.0, 10.0, 200,
                                             dyn::History::Zero);
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            if (tr.times[i] < tau)
                continue;
            const double ref = an::nonmarkov_amplitude(tr.times[i], G, 0.0, gt, 0.0, an::Branch::Dark);
            worst = std::max(worst, std::abs(tr.values[i] - ref) / std::abs(ref));
        }
        c.add(worst <= 0.05, fmt("Gamma*tau=%g first-order %.3f", gt, worst));
    }

    const double gd = 5e-5;
    const auto base = dyn::optimize_delayed_drive(G, gd, 0.0);
    std::vector<double> fids;
    for (const double gt : {0.01, 1.0, 10.0}) {
        const auto o = dyn::optimize_delayed_drive(G, gd, gt);
        fids.push_back(o.fidelity);
        const double om = o.omega / base.omega, om_pred = 1.0 / std::sqrt(1.0 + 0.75 * gt);
        const double tm = o.t_max / base.t_max, tm_pred = 1.0 + 0.5 * gt;
        c.add(rel(om, om_pred) <= 0.1, fmt("Gamma*tau=%g Omega ratio %.3f vs %.3f", gt, om, om_pred));
        c.add(rel(tm, tm_pred) <= 0.1, fmt("Gamma*tau=%g t_max ratio %.3f vs %.3f", gt, tm, tm_pred));
    }
    const double mean = (fids[0] + fids[1] + fids[2]) / 3.0;
    const double spread = *std::max_element(fids.begin(), fids.end()) - *std::min_element(fids.begin(), fids.end());
    c.add(spread < 0.1 * (1.0 - mean), fmt("fidelity spread %.2e vs 0.1(1-F)=%.2e", spread, 0.1 * (1.0 - mean)));
    return c.out;
}

Outcome a12()
{
    Checks c;
    // Curvature from L = 30, then k0 L shifted by pi/2 to cos(k0 L) = 0.
    WaistOptimum opt;
    LatticeSpec spec = optimized(12, 0.8, 30.0, &opt);
    spec.separation = 30.25;
    const DarkBrightPair pair = dark_bright(spec);
    const double G = an::big_gamma(spec.spacing);
    dyn::FullTransferSetup s;
    s.spec = spec;
    s.dark = pair.dark.vector;
    s.bright = pair.bright.vector;
    s.delta_d = opt.pair.shift;
    s.omega = 0.01 * G;
    s.drive = {true, false};
    const double target = 2.0 * s.omega * s.omega / G;
    const auto m = dyn::simulate_memory_release(s, 0.5 / target, 400);
    c.add(m.fit_ok && rel(m.gamma_tilde, target) <= 0.1,
          fmt("fitted %.4e vs 2Omega^2/Gamma=%.4e (gamma_d/Gamma=%.1e)", m.gamma_tilde, target,
              opt.pair.dark.rate() / G));
    const auto e = an::memory_emission(s.omega, G, 0.0, k0 * spec.separation);
    c.add(e.forward == 0.0, fmt("P_forward(gamma_d=0)=%g", e.forward));
    return c.out;
}

Outcome a13()
{
    Checks c;
    for (const auto& [n, L] : {std::pair{6, 40.0}, std::pair{8, 60.0}}) {
        const LatticeSpec spec = optimized(n, 0.5, L);
        const double w = GaussianMode{spec.waist}.width(L / 2);
        const double ref = std::sqrt(L / kPi);
        c.add(rel(w, ref) <= 0.15, fmt("N=%d L=%g w(L/2)=%.3f vs %.3f", n, L, w, ref));
    }
    WaistOptimum opt;
    optimized(12, 0.8, 30.0, &opt);
    c.add(opt.pair.dark.overlap > 0.95 && opt.pair.bright.overlap > 0.95,
          fmt("N=12 overlaps dark %.4f bright %.4f", opt.pair.dark.overlap, opt.pair.bright.overlap));
    return c.out;
}

Outcome a14()
{
    Checks c;
    for (int n : {6, 8}) {
        WaistOptimum opt;
        const LatticeSpec spec = optimized(n, 0.7, 20.0, &opt);
        const FourLevelPair fl = four_level_dark_bright(spec);
        c.add(fl.dark_splitting < 1e-6 && fl.bright_splitting < 1e-6,
              fmt("N=%d splittings %.1e %.1e", n, fl.dark_splitting, fl.bright_splitting));
        const double rd = fl.dark[0].rate() / opt.pair.dark.rate();
        const double rb = fl.bright[0].rate() / opt.pair.bright.rate();
        c.add(rd >= 0.5 && rd <= 2.0 && rb >= 0.5 && rb <= 2.0,
              fmt("N=%d rate ratios dark %.3f bright %.3f", n, rd, rb));
    }
    return c.out;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome a15()
{
    Checks c;
    const fs::path dir = fs::temp_directory_path() / "darklattice_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::vector<std::pair<const char*, const char*>> runs = {
        {"analytic", "analytic"}, {"fig3c", "transfer"}, {"delay", "nonmarkov"}, {"fig2c", "spectrum"},
        {"fig1d", "spectrum"},    {"field", "field"},    {"fig4b", "probe"},      {"fig3b", "transfer"},
        {"memory", "transfer"},   {"defects_small", "defects"},
    };
    for (const auto& [preset, command] : runs) {
        cli::Config cfg;
        if (std::string(preset) == "defects_small") {
            cfg = cli::Config::parse_file(cli::preset_path("defects"));
            cfg.apply_override("defects.realizations=10");
            cfg.apply_override("sweep.lattice.n_perp=4, 8");
        } else {
            cfg = cli::Config::parse_file(cli::preset_path(preset));
        }
        std::vector<std::vector<std::string>> outputs;
        for (const int jobs : {1, 1, 3}) {
            cli::RunOptions o;
            o.command = command;
            o.config = cfg;
            o.seed = 7;
            o.jobs = jobs;
            o.out = (dir / fmt("%s_%zu.csv", preset, outputs.size())).string();
            std::vector<std::string> texts;
            for (const auto& f : cli::run_command(o))
                texts.push_back(slurp(f));
            outputs.push_back(texts);
        }
        const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
        c.add(same, fmt("%s %s", preset, same ? "identical" : "differs"));
    }
    fs::remove_all(dir);
    return c.out;
}

} // namespace

int main()
{
    if (!std::getenv("DARKLATTICE_PRESET_DIR"))
        ::setenv("DARKLATTICE_PRESET_DIR", DARKLATTICE_PRESET_DIR, 1);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"A1", a1},   {"A2", a2},   {"A3", a3},   {"A4", a4},   {"A5", a5},   {"A6", a6},   {"A7", a7},   {"A8", a8},
        {"A9", a9},   {"A10", a10}, {"A11", a11}, {"A12", a12}, {"A13", a13}, {"A14", a14}, {"A15", a15},
    };
    int failed = 0;
    for (const auto& [id, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s (%.1fs) %s\n", id, o.pass ? "PASS" : "FAIL", seconds_since(t0), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
