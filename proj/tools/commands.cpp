#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <stdexcept>

#include <json.hpp>

#include "csv.hpp"
#include "darklattice/analytics.hpp"
#include "darklattice/dynamics.hpp"
#include "darklattice/greens.hpp"
#include "darklattice/hamiltonian.hpp"
#include "darklattice/linalg.hpp"
#include "darklattice/parallel.hpp"
#include "darklattice/probe.hpp"
#include "darklattice/seeding.hpp"
#include "darklattice/spectrum.hpp"

namespace darklattice::cli {

namespace fs = std::filesystem;
namespace an = analytics;
namespace dyn = dynamics;

std::string resolve_output(const std::string& out, const std::string& command)
{
    fs::path p = out.empty() ? fs::path(command + ".csv") : fs::path(out);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("DARKLATTICE_OUT_DIR"); dir && *dir)
            p = fs::path(dir) / p;
    }
    return p.string();
}

namespace {

std::string hex64(std::uint64_t x)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

// Sibling output: "<dir>/<stem>_<suffix>".
std::string sibling(const std::string& main, const std::string& suffix)
{
    const fs::path p(main);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

struct Context {
    const RunOptions& opts;
    std::vector<SweepPoint> points;
    std::string main_path;
    std::vector<std::string> written;

    // Inner parallelism only when there is a single point to run.
    int inner_jobs() const { return points.size() == 1 ? opts.jobs : 1; }

    void provenance(CsvTable& t) const
    {
        t.meta("tool", std::string("darklattice ") + kVersion);
        t.meta("command", opts.command);
        t.meta("seed", std::to_string(opts.seed));
        t.meta("config_digest", hex64(opts.config.digest()));
        for (const auto& [k, v] : opts.config.entries())
            t.meta("config", k + " = " + v);
    }

    std::vector<std::string> axis_columns() const
    {
        std::vector<std::string> cols;
        if (!points.empty())
            for (const auto& [k, v] : points.front().values)
                cols.push_back(k);
        return cols;
    }

    std::vector<Cell> axis_cells(const SweepPoint& pt) const
    {
        std::vector<Cell> cells;
        for (const auto& [k, v] : pt.values)
            cells.emplace_back(v);
        return cells;
    }

    void save(const CsvTable& t, const std::string& path)
    {
        t.save(path);
        written.push_back(path);
    }
};

template <class R>
std::vector<R> run_points(const Context& ctx, const std::function<R(const SweepPoint&)>& fn)
{
    std::vector<R> out(ctx.points.size());
    parallel_for(static_cast<int>(ctx.points.size()), ctx.opts.jobs,
                 [&](int i) { out[i] = fn(ctx.points[i]); });
    return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<Cell> concat(std::vector<Cell> a, const std::vector<Cell>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// ---------------------------------------------------------------------------
// Lattice section

struct Lattice {
    LatticeSpec spec;
    bool waist_optimized = false;
};

// optimize_at: separation at which an automatic waist is chosen (NaN: the
// lattice's own separation).
Lattice lattice_from(const Config& c, int jobs, double optimize_at = NAN)
{
    Lattice out;
    LatticeSpec& s = out.spec;
    s.n_perp = static_cast<int>(c.get_int("lattice.n_perp", 4));
    s.spacing = c.get_double("lattice.spacing", 0.5);
    s.separation = c.get_double("lattice.separation", 1.0);
    const std::string curv = c.get_string("lattice.curvature", "flat");
    if (curv == "flat") {
        s.curvature = Curvature::Flat;
    } else if (curv == "gaussian") {
        s.curvature = Curvature::Gaussian;
        const std::string w = c.get_string("lattice.waist", "auto");
        if (w == "auto") {
            LatticeSpec tmpl = s;
            tmpl.waist = 1.0;
            if (!std::isnan(optimize_at))
                tmpl.separation = optimize_at;
            tmpl.validate();
            const WaistOptimum opt = optimize_waist(tmpl, c.get_double("lattice.waist_min", 0.5),
                                                    c.get_double("lattice.waist_max", 0.0), jobs);
            s.waist = opt.waist;
            out.waist_optimized = true;
        } else {
            s.waist = c.get_double("lattice.waist", 0.0);
        }
    } else {
        throw ConfigError("key 'lattice.curvature': expected flat or gaussian, got '" + curv + "'");
    }
    try {
        s.validate();
    } catch (const GeometryError& e) {
        throw ConfigError(std::string("[lattice] ") + e.what());
    }
    return out;
}

std::vector<std::string> lattice_columns() { return {"n_perp", "spacing", "separation", "waist"}; }

std::vector<Cell> lattice_cells(const LatticeSpec& s)
{
    return {long(s.n_perp), s.spacing, s.separation, s.curvature == Curvature::Gaussian ? s.waist : 0.0};
}

// ---------------------------------------------------------------------------

void cmd_spectrum(Context& ctx)
{
    struct Point {
        LatticeSpec spec;
        std::vector<EigenMode> modes;
        DarkBrightPair pair;
    };
    const bool want_modes = ctx.opts.config.get_bool("output.modes", false);
    const auto res = run_points<Point>(ctx, [&](const SweepPoint& pt) {
        Point r;
        r.spec = lattice_from(pt.config, ctx.inner_jobs()).spec;
        const auto sites = build_arrays(r.spec);
        const auto pos = positions(sites);
        const EffectiveHamiltonian H = build_scalar(pos);
        const std::string dump = pt.config.get_string("output.matrix", "");
        if (!dump.empty())
            dump_matrix_csv(H.matrix, resolve_output(dump, "matrix"));
        r.modes = diagonalize_parity(H, pos);
        classify(r.modes, r.spec, sites);
        r.pair = find_dark_bright(r.modes);
        if (!want_modes)
            r.modes.clear();
        return r;
    });

    CsvTable summary(concat(concat(ctx.axis_columns(), lattice_columns()),
                            {"gamma_d", "gamma_b", "ratio", "delta_d", "qbar_d", "qbar_b", "overlap_d",
                             "overlap_b", "ambiguous"}));
    ctx.provenance(summary);
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& p = res[i].pair;
        summary.add_row(concat(concat(ctx.axis_cells(ctx.points[i]), lattice_cells(res[i].spec)),
                               {p.dark.rate(), p.bright.rate(), p.ratio, p.shift, p.dark.qbar, p.bright.qbar,
                                p.dark.overlap, p.bright.overlap, long(p.ambiguous)}));
    }
    ctx.save(summary, ctx.main_path);

    if (want_modes) {
        CsvTable modes({"point", "mode", "rate", "shift", "parity", "qbar", "ipr", "overlap"});
        ctx.provenance(modes);
        for (std::size_t i = 0; i < res.size(); ++i)
            for (std::size_t n = 0; n < res[i].modes.size(); ++n) {
                const auto& m = res[i].modes[n];
                modes.add_row({long(i), long(n), m.rate(), m.shift(), long(m.parity), m.qbar, m.ipr, m.overlap});
            }
        ctx.save(modes, sibling(ctx.main_path, "_modes.csv"));
    }
}

// ---------------------------------------------------------------------------

std::vector<std::string> trajectory_columns()
{
    return {"point", "time", "pop_s_array1", "pop_s_array2", "pop_e_total", "re_c1", "im_c1", "re_c2",
            "im_c2",  "re_cb", "im_cb",       "re_cd",        "im_cd"};
}

void add_trajectory(CsvTable& t, std::size_t point, const dyn::TransferTrajectory& tr)
{
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        t.add_row({long(point), tr.times[k], tr.pop_s1[k], tr.pop_s2[k], tr.pop_e[k], tr.c1[k].real(),
                   tr.c1[k].imag(), tr.c2[k].real(), tr.c2[k].imag(), tr.cb[k].real(), tr.cb[k].imag(),
                   tr.cd[k].real(), tr.cd[k].imag()});
}

double resolve_omega(const Config& c, double automatic)
{
    const std::string v = c.get_string("transfer.omega", "auto");
    return v == "auto" ? automatic : c.get_double("transfer.omega", 0.0);
}

double resolve_t_end(const Config& c, double omega, double fallback)
{
    const std::string v = c.get_string("transfer.t_end", "auto");
    if (v != "auto")
        return c.get_double("transfer.t_end", 0.0);
    return omega > 0.0 ? c.get_double("transfer.t_factor", 1.5) * kPi / omega : fallback;
}

void cmd_transfer(Context& ctx)
{
    struct Point {
        LatticeSpec spec;
        double gamma_d = 0, gamma_b = 0, delta_d = 0, omega = 0;
        double fidelity = 0, t_at_max = 0, law = 0, four_mode = 0;
        double gamma_tilde = NAN, gamma_tilde_analytic = NAN;
        int fit_points = 0;
        dyn::TransferTrajectory traj;
    };
    const std::string model = ctx.opts.config.get_string("transfer.model", "four_mode");
    if (model != "four_mode" && model != "full" && model != "memory")
        throw ConfigError("key 'transfer.model': expected four_mode, full or memory, got '" + model + "'");
    const bool lattice_model = model != "four_mode";

    const auto res = run_points<Point>(ctx, [&](const SweepPoint& pt) {
        const Config& c = pt.config;
        Point r;
        const int samples = static_cast<int>(c.get_int("transfer.samples", 2000));
        if (model == "four_mode") {
            r.gamma_d = c.get_double("transfer.gamma_d", 1e-3);
            r.gamma_b = c.get_double("transfer.gamma_b", 1.0);
            r.omega = resolve_omega(c, std::sqrt(r.gamma_d * r.gamma_b / 8.0));
            an::TransferParams p{r.gamma_d, r.gamma_b, r.omega, 0.0, 0.0};
            r.traj = dyn::integrate_four_mode(p, resolve_t_end(c, r.omega, 100.0), samples);
            r.fidelity = r.traj.fidelity;
            r.t_at_max = r.traj.t_at_max;
            r.four_mode = r.fidelity;
            if (r.gamma_d > 0.0 && r.gamma_d < r.gamma_b)
                r.law = an::transfer_fidelity(r.gamma_d, r.gamma_b).fidelity;
            return r;
        }

        // Near cos(k0 L) = 0 both parity modes decay at ~Gamma and are shifted
        // by ~Gamma/2, so the memory model takes its curvature, intrinsic
        // gamma_d and single-array shift from the nearest separation with
        // |cos(k0 L)| = 1.
        double reference = NAN;
        if (model == "memory")
            reference = c.get_double("transfer.reference_separation",
                                     std::round(2.0 * c.get_double("lattice.separation", 1.0)) / 2.0);
        r.spec = lattice_from(c, ctx.inner_jobs(), reference).spec;
        const DarkBrightPair pair = dark_bright(r.spec);
        r.gamma_d = pair.dark.rate();
        r.gamma_b = pair.bright.rate();
        if (model == "memory") {
            LatticeSpec ref = r.spec;
            ref.separation = reference;
            const DarkBrightPair rp = dark_bright(ref);
            r.gamma_d = rp.dark.rate();
            r.gamma_b = rp.bright.rate();
            r.delta_d = c.has("transfer.delta_d") ? c.get_double("transfer.delta_d", 0.0) : rp.shift;
        } else {
            r.delta_d = c.has("transfer.delta_d") ? c.get_double("transfer.delta_d", 0.0) : pair.shift;
        }
        dyn::FullTransferSetup setup;
        setup.spec = r.spec;
        setup.delta_d = r.delta_d;
        setup.dark = pair.dark.vector;
        setup.bright = pair.bright.vector;
        if (model == "full") {
            r.omega = resolve_omega(c, std::sqrt(r.gamma_d * r.gamma_b / 8.0));
            setup.omega = r.omega;
            setup.drive = {c.get_bool("transfer.drive_array1", true), c.get_bool("transfer.drive_array2", true)};
            r.traj = dyn::simulate_transfer_full(setup, resolve_t_end(c, r.omega, 100.0), samples);
            r.fidelity = r.traj.fidelity;
            r.t_at_max = r.traj.t_at_max;
            if (r.omega > 0.0) {
                an::TransferParams p{r.gamma_d, r.gamma_b, r.omega, 0.0, 0.0};
                r.four_mode = dyn::integrate_four_mode(p, resolve_t_end(c, r.omega, 100.0), samples).fidelity;
            }
            if (r.gamma_d < r.gamma_b)
                r.law = an::transfer_fidelity(r.gamma_d, r.gamma_b).fidelity;
        } else {
            const double G = an::big_gamma(r.spec.spacing);
            r.omega = resolve_omega(c, 0.01 * G);
            setup.omega = r.omega;
            const double rate = 2.0 * r.omega * r.omega / G;
            const std::string te = c.get_string("transfer.t_end", "auto");
            const double t_end = te == "auto" ? (rate > 0.0 ? 0.5 / rate : 100.0) : c.get_double("transfer.t_end", 0.0);
            const dyn::MemoryRelease m = dyn::simulate_memory_release(setup, t_end, samples);
            r.traj = m.trajectory;
            r.gamma_tilde = m.fit_ok ? m.gamma_tilde : NAN;
            r.fit_points = m.fit_points;
            r.gamma_tilde_analytic =
                an::memory_emission(r.omega, G, r.gamma_d, k0 * r.spec.separation).gamma_tilde;
        }
        return r;
    });

    std::vector<std::string> cols = ctx.axis_columns();
    if (lattice_model)
        cols = concat(cols, lattice_columns());
    cols = concat(cols, {"gamma_d", "gamma_b", "delta_d", "omega"});
    if (model == "memory")
        cols = concat(cols, {"gamma_tilde", "gamma_tilde_analytic", "fit_points"});
    else
        cols = concat(cols, {"fidelity", "t_at_max", "fidelity_four_mode", "fidelity_law", "pi_over_omega"});
    CsvTable summary(cols);
    ctx.provenance(summary);
    summary.meta("model", model);
    CsvTable traj(trajectory_columns());
    ctx.provenance(traj);
    nlohmann::ordered_json js = nlohmann::ordered_json::array();

    for (std::size_t i = 0; i < res.size(); ++i) {
        const Point& r = res[i];
        std::vector<Cell> row = ctx.axis_cells(ctx.points[i]);
        if (lattice_model)
            row = concat(row, lattice_cells(r.spec));
        row = concat(row, {r.gamma_d, r.gamma_b, r.delta_d, r.omega});
        nlohmann::ordered_json item;
        item["point"] = i;
        item["omega"] = r.omega;
        if (model == "memory") {
            row = concat(row, {r.gamma_tilde, r.gamma_tilde_analytic, long(r.fit_points)});
            item["gamma_tilde"] = r.gamma_tilde;
        } else {
            const double pio = r.omega > 0.0 ? kPi / r.omega : NAN;
            row = concat(row, {r.fidelity, r.t_at_max, r.four_mode, r.law, pio});
            item["fidelity"] = r.fidelity;
            item["t_max"] = r.t_at_max;
        }
        summary.add_row(std::move(row));
        add_trajectory(traj, i, r.traj);
        js.push_back(item);
    }
    ctx.save(summary, ctx.main_path);
    ctx.save(traj, sibling(ctx.main_path, "_trajectory.csv"));
    nlohmann::ordered_json doc;
    doc["tool"] = std::string("darklattice ") + kVersion;
    doc["config_digest"] = hex64(ctx.opts.config.digest());
    doc["seed"] = ctx.opts.seed;
    doc["points"] = js;
    const std::string jpath = sibling(ctx.main_path, ".json");
    write_text(jpath, doc.dump(2) + "\n");
    ctx.written.push_back(jpath);
}

// ---------------------------------------------------------------------------

void cmd_probe(Context& ctx)
{
    struct Row {
        std::string scheme;
        double delta, R, R_analytic;
    };
    struct Point {
        LatticeSpec spec;
        double gamma_d = 0, gamma_b = 0, delta_d = 0;
        std::vector<Row> rows;
        long skipped = 0;
    };
    const auto res = run_points<Point>(ctx, [&](const SweepPoint& pt) {
        const Config& c = pt.config;
        Point r;
        r.spec = lattice_from(c, ctx.inner_jobs()).spec;
        if (r.spec.curvature != Curvature::Gaussian)
            throw ConfigError("probe: needs lattice.curvature = gaussian (the probe mode sets the curvature)");
        const DarkBrightPair pair = dark_bright(r.spec);
        r.gamma_d = pair.dark.rate();
        r.gamma_b = pair.bright.rate();
        r.delta_d = c.has("probe.delta_d") ? c.get_double("probe.delta_d", 0.0) : pair.shift;

        const std::string which = c.get_string("probe.scheme", "both");
        if (which != "both" && which != "symmetric" && which != "opposite")
            throw ConfigError("key 'probe.scheme': expected symmetric, opposite or both");
        const int npts = static_cast<int>(c.get_int("probe.points", 201));
        const double span = c.get_double("probe.span", 3.0);
        if (npts < 2 || !(span > 0.0))
            throw ConfigError("probe: need probe.points >= 2 and probe.span > 0");

        for (Scheme sch : {Scheme::Symmetric, Scheme::Opposite}) {
            const bool sym = sch == Scheme::Symmetric;
            if ((sym && which == "opposite") || (!sym && which == "symmetric"))
                continue;
            const double width = sym ? r.gamma_b : std::sqrt(r.gamma_d * r.gamma_b);
            ProbeConfig pc;
            pc.spec = r.spec;
            pc.mode = GaussianMode{r.spec.waist};
            pc.delta_d = r.delta_d;
            pc.scheme = sch;
            pc.jobs = ctx.inner_jobs();
            for (int k = 0; k < npts; ++k)
                pc.detunings.push_back(-span * width + 2.0 * span * width * k / (npts - 1));
            const ReflectivityCurve curve = reflectivity_numeric(pc);
            r.skipped += static_cast<long>(curve.skipped.size());
            for (std::size_t k = 0; k < curve.R.size(); ++k)
                r.rows.push_back({sym ? "symmetric" : "opposite", curve.detunings[k], curve.R[k],
                                  an::reflectivity_analytic(curve.detunings[k], r.gamma_d, r.gamma_b, sch)});
        }
        return r;
    });

    CsvTable t(concat(concat(ctx.axis_columns(), lattice_columns()),
                      {"gamma_d", "gamma_b", "delta_d", "scheme", "delta", "R", "R_analytic"}));
    ctx.provenance(t);
    long skipped = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& r = res[i];
        skipped += r.skipped;
        for (const auto& row : r.rows)
            t.add_row(concat(concat(ctx.axis_cells(ctx.points[i]), lattice_cells(r.spec)),
                             {r.gamma_d, r.gamma_b, r.delta_d, row.scheme, row.delta, row.R, row.R_analytic}));
    }
    t.meta("skipped_singular", std::to_string(skipped));
    ctx.save(t, ctx.main_path);
}

// ---------------------------------------------------------------------------

struct AnalyticKind {
    std::vector<std::string> columns;
    std::function<std::vector<Cell>(const Config&)> eval;
};

an::Branch parse_branch(const Config& c, const std::string& key)
{
    const std::string b = c.get_string(key, "dark");
    if (b == "dark")
        return an::Branch::Dark;
    if (b == "bright")
        return an::Branch::Bright;
    throw ConfigError("key '" + key + "': expected dark or bright, got '" + b + "'");
}

Scheme parse_scheme(const Config& c, const std::string& key)
{
    const std::string s = c.get_string(key, "symmetric");
    if (s == "symmetric")
        return Scheme::Symmetric;
    if (s == "opposite")
        return Scheme::Opposite;
    throw ConfigError("key '" + key + "': expected symmetric or opposite, got '" + s + "'");
}

AnalyticKind analytic_kind(const std::string& kind)
{
    if (kind == "big_gamma")
        return {{"spacing", "Gamma"}, [](const Config& c) -> std::vector<Cell> {
                    const double d = c.get_double("analytic.spacing", 0.5);
                    return {d, an::big_gamma(d)};
                }};
    if (kind == "gamma_infinite")
        return {{"spacing", "separation", "qx", "qy", "parity", "rate", "guided"},
                [](const Config& c) -> std::vector<Cell> {
                    an::InfiniteArrayParams p;
                    p.spacing = c.get_double("analytic.spacing", 0.5);
                    p.separation = c.get_double("analytic.separation", 1.0);
                    p.q = Eigen::Vector2d(c.get_double("analytic.qx", 0.0), c.get_double("analytic.qy", 0.0));
                    p.parity = static_cast<int>(c.get_int("analytic.parity", 1));
                    const auto g = an::gamma_infinite(p);
                    return {p.spacing, p.separation, p.q.x(), p.q.y(), long(p.parity), g ? *g : NAN, long(!g)};
                }};
    if (kind == "shifts")
        return {{"separation", "Gamma", "delta_d", "symmetric", "antisymmetric"},
                [](const Config& c) -> std::vector<Cell> {
                    const double L = c.get_double("analytic.separation", 1.0);
                    const double G = c.get_double("analytic.Gamma", 1.0);
                    const double dd = c.get_double("analytic.delta_d", 0.0);
                    const auto s = an::sym_antisym_shifts(L, G, dd);
                    return {L, G, dd, s.symmetric, s.antisymmetric};
                }};
    if (kind == "transfer_fidelity")
        return {{"gamma_d", "gamma_b", "fidelity", "fidelity_linear", "omega_opt", "t_max", "t_peak"},
                [](const Config& c) -> std::vector<Cell> {
                    const double gd = c.get_double("analytic.gamma_d", 1e-3);
                    const double gb = c.get_double("analytic.gamma_b", 1.0);
                    const auto f = an::transfer_fidelity(gd, gb);
                    return {gd, gb, f.fidelity, f.fidelity_linear, f.omega_opt, f.t_max, f.t_peak};
                }};
    if (kind == "four_mode")
        return {{"t", "gamma_d", "gamma_b", "omega", "re_c2", "im_c2", "in_window"},
                [](const Config& c) -> std::vector<Cell> {
                    an::TransferParams p;
                    p.gamma_d = c.get_double("analytic.gamma_d", 1e-3);
                    p.gamma_b = c.get_double("analytic.gamma_b", 1.0);
                    p.omega = c.get_double("analytic.omega", std::sqrt(p.gamma_d * p.gamma_b / 8.0));
                    const double t = c.get_double("analytic.t", 0.0);
                    const auto v = an::four_mode_closed_form(t, p);
                    return {t, p.gamma_d, p.gamma_b, p.omega, v.c2.real(), v.c2.imag(), long(v.in_validity_window)};
                }};
    if (kind == "reflectivity")
        return {{"delta", "gamma_d", "gamma_b", "scheme", "R", "hwhm"}, [](const Config& c) -> std::vector<Cell> {
                    const double D = c.get_double("analytic.delta", 0.0);
                    const double gd = c.get_double("analytic.gamma_d", 1e-3);
                    const double gb = c.get_double("analytic.gamma_b", 1.0);
                    const Scheme s = parse_scheme(c, "analytic.scheme");
                    return {D, gd, gb, c.get_string("analytic.scheme", "symmetric"),
                            an::reflectivity_analytic(D, gd, gb, s), an::reflectivity_hwhm(gd, gb, s)};
                }};
    if (kind == "lamb_dicke")
        return {{"gamma", "eta", "n_th", "renormalized", "warn"}, [](const Config& c) -> std::vector<Cell> {
                    const double g = c.get_double("analytic.gamma", 1e-3);
                    const double eta = c.get_double("analytic.eta", 0.1);
                    const double n = c.get_double("analytic.n_th", 0.0);
                    const auto r = an::lamb_dicke_renorm(g, eta, n);
                    return {g, eta, n, r.value, long(r.warn)};
                }};
    if (kind == "defect")
        return {{"gamma_d", "p", "rate"}, [](const Config& c) -> std::vector<Cell> {
                    const double g = c.get_double("analytic.gamma_d", 1e-3);
                    const double p = c.get_double("analytic.p", 0.01);
                    return {g, p, -2.0 * an::defect_renorm(cplx(0.0, -0.5 * g), p).imag()};
                }};
    if (kind == "nonmarkov")
        return {{"t", "Gamma", "gamma_d", "gamma_tau", "kappa_l", "branch", "amplitude", "photon_number"},
                [](const Config& c) -> std::vector<Cell> {
                    const double t = c.get_double("analytic.t", 0.0);
                    const double G = c.get_double("analytic.Gamma", 1.0);
                    const double gd = c.get_double("analytic.gamma_d", 0.0);
                    const double gt = c.get_double("analytic.gamma_tau", 0.0);
                    const double kl = c.get_double("analytic.kappa_l", 0.0);
                    const auto b = parse_branch(c, "analytic.branch");
                    const double a = an::nonmarkov_amplitude(t, G, gd, gt, kl, b);
                    return {t, G, gd, gt, kl, c.get_string("analytic.branch", "dark"), a, an::photon_number(gt, a)};
                }};
    if (kind == "memory")
        return {{"omega", "Gamma", "gamma_d", "k0L", "gamma_tilde", "forward", "backward", "warn"},
                [](const Config& c) -> std::vector<Cell> {
                    const double om = c.get_double("analytic.omega", 0.01);
                    const double G = c.get_double("analytic.Gamma", 1.0);
                    const double gd = c.get_double("analytic.gamma_d", 0.0);
                    const double kl = c.get_double("analytic.k0L", 0.5 * kPi);
                    const auto m = an::memory_emission(om, G, gd, kl);
                    return {om, G, gd, kl, m.gamma_tilde, m.forward, m.backward, long(m.warn)};
                }};
    throw ConfigError("key 'analytic.kind': unknown kind '" + kind + "'");
}

void cmd_analytic(Context& ctx)
{
    const AnalyticKind k = analytic_kind(ctx.opts.config.get_string("analytic.kind", "transfer_fidelity"));
    const auto rows = run_points<std::vector<Cell>>(ctx, [&](const SweepPoint& pt) { return k.eval(pt.config); });
    CsvTable t(concat(ctx.axis_columns(), k.columns));
    ctx.provenance(t);
    for (std::size_t i = 0; i < rows.size(); ++i)
        t.add_row(concat(ctx.axis_cells(ctx.points[i]), rows[i]));
    ctx.save(t, ctx.main_path);
}

// ---------------------------------------------------------------------------

void cmd_field(Context& ctx)
{
    struct Point {
        std::vector<Vec3> grid;
        CVector psi;
    };
    const auto res = run_points<Point>(ctx, [&](const SweepPoint& pt) {
        const Config& c = pt.config;
        const LatticeSpec spec = lattice_from(c, ctx.inner_jobs()).spec;
        const DarkBrightPair pair = dark_bright(spec);
        const std::string which = c.get_string("field.mode", "dark");
        if (which != "dark" && which != "bright")
            throw ConfigError("key 'field.mode': expected dark or bright");
        const CVector& amp = which == "dark" ? pair.dark.vector : pair.bright.vector;

        const std::string plane = c.get_string("field.plane", "xz");
        if (plane != "xz" && plane != "xy")
            throw ConfigError("key 'field.plane': expected xz or xy");
        const double half = 0.5 * spec.separation;
        const double u0 = c.get_double("field.u_min", -spec.l_perp());
        const double u1 = c.get_double("field.u_max", spec.l_perp());
        const double v0 = c.get_double("field.v_min", plane == "xz" ? -1.5 * half : -spec.l_perp());
        const double v1 = c.get_double("field.v_max", plane == "xz" ? 1.5 * half : spec.l_perp());
        const int nu = static_cast<int>(c.get_int("field.nu", 61));
        const int nv = static_cast<int>(c.get_int("field.nv", 61));
        const double offset = c.get_double("field.offset", 0.0);
        if (nu < 2 || nv < 2)
            throw ConfigError("field: need field.nu >= 2 and field.nv >= 2");
        Point r;
        for (int a = 0; a < nu; ++a)
            for (int b = 0; b < nv; ++b) {
                const double u = u0 + (u1 - u0) * a / (nu - 1), v = v0 + (v1 - v0) * b / (nv - 1);
                r.grid.push_back(plane == "xz" ? Vec3(u, offset, v) : Vec3(u, v, offset));
            }
        r.psi = field_profile(amp, positions(build_arrays(spec)), r.grid, circular_polarization());
        return r;
    });
    CsvTable t(concat(ctx.axis_columns(), {"x", "y", "z", "re_psi", "im_psi", "intensity"}));
    ctx.provenance(t);
    for (std::size_t i = 0; i < res.size(); ++i)
        for (std::size_t k = 0; k < res[i].grid.size(); ++k) {
            const Vec3& g = res[i].grid[k];
            const cplx v = res[i].psi[static_cast<Eigen::Index>(k)];
            t.add_row(concat(ctx.axis_cells(ctx.points[i]), {g.x(), g.y(), g.z(), v.real(), v.imag(), std::norm(v)}));
        }
    ctx.save(t, ctx.main_path);
}

// ---------------------------------------------------------------------------

void cmd_defects(Context& ctx)
{
    struct Point {
        LatticeSpec spec;
        double p = 0, gamma_d = 0;
        DefectStats stats;
        std::uint64_t seed = 0;
    };
    const auto res = run_points<Point>(ctx, [&](const SweepPoint& pt) {
        const Config& c = pt.config;
        Point r;
        r.spec = lattice_from(c, ctx.inner_jobs()).spec;
        r.p = c.get_double("defects.p", 0.01);
        const int n = static_cast<int>(c.get_int("defects.realizations", 100));
        r.seed = task_seed(ctx.opts.seed, pt.index);
        r.gamma_d = dark_bright(r.spec).dark.rate();
        r.stats = defect_monte_carlo(r.spec, r.p, n, r.seed, ctx.inner_jobs());
        r.stats.dark_rates.clear();
        r.stats.bright_rates.clear();
        return r;
    });
    CsvTable t(concat(concat(ctx.axis_columns(), lattice_columns()),
                      {"p", "gamma_d_ideal", "mean_dark", "stderr_dark", "mean_bright", "stderr_bright",
                       "predicted", "rel_err", "realizations", "resampled", "task_seed"}));
    ctx.provenance(t);
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& r = res[i];
        const double pred = r.gamma_d * (1.0 - r.p) + r.p;
        t.add_row(concat(concat(ctx.axis_cells(ctx.points[i]), lattice_cells(r.spec)),
                         {r.p, r.gamma_d, r.stats.mean_dark, r.stats.stderr_dark, r.stats.mean_bright,
                          r.stats.stderr_bright, pred, std::abs(r.stats.mean_dark - pred) / pred,
                          long(r.stats.realizations), long(r.stats.resampled), hex64(r.seed)}));
    }
    ctx.save(t, ctx.main_path);
}

// ---------------------------------------------------------------------------

void cmd_nonmarkov(Context& ctx)
{
    const std::string mode = ctx.opts.config.get_string("nonmarkov.mode", "amplitude");
    if (mode == "amplitude") {
        struct Point {
            double gamma_tau = 0;
            dyn::DelayTrace trace;
            std::vector<double> first_order;
        };
        const auto res = run_points<Point>(ctx, [&](const SweepPoint& pt) {
            const Config& c = pt.config;
            const double G = c.get_double("nonmarkov.Gamma", 1.0);
            const double gd = c.get_double("nonmarkov.gamma_d", 0.0);
            const double kl = c.get_double("nonmarkov.kappa_l", 0.0);
            const auto br = parse_branch(c, "nonmarkov.branch");
            const std::string h = c.get_string("nonmarkov.history", "constant");
            if (h != "constant" && h != "zero")
                throw ConfigError("key 'nonmarkov.history': expected constant or zero");
            Point r;
            r.gamma_tau = c.get_double("nonmarkov.gamma_tau", 0.1);
            r.trace = dyn::integrate_delay(G, gd, r.gamma_tau, kl, br, 1.0, c.get_double("nonmarkov.t_end", 10.0),
                                           static_cast<int>(c.get_int("nonmarkov.samples", 200)),
                                           h == "zero" ? dyn::History::Zero : dyn::History::Constant);
            for (double t : r.trace.times)
                r.first_order.push_back(an::nonmarkov_amplitude(t, G, gd, r.gamma_tau, kl, br));
            return r;
        });
        CsvTable t(concat(ctx.axis_columns(), {"gamma_tau", "t", "re_c", "im_c", "first_order"}));
        ctx.provenance(t);
        t.meta("mode", mode);
        for (std::size_t i = 0; i < res.size(); ++i)
            for (std::size_t k = 0; k < res[i].trace.times.size(); ++k)
                t.add_row(concat(ctx.axis_cells(ctx.points[i]),
                                 {res[i].gamma_tau, res[i].trace.times[k], res[i].trace.values[k].real(),
                                  res[i].trace.values[k].imag(), res[i].first_order[k]}));
        ctx.save(t, ctx.main_path);
        return;
    }
    if (mode != "transfer")
        throw ConfigError("key 'nonmarkov.mode': expected amplitude or transfer, got '" + mode + "'");

    struct Point {
        double gamma_tau = 0, gamma_d = 0, Gamma = 1;
        dyn::DelayedOptimum opt;
    };
    const auto res = run_points<Point>(ctx, [&](const SweepPoint& pt) {
        const Config& c = pt.config;
        Point r;
        r.Gamma = c.get_double("nonmarkov.Gamma", 1.0);
        r.gamma_d = c.get_double("nonmarkov.gamma_d", 0.5e-4);
        r.gamma_tau = c.get_double("nonmarkov.gamma_tau", 0.0);
        r.opt = dyn::optimize_delayed_drive(r.Gamma, r.gamma_d, r.gamma_tau, c.get_double("nonmarkov.kappa_l", 0.0));
        return r;
    });
    CsvTable t(concat(ctx.axis_columns(), {"gamma_tau", "gamma_d", "omega_opt", "omega_scaled", "fidelity",
                                           "infidelity", "t_max", "t_scaled"}));
    ctx.provenance(t);
    t.meta("mode", mode);
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& r = res[i];
        const auto law = an::transfer_fidelity(r.gamma_d, 2.0 * r.Gamma + r.gamma_d);
        t.add_row(concat(ctx.axis_cells(ctx.points[i]),
                         {r.gamma_tau, r.gamma_d, r.opt.omega,
                          r.opt.omega / law.omega_opt * std::sqrt(1.0 + 0.75 * r.gamma_tau), r.opt.fidelity,
                          1.0 - r.opt.fidelity, r.opt.t_max, r.opt.t_max / law.t_peak / (1.0 + 0.5 * r.gamma_tau)}));
    }
    ctx.save(t, ctx.main_path);
}

} // namespace

std::vector<std::string> run_command(const RunOptions& opts)
{
    init_linalg();
    Context ctx{opts, expand_sweep(opts.config), resolve_output(opts.out, opts.command), {}};
    if (opts.jobs < 1)
        throw ConfigError("--jobs must be at least 1");
    if (opts.command == "spectrum")
        cmd_spectrum(ctx);
    else if (opts.command == "transfer")
        cmd_transfer(ctx);
    else if (opts.command == "probe")
        cmd_probe(ctx);
    else if (opts.command == "analytic")
        cmd_analytic(ctx);
    else if (opts.command == "field")
        cmd_field(ctx);
    else if (opts.command == "defects")
        cmd_defects(ctx);
    else if (opts.command == "nonmarkov")
        cmd_nonmarkov(ctx);
    else
        throw ConfigError("unknown command '" + opts.command + "'");
    return ctx.written;
}

} // namespace darklattice::cli
