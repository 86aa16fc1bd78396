#include "darklattice/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "darklattice/hamiltonian.hpp"
#include "darklattice/kernels.hpp"

namespace darklattice::dynamics {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const CVector& err, const CVector& y0, const CVector& y1, const Rk45Options& opt)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        acc += std::norm(err[i]) / (sc * sc);
    }
    return std::sqrt(acc / std::max<Eigen::Index>(1, err.size()));
}

} // namespace

void integrate_rk45(const Rhs& f, CVector& y, double t0, const std::vector<double>& outputs,
                    const Observer& observe, const Rk45Options& opt)
{
    const Eigen::Index n = y.size();
    CVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
    double t = t0;
    observe(t, y);
    if (outputs.empty())
        return;

    f(t, y, k1);
    double h = opt.h_initial;
    if (h <= 0.0) {
        const double fy = k1.norm(), yn = y.norm();
        h = (fy > 0.0 && yn > 0.0) ? 0.01 * yn / fy : 1e-3;
        h = std::min(h, outputs.back() - t0);
    }

    double norm_prev = y.squaredNorm();
    long steps = 0;
    for (double target : outputs) {
        if (target < t)
            throw IntegrationError("integrate_rk45: output times must be nondecreasing");
        while (t < target) {
            if (++steps > opt.max_steps)
                throw IntegrationError("integrate_rk45: step budget exhausted");
            bool clipped = false;
            double hs = h;
            if (t + hs >= target) {
                hs = target - t;
                clipped = true;
            }

            tmp = y + hs * a21 * k1;
            f(t + c2 * hs, tmp, k2);
            tmp = y + hs * (a31 * k1 + a32 * k2);
            f(t + c3 * hs, tmp, k3);
            tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
            f(t + c4 * hs, tmp, k4);
            tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(t + c5 * hs, tmp, k5);
            tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(t + hs, tmp, k6);
            ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f(t + hs, ynew, k7);
            err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double en = error_norm(err, y, ynew, opt);
            const double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            if (en <= 1.0) {
                t = clipped ? target : t + hs;
                y.swap(ynew);
                k1.swap(k7);
                if (opt.check_norm) {
                    const double nn = y.squaredNorm();
                    if (nn > norm_prev * (1.0 + 10.0 * opt.rtol) + opt.atol)
                        throw IntegrationError("integrate_rk45: norm increased under dissipative evolution");
                    norm_prev = std::min(norm_prev, nn);
                }
                // A clipped step says nothing about the natural step size.
                if (!clipped || fac < 1.0)
                    h = hs * std::clamp(fac, 0.2, 5.0);
            } else {
                h = hs * std::clamp(fac, 0.2, 1.0);
                if (h < opt.h_min)
                    throw IntegrationError("integrate_rk45: step size underflow");
            }
        }
        observe(t, y);
    }
}

void extract_fidelity(TransferTrajectory& traj)
{
    const std::size_t n = traj.c2.size();
    if (n == 0)
        return;
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::norm(traj.c2[i]) > std::norm(traj.c2[imax]))
            imax = i;
    traj.fidelity = std::norm(traj.c2[imax]);
    traj.t_at_max = traj.times[imax];
    if (imax == 0 || imax + 1 >= n)
        return;
    // Parabola through the three samples around the discrete maximum
    // (uniform spacing is not assumed).
    const double x0 = traj.times[imax - 1], x1 = traj.times[imax], x2 = traj.times[imax + 1];
    const double y0 = std::norm(traj.c2[imax - 1]), y1 = std::norm(traj.c2[imax]), y2 = std::norm(traj.c2[imax + 1]);
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (curv >= 0.0)
        return;
    const double slope = d01 + curv * (x1 - x0);  // derivative at x1 of the interpolant
    const double dx = -slope / (2.0 * curv);
    if (std::abs(dx) > std::max(x1 - x0, x2 - x1))
        return;
    traj.t_at_max = x1 + dx;
    traj.fidelity = std::min(1.0, y1 + slope * dx + curv * dx * dx);
}

namespace {

std::vector<double> uniform_times(double t_end, int samples)
{
    if (!(t_end > 0.0) || samples < 1)
        throw IntegrationError("need t_end > 0 and at least one sample");
    std::vector<double> out(samples);
    for (int i = 0; i < samples; ++i)
        out[i] = t_end * (i + 1) / samples;
    return out;
}

} // namespace

TransferTrajectory integrate_four_mode(const TransferParams& p, double t_end, int samples,
                                       const FourModeInit& init, const Rk45Options& opt)
{
    if (p.gamma_d < 0.0 || p.gamma_b < 0.0)
        throw IntegrationError("integrate_four_mode: rates must be nonnegative");
    const cplx a = -I * p.omega / std::sqrt(2.0);
    const double hd = 0.5 * p.gamma_d, hb = 0.5 * p.gamma_b;
    Rhs f = [=](double, const CVector& y, CVector& dy) {
        dy[0] = a * (y[2] + y[3]);
        dy[1] = a * (y[2] - y[3]);
        dy[2] = -hb * y[2] + a * (y[0] + y[1]);
        dy[3] = -hd * y[3] + a * (y[0] - y[1]);
    };
    CVector y(4);
    y << init.c1, init.c2, init.cb, init.cd;

    TransferTrajectory traj;
    Observer obs = [&](double t, const CVector& s) {
        traj.times.push_back(t);
        traj.c1.push_back(s[0]);
        traj.c2.push_back(s[1]);
        traj.cb.push_back(s[2]);
        traj.cd.push_back(s[3]);
        traj.pop_s1.push_back(std::norm(s[0]));
        traj.pop_s2.push_back(std::norm(s[1]));
        traj.pop_e.push_back(std::norm(s[2]) + std::norm(s[3]));
    };
    integrate_rk45(f, y, 0.0, uniform_times(t_end, samples), obs, opt);
    extract_fidelity(traj);
    return traj;
}

namespace {

struct FullSystem {
    CMatrix A;  // -i (H - delta_d)
    Eigen::VectorXd drive;  // per-site Omega * mask
    Eigen::Index n = 0;
};

FullSystem make_full_system(const FullTransferSetup& s)
{
    const auto sites = build_arrays(s.spec);
    const auto pos = positions(sites);
    FullSystem sys;
    sys.n = static_cast<Eigen::Index>(pos.size());
    sys.A = build_scalar(pos).matrix;
    sys.A.diagonal().array() -= s.delta_d;
    sys.A *= -I;
    sys.drive.resize(sys.n);
    for (Eigen::Index j = 0; j < sys.n; ++j) {
        const bool on = pos[j].z() < 0.0 ? s.drive.array1 : s.drive.array2;
        sys.drive[j] = on ? s.omega : 0.0;
    }
    return sys;
}

TransferTrajectory run_full(const FullTransferSetup& setup, double t_end, int samples, const Rk45Options& opt)
{
    const Eigen::Index n = static_cast<Eigen::Index>(setup.spec.num_sites());
    if (setup.dark.size() != n)
        throw IntegrationError("full simulation needs the dark mode on the full site basis");
    const FullSystem sys = make_full_system(setup);
    const Eigen::Index half = n / 2;

    // Single-array dark profile u, unit norm; S1 = sum u_j s_(j,1), S2 likewise.
    CVector u = setup.dark.head(half);
    u /= u.norm();
    const CVector vd = setup.dark.normalized();
    const CVector vb = setup.bright.size() == n ? CVector(setup.bright.normalized()) : CVector::Zero(n);

    CVector y = CVector::Zero(2 * n);
    y.segment(n, half) = u;

    Rhs f = [&sys, n](double, const CVector& s, CVector& ds) {
        kernels::matvec(sys.A.data(), n, n, n, s.data(), ds.data());
        for (Eigen::Index j = 0; j < n; ++j) {
            ds[j] += -I * sys.drive[j] * s[n + j];
            ds[n + j] = -I * sys.drive[j] * s[j];
        }
    };

    TransferTrajectory traj;
    Observer obs = [&](double t, const CVector& s) {
        const cplx* e = s.data();
        const cplx* sa = s.data() + n;
        traj.times.push_back(t);
        traj.pop_s1.push_back(kernels::norm2(half, sa));
        traj.pop_s2.push_back(kernels::norm2(half, sa + half));
        traj.pop_e.push_back(kernels::norm2(n, e));
        traj.c1.push_back(kernels::dotc(half, u.data(), sa));
        traj.c2.push_back(kernels::dotc(half, u.data(), sa + half));
        traj.cd.push_back(kernels::dotc(n, vd.data(), e));
        traj.cb.push_back(kernels::dotc(n, vb.data(), e));
    };
    integrate_rk45(f, y, 0.0, uniform_times(t_end, samples), obs, opt);
    extract_fidelity(traj);
    return traj;
}

} // namespace

TransferTrajectory simulate_transfer_full(const FullTransferSetup& setup, double t_end, int samples,
                                          const Rk45Options& opt)
{
    return run_full(setup, t_end, samples, opt);
}

MemoryRelease simulate_memory_release(const FullTransferSetup& setup, double t_end, int samples,
                                      const Rk45Options& opt)
{
    FullTransferSetup s = setup;
    s.drive = DriveMask{true, false};
    MemoryRelease out;
    out.trajectory = run_full(s, t_end, samples, opt);

    // Least-squares line through ln(pop_s1) over samples with e-population < 1e-2.
    const auto& tr = out.trajectory;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        if (tr.pop_e[i] >= 1e-2 || tr.pop_s1[i] <= 0.0)
            continue;
        const double x = tr.times[i], yv = std::log(tr.pop_s1[i]);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
        ++m;
    }
    out.fit_points = m;
    if (m >= 3) {
        const double den = m * sxx - sx * sx;
        out.gamma_tilde = -(m * sxy - sx * sy) / den;
        out.fit_ok = true;
    }
    return out;
}

} // namespace darklattice::dynamics
