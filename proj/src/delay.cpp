#include "darklattice/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace darklattice::dynamics {

double default_delay_step(double tau, double max_rate)
{
    if (!(max_rate > 0.0))
        throw IntegrationError("default_delay_step: need a positive rate scale");
    const double h = 0.01 / max_rate;
    return tau > 0.0 ? std::min(tau / 50.0, h) : h;
}

namespace {

// Grid history y(t_n), y'(t_n) over the last `cap` steps; cubic Hermite in between.
class HistoryBuffer {
public:
    HistoryBuffer(Eigen::Index dim, std::size_t cap, double dt, History pre, const CVector& y0)
        : y_(cap, CVector::Zero(dim)), f_(cap, CVector::Zero(dim)), dt_(dt), pre_(pre), y0_(y0)
    {
    }

    void store(long n, const CVector& y, const CVector& f)
    {
        const std::size_t slot = static_cast<std::size_t>(n) % y_.size();
        y_[slot] = y;
        f_[slot] = f;
        newest_ = n;
    }

    // Value at time s <= t_newest.
    void eval(double s, CVector& out) const
    {
        if (s < 0.0) {
            if (pre_ == History::Constant)
                out = y0_;
            else
                out.setZero();
            return;
        }
        long m = static_cast<long>(std::floor(s / dt_));
        m = std::min(m, newest_ - 1);
        if (m < 0) {  // only the t = 0 sample exists yet and s sits on it
            out = y_[0];
            return;
        }
        if (newest_ - m >= static_cast<long>(y_.size()))
            throw IntegrationError("delay history underflow");
        const double th = (s - m * dt_) / dt_;
        const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
        const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
        const std::size_t a = static_cast<std::size_t>(m) % y_.size();
        const std::size_t b = static_cast<std::size_t>(m + 1) % y_.size();
        out = h00 * y_[a] + (h10 * dt_) * f_[a] + h01 * y_[b] + (h11 * dt_) * f_[b];
    }

private:
    std::vector<CVector> y_, f_;
    double dt_;
    History pre_;
    CVector y0_;
    long newest_ = -1;
};

} // namespace

void integrate_linear_dde(const CMatrix& A, const CMatrix& B, double tau, CVector& y, double t_end, double dt,
                          History history, const std::function<void(double, const CVector&)>& observe)
{
    const Eigen::Index n = y.size();
    if (A.rows() != n || A.cols() != n || B.rows() != n || B.cols() != n)
        throw IntegrationError("integrate_linear_dde: dimension mismatch");
    if (!(dt > 0.0) || !(t_end >= 0.0) || tau < 0.0)
        throw IntegrationError("integrate_linear_dde: need dt > 0, t_end >= 0, tau >= 0");
    if (tau > 0.0 && dt > tau / 10.0)
        throw IntegrationError("integrate_linear_dde: step exceeds tau/10");

    const long steps = std::max(1L, static_cast<long>(std::ceil(t_end / dt - 1e-9)));
    const double h = t_end > 0.0 ? t_end / steps : dt;

    CVector k1(n), k2(n), k3(n), k4(n), tmp(n), yd(n);
    observe(0.0, y);
    if (t_end == 0.0)
        return;

    if (tau == 0.0) {
        // No retardation: plain RK4 on (A + B).
        const CMatrix C = A + B;
        for (long s = 0; s < steps; ++s) {
            k1.noalias() = C * y;
            tmp = y + 0.5 * h * k1;
            k2.noalias() = C * tmp;
            tmp = y + 0.5 * h * k2;
            k3.noalias() = C * tmp;
            tmp = y + h * k3;
            k4.noalias() = C * tmp;
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            observe((s + 1) * h, y);
        }
        return;
    }

    const std::size_t cap = static_cast<std::size_t>(std::ceil(tau / h)) + 3;
    HistoryBuffer hist(n, cap, h, history, y);

    auto rhs = [&](double t, const CVector& state, CVector& out) {
        hist.eval(t - tau, yd);
        out.noalias() = A * state;
        out.noalias() += B * yd;
    };

    rhs(0.0, y, k1);
    hist.store(0, y, k1);
    for (long s = 0; s < steps; ++s) {
        const double t = s * h;
        // k1 is f(t_s, y_s), already stored with the history sample.
        tmp = y + 0.5 * h * k1;
        rhs(t + 0.5 * h, tmp, k2);
        tmp = y + 0.5 * h * k2;
        rhs(t + 0.5 * h, tmp, k3);
        tmp = y + h * k3;
        rhs(t + h, tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rhs(t + h, y, k1);
        hist.store(s + 1, y, k1);
        observe((s + 1) * h, y);
    }
}

namespace {

// Step that lands on every sample: dt' <= dt with steps a multiple of samples.
std::pair<double, long> aligned_step(double t_end, int samples, double dt)
{
    const long per = std::max(1L, static_cast<long>(std::ceil(t_end / samples / dt - 1e-9)));
    return {t_end / (static_cast<double>(samples) * per), per};
}

} // namespace

DelayTrace integrate_delay(double Gamma, double gamma_d, double gamma_tau, double kappa_l, Branch branch,
                           cplx c0, double t_end, int samples, History history, double dt)
{
    if (!(Gamma > 0.0) || gamma_d < 0.0 || gamma_tau < 0.0)
        throw IntegrationError("integrate_delay: need Gamma > 0, gamma_d >= 0, Gamma tau >= 0");
    if (!(t_end > 0.0) || samples < 1)
        throw IntegrationError("integrate_delay: need t_end > 0 and samples >= 1");
    const double tau = gamma_tau / Gamma;
    if (dt <= 0.0)
        dt = default_delay_step(tau, std::max(Gamma, gamma_d));
    const auto [h, per] = aligned_step(t_end, samples, dt);

    const double sign = branch == Branch::Bright ? -1.0 : 1.0;
    CMatrix A(1, 1), B(1, 1);
    A(0, 0) = -0.5 * (Gamma + gamma_d);
    B(0, 0) = sign * 0.5 * Gamma * std::exp(-kappa_l);
    CVector y(1);
    y[0] = c0;

    DelayTrace out;
    long step = 0;
    integrate_linear_dde(A, B, tau, y, t_end, h, history, [&](double t, const CVector& s) {
        if (step++ % per == 0) {
            out.times.push_back(t);
            out.values.push_back(s[0]);
        }
    });
    return out;
}

TransferTrajectory delayed_transfer(double Gamma, const TransferParams& p, double t_end, int samples, double dt)
{
    if (!(Gamma > 0.0) || p.gamma_d < 0.0 || p.gamma_tau < 0.0)
        throw IntegrationError("delayed_transfer: need Gamma > 0, gamma_d >= 0, Gamma tau >= 0");
    if (!(t_end > 0.0) || samples < 1)
        throw IntegrationError("delayed_transfer: need t_end > 0 and samples >= 1");
    const double tau = p.gamma_tau / Gamma;
    if (dt <= 0.0)
        dt = default_delay_step(tau, std::max(Gamma, p.omega));
    const auto [h, per] = aligned_step(t_end, samples, dt);

    const cplx a = -I * p.omega / std::sqrt(2.0);
    const double damp = -0.5 * (Gamma + p.gamma_d);
    const double fb = 0.5 * Gamma * std::exp(-p.kappa_l);
    CMatrix A = CMatrix::Zero(4, 4), B = CMatrix::Zero(4, 4);
    A(0, 2) = a;
    A(0, 3) = a;
    A(1, 2) = a;
    A(1, 3) = -a;
    A(2, 0) = a;
    A(2, 1) = a;
    A(3, 0) = a;
    A(3, 1) = -a;
    A(2, 2) = damp;
    A(3, 3) = damp;
    B(2, 2) = -fb;
    B(3, 3) = fb;

    CVector y = CVector::Zero(4);
    y[0] = 1.0;
    TransferTrajectory traj;
    long step = 0;
    integrate_linear_dde(A, B, tau, y, t_end, h, History::Zero, [&](double t, const CVector& s) {
        if (step++ % per != 0)
            return;
        traj.times.push_back(t);
        traj.c1.push_back(s[0]);
        traj.c2.push_back(s[1]);
        traj.cb.push_back(s[2]);
        traj.cd.push_back(s[3]);
        traj.pop_s1.push_back(std::norm(s[0]));
        traj.pop_s2.push_back(std::norm(s[1]));
        traj.pop_e.push_back(std::norm(s[2]) + std::norm(s[3]));
    });
    extract_fidelity(traj);
    return traj;
}

namespace {

double delayed_fidelity(double Gamma, TransferParams p, double* t_at_max)
{
    double t_end = 1.6 * (kPi / p.omega) * (1.0 + 0.5 * p.gamma_tau);
    for (int attempt = 0; attempt < 4; ++attempt) {
        const TransferTrajectory tr = delayed_transfer(Gamma, p, t_end, 4000);
        if (tr.t_at_max < 0.95 * t_end) {
            if (t_at_max)
                *t_at_max = tr.t_at_max;
            return tr.fidelity;
        }
        t_end *= 1.5;  // maximum sits on the window edge: look further
    }
    throw IntegrationError("delayed transfer: no interior fidelity maximum");
}

} // namespace

DelayedOptimum optimize_delayed_drive(double Gamma, double gamma_d, double gamma_tau, double kappa_l)
{
    if (!(gamma_d > 0.0))
        throw IntegrationError("optimize_delayed_drive: need gamma_d > 0");
    TransferParams p;
    p.gamma_d = gamma_d;
    p.gamma_b = 2.0 * Gamma + gamma_d;
    p.gamma_tau = gamma_tau;
    p.kappa_l = kappa_l;
    const double om0 = std::sqrt(gamma_d * p.gamma_b / 8.0);

    auto neg_f = [&](double log_om) {
        p.omega = std::exp(log_om);
        return -delayed_fidelity(Gamma, p, nullptr);
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = std::log(om0 / 10.0), hi = std::log(3.0 * om0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = neg_f(x1), f2 = neg_f(x2);
    while (hi - lo > 1e-3) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = neg_f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = neg_f(x2);
        }
    }
    DelayedOptimum out;
    out.omega = std::exp(0.5 * (lo + hi));
    p.omega = out.omega;
    out.fidelity = delayed_fidelity(Gamma, p, &out.t_max);
    return out;
}

} // namespace darklattice::dynamics
