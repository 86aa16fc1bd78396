#include "darklattice/analytics.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

namespace darklattice::analytics {

double big_gamma(double spacing)
{
    if (!(spacing > 0.0))
        throw DomainError("big_gamma: spacing must be positive");
    const double kd = k0 * spacing;
    return 3.0 * kPi / (kd * kd);
}

std::optional<double> gamma_infinite(const InfiniteArrayParams& params)
{
    const double d = params.spacing;
    if (!(d > 0.0))
        throw DomainError("gamma_infinite: spacing must be positive");
    const double G = big_gamma(d);
    const double b = 2.0 * kPi / d;  // reciprocal lattice constant
    const int mmax = static_cast<int>(std::ceil(d * (params.q.norm() / (2.0 * kPi) + 1.0))) + 1;

    double rate = 0.0;
    bool any = false;
    for (int mx = -mmax; mx <= mmax; ++mx) {
        for (int my = -mmax; my <= mmax; ++my) {
            const Eigen::Vector2d qg = params.q - b * Eigen::Vector2d(mx, my);
            const double q2 = qg.squaredNorm();
            if (std::abs(std::sqrt(q2) - k0) < 1e-12 * k0)
                throw GrazingOrder("gamma_infinite: diffraction order on the light cone");
            if (q2 >= k0 * k0)
                continue;
            const double kz = std::sqrt(k0 * k0 - q2);
            // circular polarization: |(q-g).p|^2 = |q-g|^2 / 2
            rate += G * (k0 * k0 - 0.5 * q2) / (k0 * kz) * (1.0 + params.parity * std::cos(kz * params.separation));
            any = true;
        }
    }
    if (!any)
        return std::nullopt;
    return rate;
}

ShiftPair sym_antisym_shifts(double L, double Gamma, double delta_d)
{
    const double s = 0.5 * Gamma * std::sin(k0 * L);
    return {s + delta_d, -s + delta_d};
}

TransferFidelity transfer_fidelity(double gamma_d, double gamma_b)
{
    if (!(gamma_d > 0.0) || !(gamma_d < gamma_b))
        throw DomainError("transfer_fidelity: need 0 < gamma_d < gamma_b");
    const double x = std::sqrt(2.0 * gamma_d / gamma_b);
    TransferFidelity out;
    out.fidelity = std::exp(-kPi * x);
    out.fidelity_linear = 1.0 - kPi * x;
    out.omega_opt = std::sqrt(gamma_d * gamma_b / 8.0);
    const double g = std::sqrt(16.0 * out.omega_opt * out.omega_opt - gamma_d * gamma_d);
    out.t_max = (kPi - std::atan(gamma_d / g)) / g;
    out.t_peak = 4.0 * out.t_max;
    return out;
}

ClosedFormValue four_mode_closed_form(double t, const TransferParams& p)
{
    const double om = p.omega, gd = p.gamma_d, gb = p.gamma_b;
    const double om16 = 16.0 * om * om;
    if (std::abs(om16 - gb * gb) < 1e-14 * std::max(1.0, gb * gb))
        throw DomainError("four_mode_closed_form: 16 Omega^2 = gamma_b^2 branch degeneracy");
    if (!(om16 > gd * gd))
        throw DomainError("four_mode_closed_form: need 4 Omega > gamma_d");

    const double g = std::sqrt(om16 - gd * gd);
    const cplx sb = std::sqrt(cplx(om16 - gb * gb));
    const cplx sb2 = std::sqrt(cplx(gb * gb - om16));
    const cplx wd[2] = {0.25 * (-I * gd + g), 0.25 * (-I * gd - g)};
    const cplx wb[2] = {0.25 * (-I * gb + sb), 0.25 * (-I * gb - sb)};
    const double phi = std::atan(gd / g);
    const cplx cd[2] = {om / g * std::polar(1.0, phi), om / g * std::polar(1.0, -phi)};
    const cplx cb[2] = {-4.0 * om * om / (om16 - gb * gb + gb * sb2), -4.0 * om * om / (om16 - gb * gb - gb * sb2)};

    cplx sum = 0.0;
    for (int i = 0; i < 2; ++i)
        sum += cb[i] * std::exp(-I * wb[i] * t) + cd[i] * std::exp(-I * wd[i] * t);
    // The amplitudes above reproduce -c2 of the equations of motion with
    // c1(0) = 1; flip to the physical sign.
    ClosedFormValue out;
    out.c2 = -sum;
    out.in_validity_window = 3.0 * gd < om && 3.0 * om < gb;
    return out;
}

double reflectivity_analytic(double delta, double gamma_d, double gamma_b, Scheme scheme)
{
    const double num = (gamma_b - gamma_d) * (gamma_b - gamma_d);
    if (scheme == Scheme::Symmetric)
        return num / (gamma_b * gamma_b + 4.0 * delta * delta);
    const double den = gamma_b + 4.0 * delta * delta / gamma_d;
    return num / (den * den);
}

double reflectivity_hwhm(double gamma_d, double gamma_b, Scheme scheme)
{
    if (scheme == Scheme::Symmetric)
        return 0.5 * gamma_b;
    // (1 + 4 D^2/(gd gb))^2 = 2
    return 0.5 * std::sqrt(gamma_d * gamma_b * (std::sqrt(2.0) - 1.0));
}

Renormalized lamb_dicke_renorm(double gamma, double eta, double n_th)
{
    const double s = eta * eta * (2.0 * n_th + 1.0);
    return {gamma * (1.0 - s) + s, std::sqrt(s) > 0.3};
}

cplx defect_renorm(cplx eps, double p)
{
    if (p < 0.0 || p > 1.0)
        throw DomainError("defect_renorm: p must be in [0, 1]");
    return eps * (1.0 - p) - 0.5 * I * p;
}

double nonmarkov_amplitude(double t, double Gamma, double gamma_d, double gamma_tau, double kappa_l, Branch b)
{
    const double att = std::exp(-kappa_l);
    if (b == Branch::Bright) {
        const double den = 2.0 - gamma_tau * att;
        if (!(den > 0.0))
            throw DomainError("nonmarkov_amplitude: nonpositive bright-branch denominator");
        return 2.0 * std::exp(-((1.0 + att) * Gamma + gamma_d) / den * t) / den;
    }
    const double den = 2.0 + gamma_tau * att;
    return 2.0 * std::exp(-((1.0 - att) * Gamma + gamma_d) / den * t) / den;
}

double photon_number(double gamma_tau, cplx c_d)
{
    return 0.5 * gamma_tau * std::norm(c_d);
}

MemoryEmission memory_emission(double omega, double Gamma, double gamma_d, double k0L)
{
    const cplx e2 = std::polar(1.0, 2.0 * k0L);
    const double gg = Gamma + gamma_d;
    const cplx den = e2 * Gamma * Gamma - gg * gg;
    if (std::abs(den) == 0.0)
        throw DomainError("memory_emission: vanishing denominator");
    MemoryEmission out;
    const double om2 = omega * omega;
    out.gamma_tilde = -4.0 * (om2 * gg / den).real();
    out.forward = 2.0 * om2 * Gamma * std::norm(gamma_d / den);
    out.backward = 2.0 * om2 * Gamma * std::norm((e2 * Gamma - gg) / den);
    const double c = std::cos(k0L);
    out.warn = omega > 0.1 * std::min(std::abs(Gamma * (1.0 + c)), std::abs(Gamma * (1.0 - c)));
    return out;
}

cplx delayed_c2_laplace(cplx s, double Gamma, const TransferParams& p)
{
    const double tau = p.gamma_tau / Gamma;
    const double om2 = p.omega * p.omega;
    const cplx e = std::exp(-s * tau - p.kappa_l);
    const cplx a = 2.0 * om2 + s * (2.0 * s + Gamma + p.gamma_d);
    return 2.0 * om2 * Gamma * e / (a * a - s * s * Gamma * Gamma * e * e);
}

namespace {

// f(t_n) on t_n = 2 T n / M for n < M/2 from K = M/2 series terms.
std::vector<double> fourier_series_inverse(double Gamma, const TransferParams& p, double T, int M)
{
    const double a = 10.0 / T;  // all poles lie in Re s < 0
    const int K = M / 2;
    std::vector<cplx> in(M, 0.0), out;
    for (int k = 0; k < K; ++k)
        in[k] = delayed_c2_laplace(cplx(a, kPi * k / T), Gamma, p);
    in[0] *= 0.5;
    Eigen::FFT<double> fft;
    fft.inv(out, in);  // (1/M) sum_k in_k exp(2 pi i k n / M)
    std::vector<double> f(K);
    for (int n = 0; n < K; ++n) {
        const double t = 2.0 * T * n / M;
        f[n] = std::exp(a * t) / T * (double(M) * out[n]).real();
    }
    return f;
}

} // namespace

LaplaceInversion delayed_transfer_laplace(double Gamma, const TransferParams& p, double t_end, int samples, double tol)
{
    if (!(t_end > 0.0) || samples < 2)
        throw DomainError("delayed_transfer_laplace: need t_end > 0 and at least two samples");
    const double T = t_end;
    // Resolution: terms decay like |s|^-4, so reaching |s| ~ 20 max(Gamma, Omega)
    // is ample; start there and double until two resolutions agree.
    const double smax = 20.0 * std::max({Gamma, p.omega, 1.0 / T});
    int M = 4096;
    while ((M < 4 * samples || M / 2 < smax * T / kPi) && M < (1 << 22))
        M *= 2;

    std::vector<double> coarse = fourier_series_inverse(Gamma, p, T, M);
    double err = 0.0;
    bool ok = false;
    std::vector<double> fine;
    for (int round = 0; round < 6 && M <= (1 << 23); ++round) {
        fine = fourier_series_inverse(Gamma, p, T, 2 * M);
        err = 0.0;
        for (std::size_t n = 0; n < coarse.size(); ++n)
            err = std::max(err, std::abs(fine[2 * n] - coarse[n]));
        M *= 2;
        if (err < tol) {
            ok = true;
            break;
        }
        coarse.swap(fine);
    }

    LaplaceInversion out;
    out.richardson_error = err;
    out.converged = ok;
    // Grid spacing 2T/M; keep t <= t_end, decimated to ~samples points.
    const int last = M / 2;
    const int stride = std::max(1, last / samples);
    for (int n = 0; n <= last && n < static_cast<int>(fine.size()); n += stride) {
        out.times.push_back(2.0 * T * n / M);
        out.c2.emplace_back(fine[n], 0.0);
    }
    return out;
}

} // namespace darklattice::analytics
