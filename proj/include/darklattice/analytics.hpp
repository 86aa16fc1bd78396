#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "darklattice/types.hpp"

// Closed-form expressions for infinite arrays, the four-mode transfer model,
// probing, imperfections, memory release and retardation.
namespace darklattice::analytics {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Collective paraxial rate 3 pi / (k0 delta)^2.
double big_gamma(double spacing);

struct InfiniteArrayParams {
    double spacing = 0.5;
    double separation = 1.0;
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
    int parity = +1;
};

// Thrown when a diffraction order sits exactly on the light cone.
class GrazingOrder : public DomainError {
public:
    using DomainError::DomainError;
};

// Decay rate of a plane-wave Bell mode of two infinite arrays; empty when no
// diffraction order is inside the light cone (guided mode).
std::optional<double> gamma_infinite(const InfiniteArrayParams& params);

struct ShiftPair {
    double symmetric, antisymmetric;
};
ShiftPair sym_antisym_shifts(double L, double Gamma, double delta_d);

struct TransferFidelity {
    double fidelity;         // exp(-pi sqrt(2 gd/gb))
    double fidelity_linear;  // 1 - pi sqrt(2 gd/gb)
    double omega_opt;        // sqrt(gd gb / 8)
    double t_max;            // (pi - atan(gd/g))/g, as usually quoted
    double t_peak;           // first maximum of |c2|^2 of the closed form
};
TransferFidelity transfer_fidelity(double gamma_d, double gamma_b);

struct TransferParams {
    double gamma_d = 0.0;
    double gamma_b = 1.0;
    double omega = 0.0;
    double gamma_tau = 0.0;
    double kappa_l = 0.0;
};

struct ClosedFormValue {
    cplx c2;
    bool in_validity_window;  // gamma_d << Omega << gamma_b (factor 3 margins)
};
// Exact c2(t) of the four-mode model, written as four damped exponentials.
ClosedFormValue four_mode_closed_form(double t, const TransferParams& p);

enum class Scheme { Symmetric, Opposite };
double reflectivity_analytic(double delta, double gamma_d, double gamma_b, Scheme scheme);
// Half-width at half maximum of the closed forms.
double reflectivity_hwhm(double gamma_d, double gamma_b, Scheme scheme);

struct Renormalized {
    double value;
    bool warn;  // outside the small-parameter regime
};
Renormalized lamb_dicke_renorm(double gamma, double eta, double n_th);

cplx defect_renorm(cplx eps, double p);

enum class Branch { Dark, Bright };
// First-order-in-retardation amplitude c(t)/c(0).
double nonmarkov_amplitude(double t, double Gamma, double gamma_d, double gamma_tau, double kappa_l, Branch b);

double photon_number(double gamma_tau, cplx c_d);

struct MemoryEmission {
    double gamma_tilde;
    double forward;   // P_right / |c~|^2
    double backward;  // P_left / |c~|^2
    bool warn;        // Omega not small against Gamma (1 +/- cos k0L)
};
MemoryEmission memory_emission(double omega, double Gamma, double gamma_d, double k0L);

// Laplace transform of c2 for the delayed four-mode system.
cplx delayed_c2_laplace(cplx s, double Gamma, const TransferParams& p);

struct LaplaceInversion {
    std::vector<double> times;
    std::vector<cplx> c2;
    double richardson_error;  // max difference between the two resolutions
    bool converged;
};
// Trapezoidal Bromwich (Fourier-series) inversion on a uniform grid over
// [0, t_end]; gamma_b is taken as 2 Gamma + gamma_d.
LaplaceInversion delayed_transfer_laplace(double Gamma, const TransferParams& p, double t_end, int samples,
                                          double tol = 1e-4);

} // namespace darklattice::analytics
