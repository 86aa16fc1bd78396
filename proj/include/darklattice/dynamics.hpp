#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "darklattice/analytics.hpp"
#include "darklattice/geometry.hpp"
#include "darklattice/spectrum.hpp"

namespace darklattice::dynamics {

using analytics::Branch;
using analytics::TransferParams;

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TransferTrajectory {
    std::vector<double> times;
    std::vector<double> pop_s1, pop_s2, pop_e;
    std::vector<cplx> c1, c2, cb, cd;
    double fidelity = 0.0;  // max_t |c2|^2, parabolically refined
    double t_at_max = 0.0;
};

struct Rk45Options {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h_initial = 0.0;  // 0: automatic
    double h_min = 1e-12;
    long max_steps = 50'000'000;
    bool check_norm = true;  // assert the norm never grows (dissipative systems)
};

using Rhs = std::function<void(double t, const CVector& y, CVector& dydt)>;
using Observer = std::function<void(double t, const CVector& y)>;

// Dormand-Prince 5(4) with step control; observer called at t0 and each
// requested output time (exact hits, steps are clipped to land on them).
void integrate_rk45(const Rhs& f, CVector& y, double t0, const std::vector<double>& outputs,
                    const Observer& observe, const Rk45Options& opt = {});

// Locates the maximum of |c2|^2 on the sample grid and refines it with a parabola.
void extract_fidelity(TransferTrajectory& traj);

struct FourModeInit {
    cplx c1 = 1.0, c2 = 0.0, cb = 0.0, cd = 0.0;
};

TransferTrajectory integrate_four_mode(const TransferParams& p, double t_end, int samples,
                                       const FourModeInit& init = {}, const Rk45Options& opt = {});

struct DriveMask {
    bool array1 = true;
    bool array2 = true;
};

struct FullTransferSetup {
    LatticeSpec spec;
    double omega = 0.0;
    DriveMask drive;
    double delta_d = 0.0;
    CVector dark;    // full-basis dark mode (2N), from the spectrum module
    CVector bright;  // full-basis bright mode (2N)
};

// Full single-excitation Lambda-scheme evolution with s amplitudes initialized
// to the dark profile on array 1.
TransferTrajectory simulate_transfer_full(const FullTransferSetup& setup, double t_end, int samples,
                                          const Rk45Options& opt = {});

struct MemoryRelease {
    TransferTrajectory trajectory;
    double gamma_tilde = 0.0;  // fitted decay of the array-1 s population
    int fit_points = 0;
    bool fit_ok = false;
};

MemoryRelease simulate_memory_release(const FullTransferSetup& setup, double t_end, int samples,
                                      const Rk45Options& opt = {});

// ---------------------------------------------------------------------------
// Delay-differential equations

enum class History { Constant, Zero };

struct DelayTrace {
    std::vector<double> times;
    std::vector<cplx> values;
};

// Default step min(tau/50, 0.01/max(rates)).
double default_delay_step(double tau, double max_rate);

// y' = A y(t) + B y(t - tau), fixed-step RK4 with cubic Hermite history.
// Pre-history: constant y(0) or zero. Calls observe(t, y) every step.
void integrate_linear_dde(const CMatrix& A, const CMatrix& B, double tau, CVector& y, double t_end, double dt,
                          History history, const std::function<void(double, const CVector&)>& observe);

DelayTrace integrate_delay(double Gamma, double gamma_d, double gamma_tau, double kappa_l, Branch branch,
                           cplx c0, double t_end, int samples, History history = History::Constant,
                           double dt = 0.0);

// Delayed four-mode transfer; gamma_b is 2 Gamma + gamma_d.
TransferTrajectory delayed_transfer(double Gamma, const TransferParams& p, double t_end, int samples,
                                    double dt = 0.0);

struct DelayedOptimum {
    double omega = 0.0;
    double fidelity = 0.0;
    double t_max = 0.0;
};

// Maximizes the delayed-transfer fidelity over Omega (golden section in log Omega).
DelayedOptimum optimize_delayed_drive(double Gamma, double gamma_d, double gamma_tau, double kappa_l = 0.0);

} // namespace darklattice::dynamics
