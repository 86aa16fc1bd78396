#include "darklattice/probe.hpp"

#include <Eigen/LU>

#include "darklattice/hamiltonian.hpp"
#include "darklattice/parallel.hpp"

namespace darklattice {

void ProbeConfig::validate() const
{
    spec.validate();
    if (detunings.empty())
        throw ProbeError("probe: empty detuning grid");
    if (!(mode.waist > 1.0))
        throw ProbeError("probe: waist must exceed one wavelength (paraxial regime)");
}

ReflectivityCurve reflectivity_numeric(const ProbeConfig& config)
{
    config.validate();
    const auto sites = build_arrays(config.spec);
    const auto pos = positions(sites);
    const Eigen::Index n = static_cast<Eigen::Index>(pos.size());
    CMatrix H = build_scalar(pos).matrix;
    H.diagonal().array() -= config.delta_d;

    CVector E(n);
    for (Eigen::Index j = 0; j < n; ++j)
        E[j] = mode_field(config.mode, pos[j]);

    const double pref = 9.0 * kPi * kPi / (4.0 * std::pow(k0, 4));
    const double opp = config.scheme == Scheme::Opposite ? -1.0 : 1.0;
    const std::size_t m = config.detunings.size();
    std::vector<double> R(m, 0.0);
    std::vector<char> ok(m, 0);

    parallel_for(static_cast<int>(m), config.jobs, [&](int i) {
        const double D = config.detunings[i];
        CMatrix M = H;
        for (Eigen::Index j = 0; j < n; ++j)
            M(j, j) += pos[j].z() < 0.0 ? D : opp * D;
        Eigen::PartialPivLU<CMatrix> lu(M);
        if (!(lu.rcond() > 1e-13))
            return;
        const CVector x = lu.solve(E);
        R[i] = pref * std::norm(E.cwiseProduct(x).sum());
        ok[i] = 1;
    });

    ReflectivityCurve out;
    out.scheme = config.scheme;
    for (std::size_t i = 0; i < m; ++i) {
        if (ok[i]) {
            out.detunings.push_back(config.detunings[i]);
            out.R.push_back(R[i]);
        } else {
            out.skipped.push_back(config.detunings[i]);
        }
    }
    return out;
}

} // namespace darklattice
