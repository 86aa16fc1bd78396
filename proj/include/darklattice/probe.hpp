#pragma once

#include <stdexcept>
#include <vector>

#include "darklattice/analytics.hpp"
#include "darklattice/geometry.hpp"

namespace darklattice {

using analytics::Scheme;

class ProbeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ProbeConfig {
    LatticeSpec spec;
    GaussianMode mode;
    double delta_d = 0.0;  // Re(eps_dark); the probe sits at omega_0 + delta_d
    Scheme scheme = Scheme::Symmetric;
    std::vector<double> detunings;
    int jobs = 1;

    void validate() const;
};

struct ReflectivityCurve {
    std::vector<double> detunings;  // only the points that were solved
    std::vector<double> R;
    std::vector<double> skipped;    // detunings sitting on a pole (singular system)
    Scheme scheme = Scheme::Symmetric;
};

// R(D) = 9 pi^2 / (4 k0^4) |E^T (H + D_z - delta_d)^-1 E|^2 with E the probe
// mode sampled at the sites. D_z is +D on both arrays (symmetric) or +D / -D
// (opposite).
ReflectivityCurve reflectivity_numeric(const ProbeConfig& config);

} // namespace darklattice
