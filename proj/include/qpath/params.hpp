#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qpath/errors.hpp"

namespace qpath {

inline constexpr double kNormSlack = 1e-9;

/// Qubit state in the x-z plane of the Bloch sphere. The experiment never
/// leaves this plane, so y is structurally zero; the density-matrix
/// correspondence is rho11 = (1 - z)/2, rho01 = x/2 with z = +1 for |0>.
struct BlochState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm2() const { return x * x + y * y + z * z; }

    bool inside_sphere(double slack = kNormSlack) const {
        return norm2() <= 1.0 + slack;
    }

    double rho11() const { return 0.5 * (1.0 - z); }
    double rho01() const { return 0.5 * x; }

    static BlochState from_rho(double rho11, double rho01) {
        return {2.0 * rho01, 0.0, 1.0 - 2.0 * rho11};
    }
};

/// Physical parameterization of dynamics and detector.
///   omega      Rabi angular frequency [rad/s]
///   tau        characteristic measurement time [s]
///   gamma_ens  ensemble dephasing rate Gamma [1/s]
///   dt         sampling interval [s]
///   delta_v    detector peak separation [V]
/// The excess coherence decay gamma = Gamma - 1/(2 tau) and the total
/// efficiency eta = 1/(2 tau Gamma) are derived, never stored.
struct PhysicalParams {
    double omega = 0.0;
    double tau = 0.0;
    double gamma_ens = 0.0;
    double dt = 0.0;
    double delta_v = 1.0;

    double gamma_extra() const { return gamma_ens - 1.0 / (2.0 * tau); }
    double eta_tot() const { return 1.0 / (2.0 * tau * gamma_ens); }

    /// Throws config_error on inconsistent values; returns non-fatal warnings.
    std::vector<std::string> validate() const {
        std::vector<std::string> warnings;
        if (!(tau > 0.0)) throw config_error("tau must be positive");
        if (!(dt > 0.0)) throw config_error("dt must be positive");
        if (!(gamma_ens > 0.0)) throw config_error("gamma_ens must be positive");
        if (!(delta_v > 0.0)) throw config_error("delta_v must be positive");
        if (gamma_extra() < -1e-9 * gamma_ens)
            throw config_error("gamma_ens < 1/(2 tau): eta_tot would exceed 1");
        if (dt > tau / 5.0)
            warnings.push_back("dt > tau/5: sampling is coarse relative to the measurement time");
        return warnings;
    }
};

/// eta_tot = 1/(2 tau Gamma).
inline double efficiency_eta_tot(double tau, double gamma_ens) {
    if (!(tau > 0.0) || !(gamma_ens > 0.0))
        throw config_error("efficiency_eta_tot: inputs must be positive");
    return 1.0 / (2.0 * tau * gamma_ens);
}

/// eta_env = (1 + kappa / (8 chi^2 nbar T2*))^-1.
inline double env_dephasing(double kappa, double chi, double nbar, double t2star) {
    if (!(kappa > 0.0) || !(chi != 0.0) || !(nbar > 0.0) || !(t2star > 0.0))
        throw config_error("env_dephasing: inputs must be positive");
    return 1.0 / (1.0 + kappa / (8.0 * chi * chi * nbar * t2star));
}

/// tau = kappa / (16 chi^2 nbar eta): conversion from cavity parameters.
inline double tau_from_cavity(double kappa, double chi, double nbar, double eta) {
    if (!(kappa > 0.0) || !(chi != 0.0) || !(nbar > 0.0) || !(eta > 0.0))
        throw config_error("tau_from_cavity: inputs must be positive");
    return kappa / (16.0 * chi * chi * nbar * eta);
}

}  // namespace qpath
