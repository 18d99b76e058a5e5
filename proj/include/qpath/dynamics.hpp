#pragma once

#include <cmath>
#include <utility>

#include "qpath/params.hpp"

namespace qpath {

/// Discrete-time propagator for one sampling step.
///   Verbatim        first-order two-step update, exactly as the discrete
///                   scheme the trajectory reconstruction uses (default).
///   ExactRotation   replaces the first-order unitary with the exact
///                   rotation about y; measurement update unchanged.
///   SymmetricSplit  exact half-rotation, measurement update, exact
///                   half-rotation. Second-order accurate for ensemble
///                   averages; the readout conditions on the mid-step state.
enum class PropagatorScheme { Verbatim, ExactRotation, SymmetricSplit };

inline const char* to_string(PropagatorScheme s) {
    switch (s) {
        case PropagatorScheme::Verbatim: return "verbatim";
        case PropagatorScheme::ExactRotation: return "exact_rotation";
        case PropagatorScheme::SymmetricSplit: return "symmetric_split";
    }
    return "verbatim";
}

inline PropagatorScheme propagator_from_string(const std::string& s) {
    if (s == "verbatim") return PropagatorScheme::Verbatim;
    if (s == "exact_rotation") return PropagatorScheme::ExactRotation;
    if (s == "symmetric_split") return PropagatorScheme::SymmetricSplit;
    throw config_error("unknown propagator scheme: " + s);
}

/// First-order unitary half of the two-step update:
///   rho01' = rho01 + (Omega/2)(rho00 - rho11) dt
///   rho11' = rho11 + (Omega/2)(rho01' + rho10') dt
/// In Bloch form: x' = x + Omega z dt, then z' = z - Omega x' dt.
inline BlochState unitary_step(const BlochState& s, double omega, double dt) {
    const double xp = s.x + omega * s.z * dt;
    const double zp = s.z - omega * xp * dt;
    return {xp, 0.0, zp};
}

/// Exact rotation about the y axis by angle omega * dt.
inline BlochState rotation_step(const BlochState& s, double omega, double dt) {
    const double c = std::cos(omega * dt);
    const double sn = std::sin(omega * dt);
    return {c * s.x + sn * s.z, 0.0, -sn * s.x + c * s.z};
}

/// Bayesian measurement update for one dimensionless readout r = 2V/dV:
///   rho11(t+dt) = (rho11/rho00) e^{-2 r dt/tau} / (1 + (rho11/rho00) e^{-2 r dt/tau})
///   rho01(t+dt) = rho01 sqrt(rho11(t+dt) rho00(t+dt)) / sqrt(rho11 rho00) e^{-gamma dt}
/// At an exact eigenstate the likelihood ratio degenerates; z is left
/// unchanged and only the coherence factor is applied.
inline BlochState bayes_step(const BlochState& s, double r, const PhysicalParams& p) {
    const double gamma = p.gamma_extra();
    const double p1 = s.rho11();
    const double p0 = 1.0 - p1;
    const double coh_env = std::exp(-gamma * p.dt);
    if (p1 <= 0.0 || p1 >= 1.0) {
        return {s.x * coh_env, 0.0, s.z};
    }
    const double w = std::exp(-2.0 * r * p.dt / p.tau);
    const double p1n = p1 * w / (p0 + p1 * w);
    const double p0n = 1.0 - p1n;
    const double ratio = std::sqrt((p1n * p0n) / (p1 * p0));
    BlochState out{s.x * ratio * coh_env, 0.0, 1.0 - 2.0 * p1n};
    const double n2 = out.norm2();
    if (n2 > 1.0 + kNormSlack) {
        const double inv = 1.0 / std::sqrt(n2);
        out.x *= inv;
        out.z *= inv;
    }
    return out;
}

/// State whose z conditions the readout distribution for the coming step.
/// The Verbatim and ExactRotation schemes condition on the pre-step state;
/// the symmetric split conditions on the half-rotated state.
inline BlochState measurement_prior(const BlochState& s, const PhysicalParams& p,
                                    PropagatorScheme scheme) {
    if (scheme == PropagatorScheme::SymmetricSplit)
        return rotation_step(s, p.omega, 0.5 * p.dt);
    return s;
}

/// One full sampling step with a known readout.
inline BlochState propagate_step(const BlochState& s, double r, const PhysicalParams& p,
                                 PropagatorScheme scheme = PropagatorScheme::Verbatim) {
    switch (scheme) {
        case PropagatorScheme::Verbatim:
            return bayes_step(unitary_step(s, p.omega, p.dt), r, p);
        case PropagatorScheme::ExactRotation:
            return bayes_step(rotation_step(s, p.omega, p.dt), r, p);
        case PropagatorScheme::SymmetricSplit: {
            const BlochState mid = rotation_step(s, p.omega, 0.5 * p.dt);
            return rotation_step(bayes_step(mid, r, p), p.omega, 0.5 * p.dt);
        }
    }
    return s;
}

/// Time-continuum limit of the update:
///   dx/dt = -gamma x + Omega z - x z r / tau
///   dz/dt = -Omega x + (1 - z^2) r / tau
inline std::pair<double, double> continuum_derivatives(double x, double z, double r,
                                                       const PhysicalParams& p) {
    const double gamma = p.gamma_extra();
    const double dx = -gamma * x + p.omega * z - x * z * r / p.tau;
    const double dz = -p.omega * x + (1.0 - z * z) * r / p.tau;
    return {dx, dz};
}

/// Closed-form solution of the ensemble (Lindblad) equations
///   dx/dt = -Gamma x + Omega z,  dz/dt = -Omega x
/// with lambda = sqrt(Omega^2 - (Gamma/2)^2) continued through lambda -> 0
/// and to the overdamped branch (cos -> cosh) with real arithmetic.
inline std::pair<double, double> lindblad_ensemble(double x0, double z0, double omega,
                                                   double gamma_ens, double t) {
    const double half = 0.5 * gamma_ens;
    const double disc = omega * omega - half * half;
    const double damp = std::exp(-half * t);
    double c, s_over_l;  // cos(lambda t), sin(lambda t)/lambda
    const double u = disc * t * t;  // (lambda t)^2, signed
    if (std::fabs(u) < 1e-10) {
        // lambda -> 0 limit, valid for either sign of disc
        c = 1.0 - u / 2.0 + u * u / 24.0;
        s_over_l = t * (1.0 - u / 6.0 + u * u / 120.0);
    } else if (disc > 0.0) {
        const double l = std::sqrt(disc);
        c = std::cos(l * t);
        s_over_l = std::sin(l * t) / l;
    } else {
        const double m = std::sqrt(-disc);
        c = std::cosh(m * t);
        s_over_l = std::sinh(m * t) / m;
    }
    const double x = damp * (x0 * c - 0.5 * (gamma_ens * x0 - 2.0 * omega * z0) * s_over_l);
    const double z = damp * (z0 * c + 0.5 * (gamma_ens * z0 - 2.0 * omega * x0) * s_over_l);
    return {x, z};
}

}  // namespace qpath
