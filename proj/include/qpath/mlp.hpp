#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qpath/detector.hpp"
#include "qpath/dynamics.hpp"
#include "qpath/errors.hpp"
#include "qpath/params.hpp"

namespace qpath {

/// Point of the extremal-path phase space. The optimal readout is always
/// derived from the identity r = z + p_z (1 - z^2) - p_x x z, never stored.
struct PhasePoint {
    double x = 0.0;
    double z = 0.0;
    double px = 0.0;
    double pz = 0.0;

    double readout() const { return z + pz * (1.0 - z * z) - px * x * z; }
};

struct PhaseDeriv {
    double dx = 0.0, dz = 0.0, dpx = 0.0, dpz = 0.0;
};

/// Extremal-path equations of motion; delta1/delta2 are the constant
/// perturbations of the conjugate-variable equations used by the
/// variational classification (zero for the unperturbed system).
inline PhaseDeriv ode_rhs(const PhasePoint& p, const PhysicalParams& params,
                          double delta1 = 0.0, double delta2 = 0.0) {
    const double gamma = params.gamma_extra();
    const double tau = params.tau;
    const double omega = params.omega;
    const double r = p.readout();
    PhaseDeriv d;
    d.dx = -gamma * p.x + omega * p.z - p.x * p.z * r / tau;
    d.dz = -omega * p.x + (1.0 - p.z * p.z) * r / tau;
    d.dpx = gamma * p.px + omega * p.pz + p.px * p.z * r / tau + delta1;
    d.dpz = -omega * p.px + (p.px * p.x + 2.0 * p.pz * p.z - 1.0) * r / tau + delta2;
    return d;
}

/// Conserved stochastic energy E = p_x dx + p_z dz - (r^2 - 2 r z + 1)/(2 tau).
inline double stochastic_energy(const PhasePoint& p, const PhysicalParams& params) {
    const PhaseDeriv d = ode_rhs(p, params);
    const double r = p.readout();
    return p.px * d.dx + p.pz * d.dz - (r * r - 2.0 * r * p.z + 1.0) / (2.0 * params.tau);
}

struct OptimalPath {
    double step = 0.0;
    std::vector<double> times;
    std::vector<PhasePoint> points;
    double terminal_residual = 0.0;  // Bloch distance to the target, if shot
    double log_likelihood = 0.0;     // readout-record log-likelihood at this step size

    std::size_t size() const { return points.size(); }
    const PhasePoint& back() const { return points.back(); }

    std::vector<double> energies(const PhysicalParams& params) const {
        std::vector<double> e;
        e.reserve(points.size());
        for (const auto& p : points) e.push_back(stochastic_energy(p, params));
        return e;
    }
};

/// Log-likelihood sum_k ln P(r_k | q_k) for a state/readout sequence;
/// the ranking functional for both empirical and theoretical paths.
inline double path_action(std::span<const BlochState> states, std::span<const double> readouts,
                          const DetectorModel& det) {
    double acc = 0.0;
    for (std::size_t k = 0; k < readouts.size(); ++k)
        acc += readout_log_likelihood(readouts[k], states[k].z, det);
    return acc;
}

/// Action of an integrated extremal path, evaluated at its own step size.
inline double path_action(const OptimalPath& path, const PhysicalParams& params) {
    const DetectorModel det{params.delta_v, params.tau, path.step};
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < path.points.size(); ++k) {
        const auto& p = path.points[k];
        acc += readout_log_likelihood(p.readout(), p.z, det);
    }
    return acc;
}

namespace detail {

inline PhasePoint rk4_step(const PhasePoint& p, double h, const PhysicalParams& params,
                           double d1, double d2) {
    auto advance = [](const PhasePoint& q, const PhaseDeriv& d, double f) {
        return PhasePoint{q.x + f * d.dx, q.z + f * d.dz, q.px + f * d.dpx, q.pz + f * d.dpz};
    };
    const PhaseDeriv k1 = ode_rhs(p, params, d1, d2);
    const PhaseDeriv k2 = ode_rhs(advance(p, k1, 0.5 * h), params, d1, d2);
    const PhaseDeriv k3 = ode_rhs(advance(p, k2, 0.5 * h), params, d1, d2);
    const PhaseDeriv k4 = ode_rhs(advance(p, k3, h), params, d1, d2);
    return {p.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
            p.z + h / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz),
            p.px + h / 6.0 * (k1.dpx + 2.0 * k2.dpx + 2.0 * k3.dpx + k4.dpx),
            p.pz + h / 6.0 * (k1.dpz + 2.0 * k2.dpz + 2.0 * k3.dpz + k4.dpz)};
}

inline std::size_t step_count(double T, double step) {
    const double n_f = T / step;
    const auto n = static_cast<std::size_t>(std::llround(n_f));
    if (std::fabs(n_f - static_cast<double>(n)) > 1e-6)
        throw config_error("integrate_path: horizon is not a multiple of the step");
    return n;
}

inline bool diverged(const PhasePoint& p) {
    return !(std::fabs(p.px) <= 1e6 && std::fabs(p.pz) <= 1e6 && std::isfinite(p.x) &&
             std::isfinite(p.z));
}

/// Endpoint-only integration for the shooting residual; no path storage.
inline std::optional<PhasePoint> integrate_endpoint(PhasePoint p, double T, double step,
                                                    const PhysicalParams& params, double d1,
                                                    double d2) {
    const std::size_t n = step_count(T, step);
    for (std::size_t k = 0; k < n; ++k) {
        p = rk4_step(p, step, params, d1, d2);
        if (diverged(p)) return std::nullopt;
    }
    return p;
}

}  // namespace detail

/// Classic fixed-step 4th-order integration of the extremal-path ODEs.
inline OptimalPath integrate_path(const PhasePoint& start, double T, double step,
                                  const PhysicalParams& params, double delta1 = 0.0,
                                  double delta2 = 0.0) {
    const std::size_t n = detail::step_count(T, step);
    OptimalPath path;
    path.step = step;
    path.times.reserve(n + 1);
    path.points.reserve(n + 1);
    path.times.push_back(0.0);
    path.points.push_back(start);
    PhasePoint p = start;
    for (std::size_t k = 0; k < n; ++k) {
        p = detail::rk4_step(p, step, params, delta1, delta2);
        if (detail::diverged(p)) {
            std::ostringstream msg;
            msg << "integrate_path: divergence at t = " << (k + 1) * step << " s, |p| = ("
                << p.px << ", " << p.pz << ")";
            throw convergence_error(msg.str());
        }
        path.times.push_back(static_cast<double>(k + 1) * step);
        path.points.push_back(p);
    }
    path.log_likelihood = path_action(path, params);
    return path;
}

/// Closed-form undriven solution from (x, z) = (1, 0):
///   xbar(t) = e^{-gamma t} sech(rbar t / tau),  zbar(t) = tanh(rbar t / tau)
/// with constant readout rbar = (tau / T) atanh(z_f). Conjugate variables
/// from the constant-r condition: p_x = 0, p_z = (rbar - z)/(1 - z^2).
inline OptimalPath analytic_undriven(double z_f, double T, const PhysicalParams& params,
                                     double step) {
    if (params.omega != 0.0)
        throw config_error("analytic_undriven: requires omega = 0");
    if (std::fabs(z_f) >= 1.0)
        throw config_error("analytic_undriven: |z_f| must be < 1 (atanh diverges)");
    double zf = z_f;
    if (std::fabs(zf) > 1.0 - 1e-12) zf = std::copysign(1.0 - 1e-12, zf);
    const double gamma = params.gamma_extra();
    const double rbar = params.tau / T * std::atanh(zf);
    const std::size_t n = detail::step_count(T, step);
    OptimalPath path;
    path.step = step;
    path.times.reserve(n + 1);
    path.points.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * step;
        const double u = rbar * t / params.tau;
        const double z = std::tanh(u);
        const double x = std::exp(-gamma * t) / std::cosh(u);
        const double pz = (rbar - z) / (1.0 - z * z);
        path.times.push_back(t);
        path.points.push_back({x, z, 0.0, pz});
    }
    path.log_likelihood = path_action(path, params);
    return path;
}

struct BoundaryConditions {
    double x_i = 0.0, z_i = 0.0;
    double x_f = 0.0, z_f = 0.0;
    double horizon = 0.0;  // seconds

    void validate() const {
        if (!(horizon > 0.0)) throw config_error("boundary conditions: horizon must be positive");
        if (x_i * x_i + z_i * z_i > 1.0 + kNormSlack || x_f * x_f + z_f * z_f > 1.0 + kNormSlack)
            throw config_error("boundary conditions: states must lie inside the Bloch disk");
    }
};

struct ShootOptions {
    double step = 1e-9;
    double tolerance = 1e-6;
    int max_iterations = 60;
    std::vector<double> start_grid = {-3.0, -1.5, 0.0, 1.5, 3.0};
    std::vector<std::array<double, 2>> explicit_starts;  // overrides the grid when non-empty
    double dedupe_tolerance = 1e-4;
    double delta1 = 0.0, delta2 = 0.0;  // variational perturbations
};

struct ShootRoot {
    double px0 = 0.0, pz0 = 0.0;
    double residual = 0.0;
    int iterations = 0;
    double action = 0.0;
    OptimalPath path;
};

struct ShootResult {
    std::vector<ShootRoot> roots;  // ranked by action, descending; [0] is principal
    const ShootRoot& principal() const { return roots.front(); }
};

/// Two-point boundary-value solve by shooting on the initial conjugate
/// variables: damped Newton on the 2-D terminal residual with a
/// finite-difference Jacobian, multi-started over a grid of initial
/// multipliers. All converged distinct roots are returned, ranked by the
/// path log-likelihood. Throws convergence_error (with the per-start
/// residual landscape) when no start converges.
inline ShootResult shoot(const BoundaryConditions& bc, const PhysicalParams& params,
                         const ShootOptions& opt = {}) {
    bc.validate();
    const double T = bc.horizon;

    auto residual = [&](double px0, double pz0,
                        double& rx, double& rz) -> bool {
        const auto end = detail::integrate_endpoint({bc.x_i, bc.z_i, px0, pz0}, T, opt.step,
                                                    params, opt.delta1, opt.delta2);
        if (!end) return false;
        rx = end->x - bc.x_f;
        rz = end->z - bc.z_f;
        return true;
    };

    std::vector<std::array<double, 2>> starts = opt.explicit_starts;
    if (starts.empty()) {
        for (double a : opt.start_grid)
            for (double b : opt.start_grid) starts.push_back({a, b});
    }

    std::vector<ShootRoot> roots;
    std::ostringstream landscape;
    landscape.setf(std::ios::scientific);

    for (const auto& s0 : starts) {
        double px = s0[0], pz = s0[1];
        double rx, rz;
        if (!residual(px, pz, rx, rz)) {
            landscape << "start (" << s0[0] << ", " << s0[1] << "): diverged\n";
            continue;
        }
        double rnorm = std::hypot(rx, rz);
        int iter = 0;
        bool converged = rnorm < opt.tolerance;
        while (!converged && iter < opt.max_iterations) {
            ++iter;
            const double hx = 1e-7 * std::max(1.0, std::fabs(px));
            const double hz = 1e-7 * std::max(1.0, std::fabs(pz));
            double rx_px_p, rz_px_p, rx_px_m, rz_px_m, rx_pz_p, rz_pz_p, rx_pz_m, rz_pz_m;
            if (!residual(px + hx, pz, rx_px_p, rz_px_p) ||
                !residual(px - hx, pz, rx_px_m, rz_px_m) ||
                !residual(px, pz + hz, rx_pz_p, rz_pz_p) ||
                !residual(px, pz - hz, rx_pz_m, rz_pz_m))
                break;
            const double j00 = (rx_px_p - rx_px_m) / (2.0 * hx);
            const double j10 = (rz_px_p - rz_px_m) / (2.0 * hx);
            const double j01 = (rx_pz_p - rx_pz_m) / (2.0 * hz);
            const double j11 = (rz_pz_p - rz_pz_m) / (2.0 * hz);

            // The endpoint can be exactly insensitive to one multiplier
            // (undriven paths conserve p_x x, making r constant), so gate
            // negligible Jacobian columns instead of inverting noise.
            const double c0 = std::hypot(j00, j10);
            const double c1 = std::hypot(j01, j11);
            const double gate = 1e-5 * std::max(c0, c1);
            double dpx = 0.0, dpz = 0.0;
            if (c0 <= gate && c1 <= gate) break;
            if (c0 <= gate) {
                dpz = (j01 * rx + j11 * rz) / (c1 * c1);
            } else if (c1 <= gate) {
                dpx = (j00 * rx + j10 * rz) / (c0 * c0);
            } else {
                const double det = j00 * j11 - j01 * j10;
                if (std::fabs(det) >= 1e-12 * c0 * c1) {
                    dpx = (j11 * rx - j01 * rz) / det;
                    dpz = (-j10 * rx + j00 * rz) / det;
                } else {
                    // near-parallel columns: damped least-squares step
                    const double lam = 1e-12 * (c0 * c0 + c1 * c1);
                    const double a00 = c0 * c0 + lam, a11 = c1 * c1 + lam;
                    const double a01 = j00 * j01 + j10 * j11;
                    const double b0 = j00 * rx + j10 * rz, b1 = j01 * rx + j11 * rz;
                    const double d2 = a00 * a11 - a01 * a01;
                    if (d2 == 0.0) break;
                    dpx = (a11 * b0 - a01 * b1) / d2;
                    dpz = (-a01 * b0 + a00 * b1) / d2;
                }
            }

            // Backtrack with damping factor 0.5 on residual increase.
            double alpha = 1.0;
            bool accepted = false;
            for (int back = 0; back < 12; ++back) {
                double nrx, nrz;
                if (residual(px - alpha * dpx, pz - alpha * dpz, nrx, nrz)) {
                    const double nnorm = std::hypot(nrx, nrz);
                    if (nnorm < rnorm) {
                        px -= alpha * dpx;
                        pz -= alpha * dpz;
                        rx = nrx;
                        rz = nrz;
                        rnorm = nnorm;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
            converged = rnorm < opt.tolerance;
        }
        landscape << "start (" << s0[0] << ", " << s0[1] << "): residual " << rnorm << " after "
                  << iter << " iterations\n";
        if (!converged) continue;

        ShootRoot root;
        root.px0 = px;
        root.pz0 = pz;
        root.residual = rnorm;
        root.iterations = iter;
        root.path = integrate_path({bc.x_i, bc.z_i, px, pz}, T, opt.step, params, opt.delta1,
                                   opt.delta2);
        root.path.terminal_residual = rnorm;
        root.action = root.path.log_likelihood;

        // Roots are the same physical path when their observable (x, z, r)
        // histories coincide; multipliers alone can differ along degenerate
        // directions. Keep the minimum-norm multiplier representative.
        auto same_path = [&](const OptimalPath& a, const OptimalPath& b) {
            const std::size_t n = a.size() - 1;
            for (std::size_t k : {std::size_t{0}, n / 4, n / 2, 3 * n / 4, n}) {
                if (std::hypot(a.points[k].x - b.points[k].x, a.points[k].z - b.points[k].z) >
                    opt.dedupe_tolerance)
                    return false;
                if (std::fabs(a.points[k].readout() - b.points[k].readout()) >
                    opt.dedupe_tolerance)
                    return false;
            }
            return true;
        };
        auto dup = std::find_if(roots.begin(), roots.end(), [&](const ShootRoot& r) {
            return std::hypot(r.px0 - px, r.pz0 - pz) < opt.dedupe_tolerance ||
                   same_path(r.path, root.path);
        });
        if (dup != roots.end()) {
            if (std::hypot(px, pz) < std::hypot(dup->px0, dup->pz0)) *dup = std::move(root);
            continue;
        }
        roots.push_back(std::move(root));
    }

    if (roots.empty())
        throw convergence_error("shoot: no root found; residual landscape:\n" + landscape.str());

    std::sort(roots.begin(), roots.end(),
              [](const ShootRoot& a, const ShootRoot& b) { return a.action > b.action; });
    return {std::move(roots)};
}

/// shoot() with homotopy in the horizon: when the direct multi-start solve
/// fails (long horizons make the endpoint exponentially sensitive to the
/// multipliers), solve at a shorter horizon first and walk the horizon up,
/// re-starting each stage from the previous principal root.
inline ShootResult shoot_continuation(const BoundaryConditions& bc, const PhysicalParams& params,
                                      const ShootOptions& opt = {}) {
    try {
        return shoot(bc, params, opt);
    } catch (const convergence_error&) {
    }
    const std::size_t n_full = detail::step_count(bc.horizon, opt.step);
    double f = 0.5;
    ShootOptions stage_opt = opt;
    auto solve_at = [&](double frac) {
        const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                    std::llround(frac * static_cast<double>(n_full))));
        BoundaryConditions stage = bc;
        stage.horizon = static_cast<double>(n) * opt.step;
        return shoot(stage, params, stage_opt);
    };
    ShootResult current = [&] {
        for (;; f *= 0.5) {
            if (f < 1.0 / 64.0)
                throw convergence_error("shoot_continuation: no solvable starting horizon");
            try {
                return solve_at(f);
            } catch (const convergence_error&) {
            }
        }
    }();
    double df = 0.5 * (1.0 - f);
    while (f < 1.0) {
        const double f_next = std::min(1.0, f + df);
        stage_opt.explicit_starts = {{current.principal().px0, current.principal().pz0}};
        try {
            current = solve_at(f_next);
            f = f_next;
            df = std::min(2.0 * df, 1.0 - f + 1e-12);
        } catch (const convergence_error&) {
            df *= 0.5;
            if (df * static_cast<double>(n_full) < 1.0)
                throw convergence_error(
                    "shoot_continuation: stalled at horizon fraction " + std::to_string(f));
        }
    }
    return current;
}

enum class Extremum { Maximum, Minimum, Saddle };

inline const char* to_string(Extremum e) {
    switch (e) {
        case Extremum::Maximum: return "maximum";
        case Extremum::Minimum: return "minimum";
        case Extremum::Saddle: return "saddle";
    }
    return "saddle";
}

struct VariationalPoint {
    double delta1 = 0.0, delta2 = 0.0;
    bool converged = false;
    double action = 0.0;
};

struct VariationalResult {
    Extremum classification = Extremum::Saddle;
    double base_action = 0.0;
    std::vector<VariationalPoint> profile;
};

/// Classify a converged extremal path by re-shooting the delta-perturbed
/// system to the same boundary conditions over a grid of (delta1, delta2)
/// and comparing path likelihoods. Perturbed shoots start from the
/// unperturbed root's multipliers; failures are recorded as gaps.
inline VariationalResult variational_check(const ShootRoot& base, const BoundaryConditions& bc,
                                           const PhysicalParams& params, const ShootOptions& opt,
                                           const std::vector<std::array<double, 2>>& deltas) {
    VariationalResult res;
    res.base_action = base.action;
    bool above = false, below = false;
    for (const auto& d : deltas) {
        VariationalPoint pt;
        pt.delta1 = d[0];
        pt.delta2 = d[1];
        if (d[0] == 0.0 && d[1] == 0.0) {
            pt.converged = true;
            pt.action = base.action;
        } else {
            ShootOptions o = opt;
            o.delta1 = d[0];
            o.delta2 = d[1];
            o.explicit_starts = {{base.px0, base.pz0}};
            try {
                const ShootResult r = shoot(bc, params, o);
                pt.converged = true;
                pt.action = r.principal().action;
                if (pt.action > res.base_action) above = true;
                if (pt.action < res.base_action) below = true;
            } catch (const convergence_error&) {
                pt.converged = false;
            }
        }
        res.profile.push_back(pt);
    }
    if (below && !above)
        res.classification = Extremum::Maximum;
    else if (above && !below)
        res.classification = Extremum::Minimum;
    else
        res.classification = Extremum::Saddle;
    return res;
}

/// V_opt(t) = dV * r(t) / 2.
inline std::vector<double> optimal_signal(const OptimalPath& path, double delta_v) {
    std::vector<double> v;
    v.reserve(path.points.size());
    for (const auto& p : path.points) v.push_back(0.5 * delta_v * p.readout());
    return v;
}

}  // namespace qpath
