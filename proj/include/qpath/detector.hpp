#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "qpath/errors.hpp"
#include "qpath/params.hpp"
#include "qpath/rng.hpp"

namespace qpath {

/// Gaussian detector model in dimensionless readout units r = 2V/dV.
/// Per sampling step the readout is a two-component mixture: mean +1 with
/// weight (1+z)/2 and mean -1 with weight (1-z)/2, each of variance tau/dt.
struct DetectorModel {
    double delta_v = 1.0;
    double tau = 0.0;
    double dt = 0.0;

    double variance_r() const { return tau / dt; }
    /// Per-step voltage variance sigma^2 = dV^2 tau / (4 dt).
    double sigma2_step_v() const { return delta_v * delta_v * tau / (4.0 * dt); }

    static DetectorModel from(const PhysicalParams& p) {
        return {p.delta_v, p.tau, p.dt};
    }
};

/// One readout draw conditioned on z: Bernoulli component choice, then a
/// Gaussian of variance tau/dt around the chosen eigenvalue.
inline double sample_readout(double z, const DetectorModel& m, RngStream& rng) {
    if (std::fabs(z) > 1.0 + kNormSlack)
        throw config_error("sample_readout: z outside [-1, 1]");
    const double zc = std::clamp(z, -1.0, 1.0);
    const double mean = rng.uniform() < 0.5 * (1.0 + zc) ? 1.0 : -1.0;
    return mean + std::sqrt(m.variance_r()) * rng.gaussian();
}

/// log P(r | z), the normalized mixture density in r-measure,
/// sqrt(dt/2 pi tau) [ (1+z)/2 e^{-dt (r-1)^2 / 2 tau} + (1-z)/2 e^{-dt (r+1)^2 / 2 tau} ].
inline double readout_log_likelihood(double r, double z, const DetectorModel& m) {
    const double a = m.dt / (2.0 * m.tau);
    const double log_norm = 0.5 * std::log(m.dt / (2.0 * M_PI * m.tau));
    const double wp = 0.5 * (1.0 + z);
    const double wm = 0.5 * (1.0 - z);
    const double ep = -a * (r - 1.0) * (r - 1.0);
    const double em = -a * (r + 1.0) * (r + 1.0);
    if (wp <= 0.0) return log_norm + em + std::log(wm);
    if (wm <= 0.0) return log_norm + ep + std::log(wp);
    // log-sum-exp over the two components
    const double lp = std::log(wp) + ep;
    const double lm = std::log(wm) + em;
    const double hi = std::max(lp, lm);
    return log_norm + hi + std::log1p(std::exp(std::min(lp, lm) - hi));
}

/// Uniformly sampled readout record, values in dimensionless r units.
struct ReadoutRecord {
    double dt = 0.0;
    std::vector<double> values;

    std::size_t steps() const { return values.size(); }
};

struct CalibrationResult {
    double delta_v = 0.0;
    double tau = 0.0;
};

/// Recovers (dV, tau) from voltage records of known |0> and |1> preparations.
/// For a list of integration times, moment-matched Gaussians are fitted to
/// the time-averaged signals of the two classes and S(t) = dV^2/sigma^2 is
/// regressed through the origin against S = 4 t / tau.
/// Records are in volts; each record must cover the longest integration time.
inline CalibrationResult calibrate_tau(const std::vector<ReadoutRecord>& ground,
                                       const std::vector<ReadoutRecord>& excited,
                                       const std::vector<std::size_t>& integration_steps) {
    if (integration_steps.size() < 3)
        throw config_error("calibrate_tau: need at least 3 integration times");
    if (ground.empty() || excited.empty())
        throw config_error("calibrate_tau: empty record set");
    const double dt = ground.front().dt;

    auto moments = [&](const std::vector<ReadoutRecord>& recs, std::size_t n_steps,
                       double& mean, double& var) {
        double s = 0.0, s2 = 0.0;
        for (const auto& rec : recs) {
            if (rec.steps() < n_steps)
                throw config_error("calibrate_tau: record shorter than integration time");
            double acc = 0.0;
            for (std::size_t k = 0; k < n_steps; ++k) acc += rec.values[k];
            const double v = acc / static_cast<double>(n_steps);
            s += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(recs.size());
        mean = s / n;
        var = s2 / n - mean * mean;
    };

    double sum_ts = 0.0, sum_tt = 0.0, dv_acc = 0.0;
    bool any_noise = false;
    for (std::size_t m : integration_steps) {
        double mg, vg, me, ve;
        moments(ground, m, mg, vg);
        moments(excited, m, me, ve);
        const double dv = mg - me;
        const double var = 0.5 * (vg + ve);
        dv_acc += dv;
        const double t = static_cast<double>(m) * dt;
        if (var > 0.0) {
            any_noise = true;
            sum_ts += t * (dv * dv / var);
            sum_tt += t * t;
        }
    }
    const double delta_v = dv_acc / static_cast<double>(integration_steps.size());
    // Noiseless records: the separation is exact and S diverges (tau -> 0).
    if (!any_noise) return {delta_v, 0.0};
    const double slope = sum_ts / sum_tt;  // = 4 / tau
    if (!(slope > 0.0)) throw config_error("calibrate_tau: non-positive fitted slope");
    return {delta_v, 4.0 / slope};
}

}  // namespace qpath
