#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "qpath/detector.hpp"
#include "qpath/dynamics.hpp"
#include "qpath/errors.hpp"
#include "qpath/params.hpp"
#include "qpath/rng.hpp"

namespace qpath {

/// One experimental run: initial state plus readout record. The state
/// sequence is never stored; it is re-propagated on demand, which keeps it
/// bit-exactly reproducible from (initial, readouts, params, scheme).
struct Trajectory {
    BlochState initial;
    PhysicalParams params;
    PropagatorScheme scheme = PropagatorScheme::Verbatim;
    std::vector<double> readouts;

    std::size_t steps() const { return readouts.size(); }

    std::vector<BlochState> states() const {
        std::vector<BlochState> out;
        out.reserve(readouts.size() + 1);
        out.push_back(initial);
        BlochState s = initial;
        for (double r : readouts) {
            s = propagate_step(s, r, params, scheme);
            out.push_back(s);
        }
        return out;
    }

    BlochState state_at_step(std::size_t k) const {
        BlochState s = initial;
        for (std::size_t i = 0; i < k && i < readouts.size(); ++i)
            s = propagate_step(s, readouts[i], params, scheme);
        return s;
    }
};

/// Ensemble of trajectories sharing parameters and initial state; the
/// readout matrix is stored flat (row = trajectory). Reproducible from
/// (params, initial, scheme, master_seed, n_traj, n_steps) alone.
struct TrajectorySet {
    PhysicalParams params;
    BlochState initial;
    PropagatorScheme scheme = PropagatorScheme::Verbatim;
    std::uint64_t master_seed = 0;
    std::size_t n_steps = 0;
    std::vector<double> readouts;  // n_traj * n_steps

    std::size_t size() const { return n_steps == 0 ? 0 : readouts.size() / n_steps; }
    double duration() const { return static_cast<double>(n_steps) * params.dt; }

    std::span<const double> row(std::size_t i) const {
        return {readouts.data() + i * n_steps, n_steps};
    }

    Trajectory trajectory(std::size_t i) const {
        auto r = row(i);
        return {initial, params, scheme, {r.begin(), r.end()}};
    }

    std::vector<BlochState> states(std::size_t i) const { return trajectory(i).states(); }
};

/// Simulate one trajectory: at each step the readout is sampled conditioned
/// on the measurement prior's z, then the discrete update is applied.
inline Trajectory simulate_trajectory(const BlochState& initial, const PhysicalParams& params,
                                      double duration, RngStream& rng,
                                      PropagatorScheme scheme = PropagatorScheme::Verbatim) {
    const double steps_f = duration / params.dt;
    const auto n = static_cast<std::size_t>(std::llround(steps_f));
    if (std::fabs(steps_f - static_cast<double>(n)) > 1e-6)
        throw config_error("simulate_trajectory: duration is not a multiple of dt");
    const DetectorModel det = DetectorModel::from(params);
    Trajectory traj{initial, params, scheme, {}};
    traj.readouts.reserve(n);
    BlochState s = initial;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = sample_readout(measurement_prior(s, params, scheme).z, det, rng);
        traj.readouts.push_back(r);
        s = propagate_step(s, r, params, scheme);
    }
    return traj;
}

/// Simulate n_traj independent trajectories. Each trajectory draws from its
/// own (master_seed, index) substream, so the result is bit-identical for
/// any worker count.
inline TrajectorySet simulate_ensemble(const BlochState& initial, const PhysicalParams& params,
                                       double duration, std::size_t n_traj,
                                       std::uint64_t master_seed,
                                       PropagatorScheme scheme = PropagatorScheme::Verbatim,
                                       unsigned n_workers = 1) {
    if (n_traj < 1) throw config_error("simulate_ensemble: n_traj must be >= 1");
    const double steps_f = duration / params.dt;
    const auto n_steps = static_cast<std::size_t>(std::llround(steps_f));
    if (std::fabs(steps_f - static_cast<double>(n_steps)) > 1e-6)
        throw config_error("simulate_ensemble: duration is not a multiple of dt");

    TrajectorySet set{params, initial, scheme, master_seed, n_steps, {}};
    set.readouts.resize(n_traj * n_steps);

    auto work = [&](std::size_t begin, std::size_t end) {
        const DetectorModel det = DetectorModel::from(params);
        for (std::size_t i = begin; i < end; ++i) {
            RngStream rng = RngStream::substream(master_seed, i);
            BlochState s = initial;
            double* out = set.readouts.data() + i * n_steps;
            for (std::size_t k = 0; k < n_steps; ++k) {
                const double r = sample_readout(measurement_prior(s, params, scheme).z, det, rng);
                out[k] = r;
                s = propagate_step(s, r, params, scheme);
            }
        }
    };

    if (n_workers <= 1) {
        work(0, n_traj);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_traj + n_workers - 1) / n_workers;
        for (unsigned w = 0; w < n_workers; ++w) {
            const std::size_t b = std::min<std::size_t>(w * chunk, n_traj);
            const std::size_t e = std::min<std::size_t>(b + chunk, n_traj);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& t : pool) t.join();
    }
    return set;
}

/// Deterministic propagation of an externally supplied readout record.
inline Trajectory reconstruct_from_record(const BlochState& initial, const PhysicalParams& params,
                                          const ReadoutRecord& record,
                                          PropagatorScheme scheme = PropagatorScheme::Verbatim) {
    if (std::fabs(record.dt - params.dt) > 1e-6 * params.dt)
        throw config_error("reconstruct_from_record: record dt does not match params.dt");
    return {initial, params, scheme, record.values};
}

struct TomographyResult {
    std::size_t n_selected = 0;
    double x = 0.0;
    double z = 0.0;
    bool valid() const { return n_selected > 0; }
};

/// Conditioned tomography validation: select trajectories whose propagated
/// state at time t matches (target_x, target_z) within the window, then for
/// each draw a projective outcome in the x and z bases from the conditional
/// state and average. readout_fidelity < 1 optionally flips each outcome
/// with probability (1 - fidelity); default models ideal readout.
inline TomographyResult conditioned_tomography(const TrajectorySet& set, double target_x,
                                               double target_z, double t, double window,
                                               RngStream& rng, double readout_fidelity = 1.0) {
    if (!(window > 0.0)) throw config_error("conditioned_tomography: window must be positive");
    const double step_f = t / set.params.dt;
    const auto k = static_cast<std::size_t>(std::llround(step_f));
    if (k > set.n_steps)
        throw config_error("conditioned_tomography: t beyond trajectory horizon");

    TomographyResult res;
    double sx = 0.0, sz = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const BlochState s = set.trajectory(i).state_at_step(k);
        if (std::fabs(s.x - target_x) > window || std::fabs(s.z - target_z) > window) continue;
        ++res.n_selected;
        double ox = rng.uniform() < 0.5 * (1.0 + s.x) ? 1.0 : -1.0;
        double oz = rng.uniform() < 0.5 * (1.0 + s.z) ? 1.0 : -1.0;
        if (readout_fidelity < 1.0) {
            if (rng.uniform() > readout_fidelity) ox = -ox;
            if (rng.uniform() > readout_fidelity) oz = -oz;
        }
        sx += ox;
        sz += oz;
    }
    if (res.n_selected == 0) return res;  // caller checks valid(); no NaNs emitted
    res.x = sx / static_cast<double>(res.n_selected);
    res.z = sz / static_cast<double>(res.n_selected);
    return res;
}

}  // namespace qpath
