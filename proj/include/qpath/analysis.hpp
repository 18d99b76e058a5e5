#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "qpath/errors.hpp"
#include "qpath/mlp.hpp"
#include "qpath/simulator.hpp"

namespace qpath {

/// Boundary-state window defining a post-selected sub-ensemble.
struct PostSelection {
    double x_f = 0.0;
    double z_f = 0.0;
    double window = 0.0;
    double t_f = 0.0;     // seconds
    bool z_only = false;  // ignore the x cut (same-z_F selections)
};

struct SubEnsemble {
    const TrajectorySet* set = nullptr;
    std::size_t step = 0;  // post-selection time step
    std::vector<std::size_t> indices;

    std::size_t size() const { return indices.size(); }
};

inline SubEnsemble postselect(const TrajectorySet& set, const PostSelection& sel) {
    if (!(sel.window > 0.0)) throw config_error("postselect: window must be positive");
    const double step_f = sel.t_f / set.params.dt;
    const auto k = static_cast<std::size_t>(std::llround(step_f));
    if (k > set.n_steps) throw config_error("postselect: t_f beyond trajectory horizon");
    SubEnsemble sub{&set, k, {}};
    for (std::size_t i = 0; i < set.size(); ++i) {
        const BlochState s = set.trajectory(i).state_at_step(k);
        if (std::fabs(s.z - sel.z_f) > sel.window) continue;
        if (!sel.z_only && std::fabs(s.x - sel.x_f) > sel.window) continue;
        sub.indices.push_back(i);
    }
    return sub;
}

/// Time series with per-point standard error (weak functions, average paths).
struct SeriesWithError {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> stderrs;
    std::size_t n = 0;
};

struct EmpiricalMlp {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> x_err;
    std::vector<double> z_err;
    double likelihood_threshold = 0.0;  // log-likelihood of the last path included
    std::size_t n_averaged = 0;
};

/// Empirical most-likely path: rank the sub-ensemble trajectories by their
/// readout-record log-likelihood and average the (x, z) series of the top
/// percentile pointwise.
inline EmpiricalMlp empirical_mlp(const SubEnsemble& sub, double percentile = 5.0) {
    if (sub.size() < 20)
        throw insufficient_statistics("empirical_mlp: need at least 20 post-selected trajectories");
    const TrajectorySet& set = *sub.set;
    const DetectorModel det = DetectorModel::from(set.params);

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(sub.size());
    for (std::size_t idx : sub.indices) {
        const Trajectory traj = set.trajectory(idx);
        const auto states = traj.states();
        const double action = path_action(states, traj.readouts, det);
        ranked.emplace_back(action, idx);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    const auto n_top = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(percentile / 100.0 * ranked.size())));

    EmpiricalMlp mlp;
    mlp.n_averaged = n_top;
    mlp.likelihood_threshold = ranked[n_top - 1].first;
    const std::size_t n_pts = set.n_steps + 1;
    mlp.times.resize(n_pts);
    mlp.x.assign(n_pts, 0.0);
    mlp.z.assign(n_pts, 0.0);
    mlp.x_err.assign(n_pts, 0.0);
    mlp.z_err.assign(n_pts, 0.0);
    for (std::size_t k = 0; k < n_pts; ++k) mlp.times[k] = static_cast<double>(k) * set.params.dt;
    for (std::size_t j = 0; j < n_top; ++j) {
        const auto states = set.states(ranked[j].second);
        for (std::size_t k = 0; k < n_pts; ++k) {
            mlp.x[k] += states[k].x;
            mlp.z[k] += states[k].z;
            mlp.x_err[k] += states[k].x * states[k].x;
            mlp.z_err[k] += states[k].z * states[k].z;
        }
    }
    const double inv = 1.0 / static_cast<double>(n_top);
    for (std::size_t k = 0; k < n_pts; ++k) {
        mlp.x[k] *= inv;
        mlp.z[k] *= inv;
        mlp.x_err[k] = std::sqrt(std::max(0.0, mlp.x_err[k] * inv - mlp.x[k] * mlp.x[k]) /
                                 static_cast<double>(n_top));
        mlp.z_err[k] = std::sqrt(std::max(0.0, mlp.z_err[k] * inv - mlp.z[k] * mlp.z[k]) /
                                 static_cast<double>(n_top));
    }
    return mlp;
}

struct MedianPath {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> z;
};

/// Trajectory of local medians: per-timestep median of each coordinate.
inline MedianPath median_path(const SubEnsemble& sub) {
    if (sub.size() == 0) throw insufficient_statistics("median_path: empty sub-ensemble");
    const TrajectorySet& set = *sub.set;
    const std::size_t n_pts = set.n_steps + 1;
    std::vector<std::vector<double>> xs(n_pts), zs(n_pts);
    for (auto& v : xs) v.reserve(sub.size());
    for (auto& v : zs) v.reserve(sub.size());
    for (std::size_t idx : sub.indices) {
        const auto states = set.states(idx);
        for (std::size_t k = 0; k < n_pts; ++k) {
            xs[k].push_back(states[k].x);
            zs[k].push_back(states[k].z);
        }
    }
    auto median = [](std::vector<double>& v) {
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + mid, v.end());
        if (v.size() % 2 == 1) return v[mid];
        const double hi = v[mid];
        const double lo = *std::max_element(v.begin(), v.begin() + mid);
        return 0.5 * (lo + hi);
    };
    MedianPath mp;
    mp.times.resize(n_pts);
    mp.x.resize(n_pts);
    mp.z.resize(n_pts);
    for (std::size_t k = 0; k < n_pts; ++k) {
        mp.times[k] = static_cast<double>(k) * set.params.dt;
        mp.x[k] = median(xs[k]);
        mp.z[k] = median(zs[k]);
    }
    return mp;
}

enum class HistogramNorm { Counts, PerTimeFraction };

/// (time step) x (coordinate value) occupation histogram.
struct Histogram2D {
    std::vector<double> time_edges;   // n_steps + 2 edges, one column per step
    std::vector<double> value_edges;  // n_bins + 1
    std::vector<std::vector<double>> counts;  // [time column][value bin]
};

inline Histogram2D histogram(const SubEnsemble& sub, char coordinate, std::size_t bins = 50,
                             double lo = -1.05, double hi = 1.05,
                             HistogramNorm norm = HistogramNorm::Counts) {
    if (bins < 2) throw config_error("histogram: need at least 2 bins");
    if (coordinate != 'x' && coordinate != 'z')
        throw config_error("histogram: coordinate must be 'x' or 'z'");
    const TrajectorySet& set = *sub.set;
    const std::size_t n_pts = set.n_steps + 1;
    Histogram2D h;
    h.time_edges.resize(n_pts + 1);
    for (std::size_t k = 0; k <= n_pts; ++k)
        h.time_edges[k] = (static_cast<double>(k) - 0.5) * set.params.dt;
    h.value_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        h.value_edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    h.counts.assign(n_pts, std::vector<double>(bins, 0.0));
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (std::size_t idx : sub.indices) {
        const auto states = set.states(idx);
        for (std::size_t k = 0; k < n_pts; ++k) {
            const double v = coordinate == 'x' ? states[k].x : states[k].z;
            auto b = static_cast<long>(std::floor((v - lo) * scale));
            b = std::clamp<long>(b, 0, static_cast<long>(bins) - 1);
            h.counts[k][static_cast<std::size_t>(b)] += 1.0;
        }
    }
    if (norm == HistogramNorm::PerTimeFraction && !sub.indices.empty()) {
        const double inv = 1.0 / static_cast<double>(sub.size());
        for (auto& col : h.counts)
            for (auto& c : col) c *= inv;
    }
    return h;
}

inline SubEnsemble full_ensemble(const TrajectorySet& set) {
    SubEnsemble sub{&set, set.n_steps, {}};
    sub.indices.resize(set.size());
    std::iota(sub.indices.begin(), sub.indices.end(), 0);
    return sub;
}

/// Conditioned average readout ("weak function"): per-step mean of r over
/// the sub-ensemble with standard errors. A centered moving average of
/// odd width 2w+1 may be applied for presentation; default none.
inline SeriesWithError weak_function(const SubEnsemble& sub, std::size_t smoothing_window = 0) {
    if (sub.size() == 0) throw insufficient_statistics("weak_function: empty sub-ensemble");
    const TrajectorySet& set = *sub.set;
    const std::size_t n = set.n_steps;
    SeriesWithError wf;
    wf.n = sub.size();
    wf.times.resize(n);
    wf.values.assign(n, 0.0);
    wf.stderrs.assign(n, 0.0);
    std::vector<double> sum2(n, 0.0);
    for (std::size_t idx : sub.indices) {
        const auto row = set.row(idx);
        for (std::size_t k = 0; k < n; ++k) {
            wf.values[k] += row[k];
            sum2[k] += row[k] * row[k];
        }
    }
    const double m = static_cast<double>(sub.size());
    for (std::size_t k = 0; k < n; ++k) {
        wf.times[k] = static_cast<double>(k) * set.params.dt;
        wf.values[k] /= m;
        const double var = std::max(0.0, sum2[k] / m - wf.values[k] * wf.values[k]);
        wf.stderrs[k] = std::sqrt(var / m);
    }
    if (smoothing_window > 0) {
        const auto w = static_cast<long>(smoothing_window);
        std::vector<double> smoothed(n);
        for (long k = 0; k < static_cast<long>(n); ++k) {
            double acc = 0.0;
            long cnt = 0;
            for (long j = k - w; j <= k + w; ++j) {
                if (j < 0 || j >= static_cast<long>(n)) continue;
                acc += wf.values[static_cast<std::size_t>(j)];
                ++cnt;
            }
            smoothed[static_cast<std::size_t>(k)] = acc / static_cast<double>(cnt);
        }
        wf.values = std::move(smoothed);
    }
    return wf;
}

/// Transition density P(z_F | z_I) at horizon T for the undriven qubit,
/// evaluated as the normalized two-component mixture in the average-readout
/// variable (algebraically identical to the closed form with
/// rbar = (tau/T)(atanh z_F - atanh z_I)).
inline double mlt_density(double z_f, double z_i, double T, double tau) {
    if (std::fabs(z_f) >= 1.0 || std::fabs(z_i) >= 1.0)
        throw config_error("mlt_density: |z| must be < 1");
    if (!(T > 0.0) || !(tau > 0.0)) throw config_error("mlt_density: T and tau must be positive");
    const double gbar = std::atanh(z_f) - std::atanh(z_i);
    const double rbar = tau / T * gbar;
    const double pref = std::sqrt(tau / (2.0 * M_PI * T)) / (1.0 - z_f * z_f);
    const double wp = 0.5 * (1.0 + z_i);
    const double wm = 0.5 * (1.0 - z_i);
    const double ep = std::exp(-T / (2.0 * tau) * (rbar - 1.0) * (rbar - 1.0));
    const double em = std::exp(-T / (2.0 * tau) * (rbar + 1.0) * (rbar + 1.0));
    return pref * (wp * ep + wm * em);
}

inline std::vector<double> mlt_density_curve(double z_f, double z_i,
                                             const std::vector<double>& T_grid, double tau) {
    std::vector<double> out;
    out.reserve(T_grid.size());
    for (double T : T_grid) out.push_back(mlt_density(z_f, z_i, T, tau));
    return out;
}

/// Most likely transit time T_opt = tau (sqrt(1 + 4 gbar^2) - 1)/2 with
/// gbar = atanh((z_F - z_I)/(1 - z_I z_F)).
inline double most_likely_time(double z_f, double z_i, double tau) {
    if (std::fabs(z_f) >= 1.0 || std::fabs(z_i) >= 1.0)
        throw config_error("most_likely_time: |z| must be < 1");
    const double gbar = std::atanh((z_f - z_i) / (1.0 - z_i * z_f));
    return tau * 0.5 * (std::sqrt(1.0 + 4.0 * gbar * gbar) - 1.0);
}

}  // namespace qpath
