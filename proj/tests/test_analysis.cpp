#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qpath/analysis.hpp"

using namespace qpath;

namespace {

PhysicalParams fig3_params() {
    PhysicalParams p;
    p.omega = 0.0;
    p.tau = 1.25e-6;
    p.gamma_ens = 0.94e6;
    p.dt = 16e-9;
    return p;
}

TrajectorySet small_set() {
    const PhysicalParams p = fig3_params();
    return simulate_ensemble({1.0, 0.0, 0.0}, p, 89 * p.dt, 2000, 321);
}

}  // namespace

TEST_CASE("postselect: huge window keeps everything, selection is monotone") {
    const auto set = small_set();
    const double T = set.duration();
    const auto all = postselect(set, {0.0, -0.5, 5.0, T});
    CHECK(all.size() == set.size());

    const auto narrow = postselect(set, {0.0, -0.5, 0.1, T, true});
    const auto wide = postselect(set, {0.0, -0.5, 0.3, T, true});
    CHECK(narrow.size() <= wide.size());
    for (std::size_t idx : narrow.indices)
        CHECK(std::find(wide.indices.begin(), wide.indices.end(), idx) != wide.indices.end());
}

TEST_CASE("postselect agrees with a brute-force scan") {
    const auto set = small_set();
    const PostSelection sel{0.24, -0.85, 0.12, set.duration()};
    const auto sub = postselect(set, sel);
    std::vector<std::size_t> oracle;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto states = set.states(i);
        const auto& s = states.back();
        if (std::fabs(s.z - sel.z_f) <= sel.window && std::fabs(s.x - sel.x_f) <= sel.window)
            oracle.push_back(i);
    }
    CHECK(sub.indices == oracle);
}

TEST_CASE("postselect: bad window and horizon rejected") {
    const auto set = small_set();
    CHECK_THROWS_AS(postselect(set, {0.0, 0.0, 0.0, 0.0}), config_error);
    CHECK_THROWS_AS(postselect(set, {0.0, 0.0, 0.1, 10.0}), config_error);
}

TEST_CASE("empirical_mlp: needs enough statistics") {
    const auto set = small_set();
    SubEnsemble sub{&set, set.n_steps, {0, 1, 2}};
    CHECK_THROWS_AS(empirical_mlp(sub), insufficient_statistics);
}

TEST_CASE("empirical_mlp: top percentile size and threshold ordering") {
    const auto set = small_set();
    const auto sub = full_ensemble(set);
    const auto mlp = empirical_mlp(sub, 5.0);
    CHECK(mlp.n_averaged == sub.size() / 20);
    CHECK(mlp.times.size() == set.n_steps + 1);
    CHECK(mlp.x.front() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mlp.x_err.front() == 0.0);

    // averaging everything must include the 5% threshold paths
    const auto mlp_all = empirical_mlp(sub, 100.0);
    CHECK(mlp_all.n_averaged == sub.size());
    CHECK(mlp_all.likelihood_threshold <= mlp.likelihood_threshold);
}

TEST_CASE("empirical_mlp: ranking is invariant under per-step constant offsets") {
    // the record normalization contributes n * c(dt) to every same-length
    // trajectory, so adding a constant per step cannot reorder them
    const auto set = small_set();
    const DetectorModel det = DetectorModel::from(set.params);
    std::vector<std::pair<double, std::size_t>> a, b;
    for (std::size_t i = 0; i < 50; ++i) {
        const auto traj = set.trajectory(i);
        const auto states = traj.states();
        const double action = path_action(states, traj.readouts, det);
        a.emplace_back(action, i);
        b.emplace_back(action + 7.5 * static_cast<double>(set.n_steps), i);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second == b[i].second);
}

TEST_CASE("median_path: odd count picks a sample member, even count the midpoint") {
    PhysicalParams p = fig3_params();
    TrajectorySet set{p, {1.0, 0.0, 0.0}, PropagatorScheme::Verbatim, 0, 3, {}};
    // three hand-made records: constant r = -2, 0, +1
    set.readouts = {-2.0, -2.0, -2.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0};
    const auto odd = median_path(full_ensemble(set));
    const auto mid_z = set.states(1);  // z is monotone in r
    const auto mid_x = set.states(2);  // x = e^{-gamma t} sech(rt/tau): |r| = 1 is the middle
    for (std::size_t k = 0; k < odd.z.size(); ++k) {
        CHECK(odd.z[k] == mid_z[k].z);
        CHECK(odd.x[k] == mid_x[k].x);
    }

    TrajectorySet set2 = set;
    set2.readouts = {-2.0, -2.0, -2.0, 1.0, 1.0, 1.0};
    const auto even = median_path(full_ensemble(set2));
    const auto lo = set2.states(0);
    const auto hi = set2.states(1);
    for (std::size_t k = 0; k < even.z.size(); ++k)
        CHECK(even.z[k] == doctest::Approx(0.5 * (lo[k].z + hi[k].z)).epsilon(1e-12));
}

TEST_CASE("histogram: counts are conserved per time column") {
    const auto set = small_set();
    const auto sub = full_ensemble(set);
    const auto h = histogram(sub, 'z', 40);
    REQUIRE(h.counts.size() == set.n_steps + 1);
    for (const auto& col : h.counts) {
        double s = 0.0;
        for (double c : col) s += c;
        CHECK(s == doctest::Approx(static_cast<double>(sub.size())).epsilon(1e-12));
    }
    const auto hf = histogram(sub, 'z', 40, -1.05, 1.05, HistogramNorm::PerTimeFraction);
    double s0 = 0.0;
    for (double c : hf.counts[10]) s0 += c;
    CHECK(s0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram: late-time z mass bifurcates to the poles") {
    PhysicalParams p = fig3_params();
    p.gamma_ens = 1.0 / (2.0 * p.tau);
    const auto set = simulate_ensemble({1.0, 0.0, 0.0}, p, 400 * p.dt, 1000, 5150);
    const auto h = histogram(full_ensemble(set), 'z', 42, -1.05, 1.05);
    const auto& last = h.counts.back();
    // |z| < 1 strictly, so collapsed mass sits just inside the +-1 bins
    const double edges = last[0] + last[1] + last[40] + last[41];
    double center = 0.0;
    for (std::size_t b = 18; b < 24; ++b) center += last[b];
    CHECK(edges > 10.0 * std::max(center, 1.0));
}

TEST_CASE("histogram: argument validation") {
    const auto set = small_set();
    const auto sub = full_ensemble(set);
    CHECK_THROWS_AS(histogram(sub, 'y'), config_error);
    CHECK_THROWS_AS(histogram(sub, 'z', 1), config_error);
}

TEST_CASE("weak_function: unconditioned mean readout tracks the mean z") {
    const auto set = small_set();
    const auto wf = weak_function(full_ensemble(set));
    REQUIRE(wf.values.size() == set.n_steps);
    for (std::size_t k : {std::size_t{0}, std::size_t{40}, std::size_t{88}}) {
        double mz = 0.0;
        for (std::size_t i = 0; i < set.size(); ++i)
            mz += set.trajectory(i).state_at_step(k).z;
        mz /= static_cast<double>(set.size());
        CHECK(std::fabs(wf.values[k] - mz) < 4.0 * wf.stderrs[k]);
    }
}

TEST_CASE("weak_function: conditioning on a low-z arrival biases the record down") {
    const auto set = small_set();
    const auto sub = postselect(set, {0.0, -0.8, 0.15, set.duration(), true});
    REQUIRE(sub.size() > 20);
    const auto wf = weak_function(sub, 2);
    double acc = 0.0;
    for (double v : wf.values) acc += v;
    CHECK(acc / static_cast<double>(wf.values.size()) < -0.3);
}

TEST_CASE("transit-time density integrates to one over arrival states") {
    for (double zi : {0.0, -0.4, 0.6}) {
        for (double T : {0.3e-6, 1.0e-6, 3.0e-6}) {
            // substitute u = atanh z so the near-pole mass is resolved
            const double tau = 1.25e-6;
            const double lo = -14.0, hi = 14.0;
            const int n = 40000;  // Simpson
            const double h = (hi - lo) / n;
            double acc = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double u = lo + i * h;
                const double z = std::tanh(u);
                const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                acc += w * mlt_density(z, zi, T, tau) * (1.0 - z * z);
            }
            acc *= h / 3.0;
            CHECK(acc == doctest::Approx(1.0).epsilon(1e-4));
        }
    }
}

TEST_CASE("most_likely_time maximizes the transit-time density") {
    RngStream rng(99);
    const double tau = 1.25e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const double zi = 1.6 * (rng.uniform() - 0.5);
        double zf = 1.6 * (rng.uniform() - 0.5);
        if (std::fabs(zf - zi) < 0.05) zf = zi + 0.3;
        const double t_opt = most_likely_time(zf, zi, tau);
        REQUIRE(t_opt > 0.0);
        const double dT = 1e-4 * tau;
        double best_T = dT, best = -1.0;
        for (double T = dT; T < 5.0 * tau; T += dT) {
            const double d = mlt_density(zf, zi, T, tau);
            if (d > best) {
                best = d;
                best_T = T;
            }
        }
        CHECK(best_T == doctest::Approx(t_opt).epsilon(2e-3));
    }
}

TEST_CASE("most_likely_time: hand values") {
    const double tau = 1.25e-6;
    CHECK(most_likely_time(0.5, 0.5, tau) == 0.0);
    // gbar = atanh(0.6) = 0.6931..., T = tau (sqrt(1 + 4 gbar^2) - 1)/2
    const double g = std::atanh(0.6);
    CHECK(most_likely_time(0.6, 0.0, tau) ==
          doctest::Approx(tau * 0.5 * (std::sqrt(1.0 + 4.0 * g * g) - 1.0)).epsilon(1e-12));
    CHECK(most_likely_time(0.6, 0.0, tau) / tau == doctest::Approx(0.3547).epsilon(1e-3));
    CHECK_THROWS_AS(most_likely_time(1.0, 0.0, tau), config_error);
}

TEST_CASE("transit-time density: symmetric arrivals from z = 0 are equally likely") {
    const double tau = 1.25e-6;
    for (double T : {0.4e-6, 1.7e-6})
        CHECK(mlt_density(0.7, 0.0, T, tau) ==
              doctest::Approx(mlt_density(-0.7, 0.0, T, tau)).epsilon(1e-12));
}
