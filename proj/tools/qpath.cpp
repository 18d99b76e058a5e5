// qpath: simulate diffusive qubit measurement trajectories, solve optimal
// readout paths between boundary states, and reproduce the standard figure
// pipelines. All outputs are CSV/JSON with a run manifest per directory.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "qpath/qpath.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpath;

namespace {

struct RunConfig {
    double omega_hz = 1.08e6;  // Rabi frequency Omega/2pi [Hz]
    double tau = 315e-9;
    double gamma = 3.85e6;
    double dt = 16e-9;
    double delta_v = 1.0;
    double duration = 1.424e-6;
    double xi = 1.0, zi = 0.0;
    double xf = 0.0, zf = 0.0;
    double window = 0.03;
    double percentile = 5.0;
    double step = 1e-9;
    std::uint64_t seed = 1;
    std::size_t n = 1000;
    unsigned workers = 1;
    std::string scheme = "verbatim";
    std::string out;
    std::vector<double> horizons;

    std::set<std::string> given;  // keys set via config file or CLI flag
    bool has(const std::string& key) const { return given.count(key) != 0; }
    void preset(const std::string& key, double value) {
        if (has(key)) return;
        if (key == "omega_hz") omega_hz = value;
        else if (key == "tau") tau = value;
        else if (key == "gamma") gamma = value;
        else if (key == "dt") dt = value;
        else if (key == "duration") duration = value;
        else if (key == "xi") xi = value;
        else if (key == "zi") zi = value;
        else if (key == "xf") xf = value;
        else if (key == "zf") zf = value;
        else if (key == "window") window = value;
        else if (key == "n") n = static_cast<std::size_t>(value);
    }

    PhysicalParams params() const {
        PhysicalParams p;
        p.omega = 2.0 * std::numbers::pi * omega_hz;
        p.tau = tau;
        p.gamma_ens = gamma;
        p.dt = dt;
        p.delta_v = delta_v;
        return p;
    }

    json to_json() const {
        return {{"omega_hz", omega_hz}, {"tau_s", tau},        {"gamma_per_s", gamma},
                {"dt_s", dt},           {"delta_v", delta_v},  {"duration_s", duration},
                {"xi", xi},             {"zi", zi},            {"xf", xf},
                {"zf", zf},             {"window", window},    {"percentile", percentile},
                {"ode_step_s", step},   {"seed", seed},        {"n", n},
                {"workers", workers},   {"scheme", scheme},    {"format_version", kFormatVersion}};
    }
};

fs::path resolve_out(const RunConfig& cfg, const std::string& fallback) {
    if (!cfg.out.empty()) return cfg.out;
    if (const char* env = std::getenv("QPATH_OUT")) return fs::path(env) / fallback;
    return fs::path("qpath_out") / fallback;
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    json j;
    try {
        io::open_in(path) >> j;
    } catch (const json::exception& e) {
        throw config_error("config " + path + ": " + e.what());
    }
    auto take = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            field = j.at(key).get<std::decay_t<decltype(field)>>();
        } catch (const json::exception&) {
            throw config_error("config " + path + ": field '" + key + "' has the wrong type");
        }
        cfg.given.insert(key);
    };
    take("omega_hz", cfg.omega_hz);
    take("tau_s", cfg.tau);
    take("gamma_per_s", cfg.gamma);
    take("dt_s", cfg.dt);
    take("delta_v", cfg.delta_v);
    take("duration_s", cfg.duration);
    take("xi", cfg.xi);
    take("zi", cfg.zi);
    take("xf", cfg.xf);
    take("zf", cfg.zf);
    take("window", cfg.window);
    take("percentile", cfg.percentile);
    take("ode_step_s", cfg.step);
    take("seed", cfg.seed);
    take("n", cfg.n);
    take("workers", cfg.workers);
    take("scheme", cfg.scheme);
    take("out", cfg.out);
    take("horizons_s", cfg.horizons);
    // normalize key names used by preset()
    for (const char* pair : {"omega_hz:omega_hz", "tau_s:tau", "gamma_per_s:gamma", "dt_s:dt",
                             "duration_s:duration"}) {
        const std::string s(pair);
        const auto colon = s.find(':');
        if (cfg.given.count(s.substr(0, colon))) cfg.given.insert(s.substr(colon + 1));
    }
}

void print_warnings(const PhysicalParams& p) {
    for (const auto& w : p.validate()) std::cerr << "warning: " << w << "\n";
}

json series_json(const SeriesWithError& s) {
    return {{"t", s.times}, {"value", s.values}, {"stderr", s.stderrs}, {"n", s.n}};
}

json path_json(const OptimalPath& path) {
    std::vector<double> x, z, r;
    x.reserve(path.size());
    z.reserve(path.size());
    r.reserve(path.size());
    for (const auto& p : path.points) {
        x.push_back(p.x);
        z.push_back(p.z);
        r.push_back(p.readout());
    }
    return {{"t", path.times}, {"x", x}, {"z", z}, {"r", r},
            {"log_likelihood", path.log_likelihood}};
}

json empirical_json(const EmpiricalMlp& m) {
    return {{"t", m.times},         {"x", m.x},
            {"z", m.z},             {"x_stderr", m.x_err},
            {"z_stderr", m.z_err},  {"n_averaged", m.n_averaged},
            {"likelihood_threshold", m.likelihood_threshold}};
}

int cmd_simulate(const RunConfig& cfg) {
    const PhysicalParams p = cfg.params();
    print_warnings(p);
    const fs::path out = resolve_out(cfg, "simulate");
    const auto set =
        simulate_ensemble({cfg.xi, 0.0, cfg.zi}, p, cfg.duration, cfg.n, cfg.seed,
                          propagator_from_string(cfg.scheme), cfg.workers);
    save_trajectory_set(set, out);
    {
        // fold the run config into the set manifest rather than shadowing it
        json m;
        io::open_in(out / "manifest.json") >> m;
        m["config"] = cfg.to_json();
        std::ofstream f = io::open_out(out / "manifest.json");
        f << m.dump(2) << "\n";
    }
    std::cout << "simulate: " << set.size() << " trajectories x " << set.n_steps << " steps -> "
              << out.string() << "\n";
    return 0;
}

int cmd_mlp(const RunConfig& cfg, bool variational) {
    const PhysicalParams p = cfg.params();
    print_warnings(p);
    const fs::path out = resolve_out(cfg, "mlp");
    fs::create_directories(out);

    std::vector<double> horizons = cfg.horizons;
    if (horizons.empty()) horizons.push_back(cfg.duration);

    std::vector<std::string> artifacts;
    int index = 0;
    for (double T : horizons) {
        ++index;
        const std::string tag = horizons.size() == 1 ? "" : ("_" + std::to_string(index));
        BoundaryConditions bc{cfg.xi, cfg.zi, cfg.xf, cfg.zf, T};
        json report;
        report["horizon_s"] = T;

        const bool analytic_mode = p.omega == 0.0 && !cfg.has("xf");
        OptimalPath reference;
        if (analytic_mode) {
            // undriven: the terminal x is fixed by z_f; compare against the
            // closed form and target its endpoint
            reference = analytic_undriven(cfg.zf, T, p, cfg.step);
            bc.x_f = reference.back().x;
            bc.z_f = reference.back().z;
            save_optimal_path_csv(reference, p, out / ("analytic" + tag + ".csv"));
            artifacts.push_back("analytic" + tag + ".csv");
        }

        ShootOptions opt;
        opt.step = cfg.step;
        const ShootResult res = shoot_continuation(bc, p, opt);
        const OptimalPath& path = res.principal().path;
        save_optimal_path_csv(path, p, out / ("path" + tag + ".csv"));
        artifacts.push_back("path" + tag + ".csv");
        report["shoot"] = shoot_report_json(res);
        report["boundary"] = {{"x_i", bc.x_i}, {"z_i", bc.z_i}, {"x_f", bc.x_f},
                              {"z_f", bc.z_f}};

        if (analytic_mode) {
            double max_dx = 0.0, max_dz = 0.0;
            for (std::size_t k = 0; k < path.size(); ++k) {
                max_dx = std::max(max_dx,
                                  std::fabs(path.points[k].x - reference.points[k].x));
                max_dz = std::max(max_dz,
                                  std::fabs(path.points[k].z - reference.points[k].z));
            }
            report["analytic_comparison"] = {{"max_abs_dx", max_dx}, {"max_abs_dz", max_dz}};
        }

        if (variational) {
            // deltas are in units of 1/tau; axis-wise grid as in the
            // probability-profile panels
            std::vector<std::array<double, 2>> deltas{{0.0, 0.0}};
            for (double d : {0.05, 0.1, 0.2, 0.35, 0.5}) {
                for (double s : {-1.0, 1.0}) {
                    deltas.push_back({s * d / p.tau, 0.0});
                    deltas.push_back({0.0, s * d / p.tau});
                }
            }
            const auto var = variational_check(res.principal(), bc, p, opt, deltas);
            report["variational"] = variational_json(var);
        }

        std::ofstream f = io::open_out(out / ("report" + tag + ".json"));
        f << report.dump(2) << "\n";
        artifacts.push_back("report" + tag + ".json");
        std::cout << "mlp: T = " << T << " s, residual " << res.principal().residual << ", "
                  << res.roots.size() << " root(s) -> " << out.string() << "\n";
    }
    write_run_manifest(out, cfg.to_json(), artifacts);
    return 0;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& record_file) {
    const PhysicalParams p = cfg.params();
    print_warnings(p);
    const fs::path out = resolve_out(cfg, "reconstruct");
    const ReadoutRecord rec = load_readout_csv(record_file, p.delta_v);
    PhysicalParams pr = p;
    if (!cfg.has("dt")) pr.dt = rec.dt;  // trust the record's sampling interval
    const auto traj =
        reconstruct_from_record({cfg.xi, 0.0, cfg.zi}, pr, rec, propagator_from_string(cfg.scheme));
    const auto states = traj.states();
    {
        std::ofstream f = io::open_out(out / "trajectory.csv");
        f << "t,x,z\n";
        for (std::size_t k = 0; k < states.size(); ++k)
            f << io::fmt(static_cast<double>(k) * pr.dt) << "," << io::fmt(states[k].x) << ","
              << io::fmt(states[k].z) << "\n";
    }
    json extra = cfg.to_json();
    extra["record_file"] = record_file;
    extra["record_hash"] = io::file_hash(record_file);
    write_run_manifest(out, extra, {"trajectory.csv"});
    std::cout << "reconstruct: " << rec.values.size() << " steps -> " << out.string() << "\n";
    return 0;
}

void write_sub_ensemble_bundle(const fs::path& out, const std::string& tag,
                               const TrajectorySet& set, const SubEnsemble& sub,
                               const PhysicalParams& p, double percentile,
                               const OptimalPath* theory, std::vector<std::string>& artifacts) {
    const auto full = full_ensemble(set);
    for (char c : {'x', 'z'}) {
        save_histogram_csv(histogram(full, c), out / (tag + "_hist_" + c + "_full.csv"));
        save_histogram_csv(histogram(sub, c), out / (tag + "_hist_" + c + "_post.csv"));
        artifacts.push_back(tag + "_hist_" + std::string(1, c) + "_full.csv");
        artifacts.push_back(tag + "_hist_" + std::string(1, c) + "_post.csv");
    }
    const auto mlp = empirical_mlp(sub, percentile);
    save_empirical_mlp_csv(mlp, out / (tag + "_mlp_x.csv"), out / (tag + "_mlp_z.csv"));
    artifacts.push_back(tag + "_mlp_x.csv");
    artifacts.push_back(tag + "_mlp_z.csv");
    const auto wf = weak_function(sub, 2);
    save_series_csv(wf, out / (tag + "_weak_function.csv"));
    artifacts.push_back(tag + "_weak_function.csv");

    json bundle;
    bundle["empirical_mlp"] = empirical_json(mlp);
    bundle["weak_function"] = series_json(wf);
    bundle["n_postselected"] = sub.size();
    if (theory) {
        bundle["ode_mlp"] = path_json(*theory);
        bundle["optimal_signal"] = optimal_signal(*theory, p.delta_v);
        save_optimal_path_csv(*theory, p, out / (tag + "_theory_path.csv"));
        artifacts.push_back(tag + "_theory_path.csv");
    }
    std::ofstream f = io::open_out(out / (tag + "_bundle.json"));
    f << bundle.dump(2) << "\n";
    artifacts.push_back(tag + "_bundle.json");
}

int figure_fig3(RunConfig cfg, const fs::path& out) {
    cfg.preset("omega_hz", 0.0);
    cfg.preset("tau", 1.25e-6);
    cfg.preset("gamma", 0.94e6);
    cfg.preset("dt", 16e-9);
    cfg.preset("duration", 1.424e-6);
    cfg.preset("xi", 1.0);
    cfg.preset("zi", 0.0);
    cfg.preset("zf", -0.85);
    cfg.preset("window", 0.03);
    cfg.preset("n", 100000);
    const PhysicalParams p = cfg.params();
    print_warnings(p);

    const auto set = simulate_ensemble({cfg.xi, 0.0, cfg.zi}, p, cfg.duration, cfg.n, cfg.seed,
                                       propagator_from_string(cfg.scheme), cfg.workers);
    // same-z_F selection: the undriven terminal x is determined by z_F
    const auto sub = postselect(set, {0.0, cfg.zf, cfg.window, cfg.duration, true});
    const auto theory = analytic_undriven(cfg.zf, cfg.duration, p, cfg.step);

    std::vector<std::string> artifacts;
    write_sub_ensemble_bundle(out, "fig3", set, sub, p, cfg.percentile, &theory, artifacts);
    const auto med = median_path(sub);
    {
        std::ofstream f = io::open_out(out / "fig3_median.csv");
        f << "t,x,z\n";
        for (std::size_t k = 0; k < med.times.size(); ++k)
            f << io::fmt(med.times[k]) << "," << io::fmt(med.x[k]) << "," << io::fmt(med.z[k])
              << "\n";
    }
    artifacts.push_back("fig3_median.csv");
    write_run_manifest(out, cfg.to_json(), artifacts);
    return 0;
}

int figure_driven_panels(RunConfig cfg, const fs::path& out, const std::string& name,
                         const std::vector<double>& horizons,
                         const std::vector<std::array<double, 2>>& targets) {
    const PhysicalParams p = cfg.params();
    print_warnings(p);
    std::vector<std::string> artifacts;
    for (std::size_t k = 0; k < horizons.size(); ++k) {
        const double T = horizons[k];
        const auto set =
            simulate_ensemble({cfg.xi, 0.0, cfg.zi}, p, T, cfg.n, cfg.seed + k,
                              propagator_from_string(cfg.scheme), cfg.workers);
        const auto sub = postselect(set, {targets[k][0], targets[k][1], cfg.window, T});
        BoundaryConditions bc{cfg.xi, cfg.zi, targets[k][0], targets[k][1], T};
        ShootOptions opt;
        opt.step = cfg.step;
        const ShootResult res = shoot_continuation(bc, p, opt);
        const std::string tag = name + "_t" + std::to_string(k + 1);
        write_sub_ensemble_bundle(out, tag, set, sub, p, cfg.percentile,
                                  &res.principal().path, artifacts);
        std::cout << name << ": horizon " << T << " s, " << sub.size()
                  << " post-selected, residual " << res.principal().residual << "\n";
    }
    write_run_manifest(out, cfg.to_json(), artifacts);
    return 0;
}

int figure_fig4(RunConfig cfg, const fs::path& out) {
    cfg.preset("omega_hz", 1.08e6);
    cfg.preset("tau", 315e-9);
    cfg.preset("gamma", 3.85e6);
    cfg.preset("dt", 16e-9);
    cfg.preset("xi", 0.88);
    cfg.preset("zi", 0.0);
    cfg.preset("xf", -0.29);
    cfg.preset("zf", 0.7);
    cfg.preset("window", 0.08);
    cfg.preset("n", 100000);
    const std::vector<double> horizons = {0.464e-6, 0.944e-6, 1.424e-6};
    const std::vector<std::array<double, 2>> targets(3, {cfg.xf, cfg.zf});
    return figure_driven_panels(cfg, out, "fig4", horizons, targets);
}

int figure_figS2(RunConfig cfg, const fs::path& out) {
    cfg.preset("omega_hz", 1.08e6);
    cfg.preset("tau", 315e-9);
    cfg.preset("gamma", 3.85e6);
    cfg.preset("xi", 0.88);
    cfg.preset("zi", 0.0);
    cfg.preset("xf", -0.683);
    cfg.preset("zf", -0.227);
    cfg.preset("duration", 0.464e-6);
    cfg.horizons.clear();
    return cmd_mlp(cfg, true);
}

int figure_figS3(RunConfig cfg, const fs::path& out) {
    cfg.preset("tau", 1.25e-6);
    const double tau = cfg.tau;
    const std::vector<double> zfs = {0.2, 0.4, 0.6};
    std::vector<double> grid;
    for (double T = 1e-9; T <= 4.0 * tau; T += 1e-9) grid.push_back(T);
    {
        std::ofstream f = io::open_out(out / "figS3_density.csv");
        f << "T_seconds,p_zf_0.2,p_zf_0.4,p_zf_0.6\n";
        std::vector<std::vector<double>> curves;
        for (double zf : zfs) curves.push_back(mlt_density_curve(zf, 0.0, grid, tau));
        for (std::size_t i = 0; i < grid.size(); ++i)
            f << io::fmt(grid[i]) << "," << io::fmt(curves[0][i]) << "," << io::fmt(curves[1][i])
              << "," << io::fmt(curves[2][i]) << "\n";
    }
    json topt;
    for (double zf : zfs)
        topt["T_opt_zf_" + std::to_string(zf).substr(0, 3)] = most_likely_time(zf, 0.0, tau);
    {
        std::ofstream f = io::open_out(out / "figS3_topt.json");
        f << topt.dump(2) << "\n";
    }
    write_run_manifest(out, cfg.to_json(), {"figS3_density.csv", "figS3_topt.json"});
    std::cout << "figS3: density curves on " << grid.size() << " time points -> " << out.string()
              << "\n";
    return 0;
}

int figure_figS4(RunConfig cfg, const fs::path& out) {
    cfg.preset("xi", 0.88);
    cfg.preset("zi", 0.0);
    cfg.preset("window", 0.03);
    cfg.preset("n", 50000);
    const std::vector<double> horizons = {0.464e-6, 0.944e-6, 1.424e-6};
    struct Panel {
        const char* name;
        double omega_hz, tau, gamma;
        std::vector<std::array<double, 2>> targets;
    };
    const std::vector<Panel> panels = {
        {"figS4a", 1.08e6, 1.25e-6, 0.94e6, {{-0.78, -0.5}, {0.7, -0.5}, {-0.73, -0.5}}},
        {"figS4b", 1.08e6, 315e-9, 3.85e6, {{-0.69, -0.5}, {0.5, -0.5}, {-0.73, -0.5}}},
        {"figS4c", 0.58e6, 315e-9, 3.85e6, {{-0.35, -0.5}, {-0.5, -0.5}, {-0.56, -0.5}}},
    };
    for (const auto& panel : panels) {
        RunConfig c = cfg;
        c.preset("omega_hz", panel.omega_hz);
        c.preset("tau", panel.tau);
        c.preset("gamma", panel.gamma);
        const int rc = figure_driven_panels(c, out, panel.name, horizons, panel.targets);
        if (rc != 0) return rc;
    }
    return 0;
}

int cmd_figure(const RunConfig& cfg, const std::string& name) {
    const fs::path out = resolve_out(cfg, name);
    fs::create_directories(out);
    RunConfig c = cfg;
    c.out = out.string();
    if (name == "fig3") return figure_fig3(c, out);
    if (name == "fig4") return figure_fig4(c, out);
    if (name == "figS2") return figure_figS2(c, out);
    if (name == "figS3") return figure_figS3(c, out);
    if (name == "figS4") return figure_figS4(c, out);
    throw config_error("unknown figure preset: " + name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffusive qubit trajectory simulation and optimal-path solver"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_file, figure_name, record_file;
    bool variational = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "JSON config file (flags override)");
        sub->add_option("--seed", cfg.seed, "master RNG seed");
        sub->add_option("--n", cfg.n, "number of trajectories");
        sub->add_option("--omega", cfg.omega_hz, "Rabi frequency Omega/2pi [Hz]");
        sub->add_option("--tau", cfg.tau, "characteristic measurement time [s]");
        sub->add_option("--gamma", cfg.gamma, "ensemble dephasing rate Gamma [1/s]");
        sub->add_option("--dt", cfg.dt, "sampling interval [s]");
        sub->add_option("--duration,--T", cfg.duration, "duration / horizon [s]");
        sub->add_option("--xi", cfg.xi, "initial x");
        sub->add_option("--zi", cfg.zi, "initial z");
        sub->add_option("--xf", cfg.xf, "target x");
        sub->add_option("--zf", cfg.zf, "target z");
        sub->add_option("--window", cfg.window, "post-selection window");
        sub->add_option("--percentile", cfg.percentile, "top-likelihood percentile to average");
        sub->add_option("--workers", cfg.workers, "worker threads (output independent of N)");
        sub->add_option("--out", cfg.out, "output directory (default $QPATH_OUT/<cmd>)");
        sub->add_option("--step", cfg.step, "ODE integration step [s]");
        sub->add_option("--delta-v", cfg.delta_v, "detector peak separation [V]");
        sub->add_option("--scheme", cfg.scheme,
                        "propagator: verbatim | exact-rotation | symmetric-split");
    };

    CLI::App* sim = app.add_subcommand("simulate", "simulate a trajectory ensemble");
    add_common(sim);
    CLI::App* mlp = app.add_subcommand("mlp", "solve the optimal path between boundary states");
    add_common(mlp);
    mlp->add_flag("--variational", variational, "append the delta-grid classification");
    CLI::App* fig = app.add_subcommand("figure", "run a named figure-reproduction pipeline");
    add_common(fig);
    fig->add_option("name", figure_name, "fig3 | fig4 | figS2 | figS3 | figS4")->required();
    CLI::App* rec = app.add_subcommand("reconstruct", "propagate an external readout record");
    add_common(rec);
    rec->add_option("--record", record_file, "readout record CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        // config file first, then re-apply CLI flags on top
        if (!config_file.empty()) {
            RunConfig from_file;
            load_config_file(from_file, config_file);
            for (const auto& key : from_file.given) cfg.given.insert(key);
            RunConfig merged = from_file;
            merged.given = cfg.given;
            // CLI-given options already live in cfg; copy them over the file
            auto keep = [&](const std::string& flag, auto member) {
                if (sub->count(flag) > 0) merged.*member = cfg.*member;
            };
            keep("--seed", &RunConfig::seed);
            keep("--n", &RunConfig::n);
            keep("--omega", &RunConfig::omega_hz);
            keep("--tau", &RunConfig::tau);
            keep("--gamma", &RunConfig::gamma);
            keep("--dt", &RunConfig::dt);
            keep("--duration", &RunConfig::duration);
            keep("--xi", &RunConfig::xi);
            keep("--zi", &RunConfig::zi);
            keep("--xf", &RunConfig::xf);
            keep("--zf", &RunConfig::zf);
            keep("--window", &RunConfig::window);
            keep("--percentile", &RunConfig::percentile);
            keep("--workers", &RunConfig::workers);
            keep("--out", &RunConfig::out);
            keep("--step", &RunConfig::step);
            keep("--delta-v", &RunConfig::delta_v);
            keep("--scheme", &RunConfig::scheme);
            cfg = merged;
        }
        for (const char* flag : {"--seed", "--n", "--omega", "--tau", "--gamma", "--dt",
                                 "--duration", "--xi", "--zi", "--xf", "--zf", "--window",
                                 "--percentile", "--workers", "--out", "--step", "--delta-v",
                                 "--scheme"}) {
            if (sub->count(flag) == 0) continue;
            std::string key(flag + 2);
            if (key == "omega") key = "omega_hz";
            if (key == "delta-v") key = "delta_v";
            cfg.given.insert(key);
        }

        if (sub == sim) return cmd_simulate(cfg);
        if (sub == mlp) return cmd_mlp(cfg, variational);
        if (sub == fig) return cmd_figure(cfg, figure_name);
        if (sub == rec) return cmd_reconstruct(cfg, record_file);
        return 1;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const convergence_error& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 3;
    } catch (const insufficient_statistics& e) {
        std::cerr << "insufficient statistics: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
