#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpath/analysis.hpp"
#include "qpath/detector.hpp"
#include "qpath/errors.hpp"
#include "qpath/mlp.hpp"
#include "qpath/simulator.hpp"

namespace qpath {

inline constexpr int kFormatVersion = 1;

namespace io {

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw io_error("cannot open for writing: " + p.string());
    return f;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw io_error("cannot open for reading: " + p.string());
    return f;
}

/// FNV-1a 64-bit over file bytes; used in manifests to pin artifacts.
inline std::string file_hash(const std::filesystem::path& p) {
    std::ifstream f = open_in(p);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (f) {
        f.read(buf, sizeof(buf));
        const std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace io

inline nlohmann::json params_to_json(const PhysicalParams& p) {
    return {{"omega_rad_per_s", p.omega}, {"tau_s", p.tau},     {"gamma_per_s", p.gamma_ens},
            {"dt_s", p.dt},               {"delta_v", p.delta_v}};
}

inline PhysicalParams params_from_json(const nlohmann::json& j) {
    PhysicalParams p;
    p.omega = j.at("omega_rad_per_s").get<double>();
    p.tau = j.at("tau_s").get<double>();
    p.gamma_ens = j.at("gamma_per_s").get<double>();
    p.dt = j.at("dt_s").get<double>();
    p.delta_v = j.value("delta_v", 1.0);
    return p;
}

/// TrajectorySet persistence: manifest.json plus a little-endian float64
/// readout matrix (row = trajectory) in readouts.bin. See docs/formats.md.
inline void save_trajectory_set(const TrajectorySet& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream bin = io::open_out(dir / "readouts.bin");
        bin.write(reinterpret_cast<const char*>(set.readouts.data()),
                  static_cast<std::streamsize>(set.readouts.size() * sizeof(double)));
        if (!bin) throw io_error("failed writing " + (dir / "readouts.bin").string());
    }
    nlohmann::json m;
    m["format_version"] = kFormatVersion;
    m["kind"] = "trajectory_set";
    m["params"] = params_to_json(set.params);
    m["initial"] = {{"x", set.initial.x}, {"z", set.initial.z}};
    m["scheme"] = to_string(set.scheme);
    m["master_seed"] = set.master_seed;
    m["n_traj"] = set.size();
    m["n_steps"] = set.n_steps;
    m["duration_s"] = set.duration();
    m["artifacts"] = {{"readouts.bin", io::file_hash(dir / "readouts.bin")}};
    std::ofstream f = io::open_out(dir / "manifest.json");
    f << m.dump(2) << "\n";
}

inline TrajectorySet load_trajectory_set(const std::filesystem::path& dir) {
    nlohmann::json m;
    io::open_in(dir / "manifest.json") >> m;
    if (m.value("format_version", 0) != kFormatVersion)
        throw io_error("unsupported trajectory-set format version");
    TrajectorySet set;
    set.params = params_from_json(m.at("params"));
    set.initial = {m.at("initial").at("x").get<double>(), 0.0,
                   m.at("initial").at("z").get<double>()};
    set.scheme = propagator_from_string(m.at("scheme").get<std::string>());
    set.master_seed = m.at("master_seed").get<std::uint64_t>();
    set.n_steps = m.at("n_steps").get<std::size_t>();
    const auto n_traj = m.at("n_traj").get<std::size_t>();
    set.readouts.resize(n_traj * set.n_steps);
    std::ifstream bin = io::open_in(dir / "readouts.bin");
    bin.read(reinterpret_cast<char*>(set.readouts.data()),
             static_cast<std::streamsize>(set.readouts.size() * sizeof(double)));
    if (static_cast<std::size_t>(bin.gcount()) != set.readouts.size() * sizeof(double))
        throw io_error("readouts.bin truncated in " + dir.string());
    return set;
}

/// Readout record CSV: header `t_seconds,r` or `t_seconds,v_volts`
/// (auto-detected); dt inferred from the time column and validated uniform
/// to 1 ppm. Voltage columns are converted to r = 2V/dV on ingestion.
inline ReadoutRecord load_readout_csv(const std::filesystem::path& path, double delta_v) {
    std::ifstream f = io::open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw io_error(path.string() + ": empty file");
    bool volts;
    if (line == "t_seconds,r")
        volts = false;
    else if (line == "t_seconds,v_volts")
        volts = true;
    else
        throw io_error(path.string() + ":1: expected header 't_seconds,r' or 't_seconds,v_volts'");

    std::vector<double> times, values;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw io_error(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
        try {
            std::size_t used = 0;
            const double t = std::stod(line.substr(0, comma), &used);
            const double v = std::stod(line.substr(comma + 1));
            times.push_back(t);
            values.push_back(volts ? 2.0 * v / delta_v : v);
        } catch (const std::exception&) {
            throw io_error(path.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    if (times.size() < 2) throw io_error(path.string() + ": need at least 2 samples");
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw io_error(path.string() + ":3: non-increasing time column");
    for (std::size_t i = 1; i + 1 < times.size(); ++i) {
        const double step = times[i + 1] - times[i];
        if (std::fabs(step - dt) > 1e-6 * dt)
            throw io_error(path.string() + ":" + std::to_string(i + 3) +
                           ": non-uniform sampling interval");
    }
    return {dt, std::move(values)};
}

inline void save_readout_csv(const ReadoutRecord& rec, const std::filesystem::path& path) {
    std::ofstream f = io::open_out(path);
    f << "t_seconds,r\n";
    for (std::size_t k = 0; k < rec.values.size(); ++k)
        f << io::fmt(static_cast<double>(k) * rec.dt) << "," << io::fmt(rec.values[k]) << "\n";
}

/// Optimal path CSV: t,x,z,p_x,p_z,r,energy.
inline void save_optimal_path_csv(const OptimalPath& path, const PhysicalParams& params,
                                  const std::filesystem::path& file) {
    std::ofstream f = io::open_out(file);
    f << "t,x,z,p_x,p_z,r,energy\n";
    for (std::size_t k = 0; k < path.points.size(); ++k) {
        const auto& p = path.points[k];
        f << io::fmt(path.times[k]) << "," << io::fmt(p.x) << "," << io::fmt(p.z) << ","
          << io::fmt(p.px) << "," << io::fmt(p.pz) << "," << io::fmt(p.readout()) << ","
          << io::fmt(stochastic_energy(p, params)) << "\n";
    }
}

inline OptimalPath load_optimal_path_csv(const std::filesystem::path& file) {
    std::ifstream f = io::open_in(file);
    std::string line;
    if (!std::getline(f, line) || line != "t,x,z,p_x,p_z,r,energy")
        throw io_error(file.string() + ": bad optimal-path header");
    OptimalPath path;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != 7) throw io_error(file.string() + ": bad optimal-path row");
        path.times.push_back(vals[0]);
        path.points.push_back({vals[1], vals[2], vals[3], vals[4]});
    }
    if (path.times.size() >= 2) path.step = path.times[1] - path.times[0];
    return path;
}

/// Series CSV: t,value,stderr,n.
inline void save_series_csv(const SeriesWithError& s, const std::filesystem::path& file) {
    std::ofstream f = io::open_out(file);
    f << "t,value,stderr,n\n";
    for (std::size_t k = 0; k < s.values.size(); ++k)
        f << io::fmt(s.times[k]) << "," << io::fmt(s.values[k]) << "," << io::fmt(s.stderrs[k])
          << "," << s.n << "\n";
}

inline void save_empirical_mlp_csv(const EmpiricalMlp& mlp, const std::filesystem::path& x_file,
                                   const std::filesystem::path& z_file) {
    SeriesWithError sx{mlp.times, mlp.x, mlp.x_err, mlp.n_averaged};
    SeriesWithError sz{mlp.times, mlp.z, mlp.z_err, mlp.n_averaged};
    save_series_csv(sx, x_file);
    save_series_csv(sz, z_file);
}

/// Histogram CSV: two edge header rows (time edges, value edges), then the
/// count matrix with one row per time column.
inline void save_histogram_csv(const Histogram2D& h, const std::filesystem::path& file) {
    std::ofstream f = io::open_out(file);
    f << "# time_edges";
    for (double e : h.time_edges) f << "," << io::fmt(e);
    f << "\n# value_edges";
    for (double e : h.value_edges) f << "," << io::fmt(e);
    f << "\n";
    for (const auto& col : h.counts) {
        for (std::size_t b = 0; b < col.size(); ++b) f << (b ? "," : "") << io::fmt(col[b]);
        f << "\n";
    }
}

inline nlohmann::json shoot_report_json(const ShootResult& result) {
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& r : result.roots) {
        roots.push_back({{"px0", r.px0},
                         {"pz0", r.pz0},
                         {"residual", r.residual},
                         {"iterations", r.iterations},
                         {"log_likelihood", r.action}});
    }
    return {{"n_roots", result.roots.size()},
            {"principal_residual", result.principal().residual},
            {"roots", roots}};
}

inline nlohmann::json variational_json(const VariationalResult& v) {
    nlohmann::json profile = nlohmann::json::array();
    for (const auto& p : v.profile)
        profile.push_back({{"delta1", p.delta1},
                           {"delta2", p.delta2},
                           {"converged", p.converged},
                           {"log_likelihood", p.action}});
    return {{"classification", to_string(v.classification)},
            {"base_log_likelihood", v.base_action},
            {"profile", profile}};
}

/// Run manifest: config + seed + format version + artifact hashes. Enough
/// to bit-reproduce the run.
inline void write_run_manifest(const std::filesystem::path& dir, const nlohmann::json& config,
                               const std::vector<std::string>& artifact_files) {
    nlohmann::json m;
    m["format_version"] = kFormatVersion;
    m["kind"] = "run_manifest";
    m["config"] = config;
    nlohmann::json hashes;
    for (const auto& name : artifact_files) hashes[name] = io::file_hash(dir / name);
    m["artifacts"] = hashes;
    std::ofstream f = io::open_out(dir / "manifest.json");
    f << m.dump(2) << "\n";
}

}  // namespace qpath
