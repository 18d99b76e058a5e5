#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qpath/io.hpp"

using namespace qpath;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qpath_io_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

PhysicalParams some_params() {
    PhysicalParams p;
    p.omega = 6.785840131753953e6;
    p.tau = 315e-9;
    p.gamma_ens = 3.85e6;
    p.dt = 16e-9;
    p.delta_v = 2.4;
    return p;
}

}  // namespace

TEST_CASE("params JSON roundtrip preserves every field exactly") {
    const PhysicalParams p = some_params();
    const PhysicalParams q = params_from_json(params_to_json(p));
    CHECK(q.omega == p.omega);
    CHECK(q.tau == p.tau);
    CHECK(q.gamma_ens == p.gamma_ens);
    CHECK(q.dt == p.dt);
    CHECK(q.delta_v == p.delta_v);
}

TEST_CASE("trajectory set: save/load roundtrip is bit-exact") {
    TempDir tmp;
    const PhysicalParams p = some_params();
    const auto set = simulate_ensemble({0.88, 0.0, 0.0}, p, 89 * p.dt, 50, 7);
    save_trajectory_set(set, tmp.path / "set");
    const auto loaded = load_trajectory_set(tmp.path / "set");
    CHECK(loaded.readouts == set.readouts);
    CHECK(loaded.master_seed == set.master_seed);
    CHECK(loaded.n_steps == set.n_steps);
    CHECK(loaded.scheme == set.scheme);
    CHECK(loaded.initial.x == set.initial.x);
    CHECK(loaded.params.tau == p.tau);
}

TEST_CASE("trajectory set: manifest pins the binary with a content hash") {
    TempDir tmp;
    const PhysicalParams p = some_params();
    const auto set = simulate_ensemble({0.88, 0.0, 0.0}, p, 10 * p.dt, 5, 7);
    save_trajectory_set(set, tmp.path / "set");
    nlohmann::json m;
    io::open_in(tmp.path / "set" / "manifest.json") >> m;
    CHECK(m.at("format_version").get<int>() == kFormatVersion);
    CHECK(m.at("artifacts").at("readouts.bin").get<std::string>() ==
          io::file_hash(tmp.path / "set" / "readouts.bin"));
    // tamper: hash must change
    {
        std::ofstream f(tmp.path / "set" / "readouts.bin", std::ios::app | std::ios::binary);
        f << "x";
    }
    CHECK(m.at("artifacts").at("readouts.bin").get<std::string>() !=
          io::file_hash(tmp.path / "set" / "readouts.bin"));
}

TEST_CASE("trajectory set: truncated binary rejected") {
    TempDir tmp;
    const PhysicalParams p = some_params();
    const auto set = simulate_ensemble({0.88, 0.0, 0.0}, p, 10 * p.dt, 5, 7);
    save_trajectory_set(set, tmp.path / "set");
    fs::resize_file(tmp.path / "set" / "readouts.bin", 16);
    CHECK_THROWS_AS(load_trajectory_set(tmp.path / "set"), io_error);
}

TEST_CASE("readout CSV: r-unit roundtrip") {
    TempDir tmp;
    const ReadoutRecord rec{16e-9, {0.25, -1.5, 3.0, 0.0, 1e-17}};
    save_readout_csv(rec, tmp.path / "rec.csv");
    const auto loaded = load_readout_csv(tmp.path / "rec.csv", 1.0);
    CHECK(loaded.dt == doctest::Approx(rec.dt).epsilon(1e-12));
    REQUIRE(loaded.values.size() == rec.values.size());
    for (std::size_t k = 0; k < rec.values.size(); ++k)
        CHECK(loaded.values[k] == rec.values[k]);
}

TEST_CASE("readout CSV: volts header converts via the separation") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "v.csv");
        f << "t_seconds,v_volts\n0,1.2\n1.6e-08,-0.6\n3.2e-08,0\n";
    }
    const auto rec = load_readout_csv(tmp.path / "v.csv", 2.4);
    REQUIRE(rec.values.size() == 3);
    CHECK(rec.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec.values[1] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(rec.values[2] == 0.0);
}

TEST_CASE("readout CSV: malformed input names the offending line") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "bad.csv");
        f << "t_seconds,r\n0,0.5\n1.6e-08,oops\n";
    }
    try {
        load_readout_csv(tmp.path / "bad.csv", 1.0);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }

    {
        std::ofstream f(tmp.path / "bad2.csv");
        f << "wrong,header\n0,0.5\n";
    }
    CHECK_THROWS_AS(load_readout_csv(tmp.path / "bad2.csv", 1.0), io_error);

    {
        std::ofstream f(tmp.path / "bad3.csv");
        f << "t_seconds,r\n0,0.5\n1.6e-08,0.1\n4.8e-08,0.2\n";
    }
    CHECK_THROWS_AS(load_readout_csv(tmp.path / "bad3.csv", 1.0), io_error);
}

TEST_CASE("optimal path CSV roundtrip") {
    TempDir tmp;
    PhysicalParams p = some_params();
    p.omega = 0.0;
    p.gamma_ens = 0.94e6;
    p.tau = 1.25e-6;
    const auto path = analytic_undriven(-0.85, 1.424e-6, p, 1.6e-8);
    save_optimal_path_csv(path, p, tmp.path / "path.csv");
    const auto loaded = load_optimal_path_csv(tmp.path / "path.csv");
    REQUIRE(loaded.size() == path.size());
    CHECK(loaded.step == doctest::Approx(path.step).epsilon(1e-9));
    for (std::size_t k = 0; k < path.size(); k += 17) {
        CHECK(loaded.points[k].x == path.points[k].x);
        CHECK(loaded.points[k].z == path.points[k].z);
        CHECK(loaded.points[k].px == path.points[k].px);
        CHECK(loaded.points[k].pz == path.points[k].pz);
    }
}

TEST_CASE("series CSV layout") {
    TempDir tmp;
    const SeriesWithError s{{0.0, 1e-8}, {0.5, -0.25}, {0.01, 0.02}, 42};
    save_series_csv(s, tmp.path / "s.csv");
    std::ifstream f(tmp.path / "s.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line == "t,value,stderr,n");
    std::getline(f, line);
    CHECK(line == "0,0.5,0.01,42");
}

TEST_CASE("histogram CSV: edge headers plus one row per time column") {
    TempDir tmp;
    Histogram2D h;
    h.time_edges = {0.0, 1.0, 2.0};
    h.value_edges = {-1.0, 0.0, 1.0};
    h.counts = {{3.0, 1.0}, {2.0, 2.0}};
    save_histogram_csv(h, tmp.path / "h.csv");
    std::ifstream f(tmp.path / "h.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line.rfind("# time_edges,", 0) == 0);
    std::getline(f, line);
    CHECK(line.rfind("# value_edges,", 0) == 0);
    std::getline(f, line);
    CHECK(line == "3,1");
    std::getline(f, line);
    CHECK(line == "2,2");
}

TEST_CASE("run manifest records config and artifact hashes") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "a.csv");
        f << "hello\n";
    }
    write_run_manifest(tmp.path, {{"seed", 7}}, {"a.csv"});
    nlohmann::json m;
    io::open_in(tmp.path / "manifest.json") >> m;
    CHECK(m.at("config").at("seed").get<int>() == 7);
    CHECK(m.at("artifacts").at("a.csv").get<std::string>() == io::file_hash(tmp.path / "a.csv"));
}

TEST_CASE("file_hash is content-stable and order-sensitive") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "one");
        f << "ab";
    }
    {
        std::ofstream f(tmp.path / "two");
        f << "ab";
    }
    {
        std::ofstream f(tmp.path / "three");
        f << "ba";
    }
    CHECK(io::file_hash(tmp.path / "one") == io::file_hash(tmp.path / "two"));
    CHECK(io::file_hash(tmp.path / "one") != io::file_hash(tmp.path / "three"));
}
