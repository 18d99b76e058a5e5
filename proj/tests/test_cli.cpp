#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qpath/io.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("qpath_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
    const int rc = std::system((std::string(QPATH_BIN) + " " + args).c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ostringstream os;
    os << std::ifstream(p).rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("simulate: same seed twice gives identical files, any worker count") {
    TempDir tmp;
    const std::string base = "simulate --n 5 --seed 7 --duration 4.8e-7 --out ";
    REQUIRE(run(base + (tmp.path / "a").string() + " > /dev/null") == 0);
    REQUIRE(run(base + (tmp.path / "b").string() + " > /dev/null") == 0);
    REQUIRE(run(base + (tmp.path / "c").string() + " --workers 4 > /dev/null") == 0);
    const auto ha = qpath::io::file_hash(tmp.path / "a" / "readouts.bin");
    CHECK(ha == qpath::io::file_hash(tmp.path / "b" / "readouts.bin"));
    CHECK(ha == qpath::io::file_hash(tmp.path / "c" / "readouts.bin"));
}

TEST_CASE("simulate: manifest carries the config and artifact hash") {
    TempDir tmp;
    REQUIRE(run("simulate --n 2 --seed 3 --duration 1.6e-7 --out " +
                (tmp.path / "s").string() + " > /dev/null") == 0);
    nlohmann::json m;
    std::ifstream(tmp.path / "s" / "manifest.json") >> m;
    CHECK(m.at("config").at("seed").get<std::uint64_t>() == 3);
    CHECK(m.at("config").at("n").get<std::size_t>() == 2);
    CHECK(m.at("artifacts").at("readouts.bin").get<std::string>() ==
          qpath::io::file_hash(tmp.path / "s" / "readouts.bin"));
}

TEST_CASE("config file values are overridden by flags") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "cfg.json");
        f << R"({"n": 9, "seed": 21, "duration_s": 1.6e-7})";
    }
    REQUIRE(run("simulate --config " + (tmp.path / "cfg.json").string() + " --n 3 --out " +
                (tmp.path / "s").string() + " > /dev/null") == 0);
    nlohmann::json m;
    std::ifstream(tmp.path / "s" / "manifest.json") >> m;
    CHECK(m.at("config").at("n").get<std::size_t>() == 3);      // flag wins
    CHECK(m.at("config").at("seed").get<std::uint64_t>() == 21);  // file value kept
}

TEST_CASE("mlp: undriven run emits the analytic comparison report") {
    TempDir tmp;
    REQUIRE(run("mlp --omega 0 --tau 1.25e-6 --gamma 0.94e6 --zf -0.85 --T 1.424e-6 --out " +
                (tmp.path / "m").string() + " > /dev/null") == 0);
    nlohmann::json r;
    std::ifstream(tmp.path / "m" / "report.json") >> r;
    CHECK(r.at("analytic_comparison").at("max_abs_dx").get<double>() < 1e-5);
    CHECK(r.at("analytic_comparison").at("max_abs_dz").get<double>() < 1e-5);
    CHECK(r.at("shoot").at("principal_residual").get<double>() < 1e-6);
    CHECK(fs::exists(tmp.path / "m" / "path.csv"));
    CHECK(fs::exists(tmp.path / "m" / "analytic.csv"));
}

TEST_CASE("mlp: out-of-disk boundary state is a config error (exit 2)") {
    TempDir tmp;
    CHECK(run("mlp --xf 0.99 --zf 0.99 --T 4.64e-7 --out " + (tmp.path / "m").string() +
              " 2> /dev/null") == 2);
}

TEST_CASE("reconstruct: roundtrips a simulated record") {
    TempDir tmp;
    REQUIRE(run("simulate --n 1 --seed 5 --duration 4.8e-7 --out " +
                (tmp.path / "s").string() + " > /dev/null") == 0);
    const auto set = qpath::load_trajectory_set(tmp.path / "s");
    qpath::save_readout_csv({set.params.dt, {set.readouts.begin(), set.readouts.end()}},
                            tmp.path / "rec.csv");
    REQUIRE(run("reconstruct --record " + (tmp.path / "rec.csv").string() +
                " --xi 1 --zi 0 --out " + (tmp.path / "r").string() + " > /dev/null") == 0);
    const std::string csv = slurp(tmp.path / "r" / "trajectory.csv");
    CHECK(csv.rfind("t,x,z\n", 0) == 0);

    // the reconstructed states must match direct propagation
    const auto states = set.trajectory(0).states();
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::size_t k = 0;
    while (std::getline(in, line)) {
        const auto c1 = line.find(','), c2 = line.rfind(',');
        CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) ==
              doctest::Approx(states[k].x).epsilon(1e-12));
        ++k;
    }
    CHECK(k == states.size());
}

TEST_CASE("reconstruct: malformed record exits 2 and names the line") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "bad.csv");
        f << "t_seconds,r\n0,0.1\n1.6e-08,oops\n";
    }
    CHECK(run("reconstruct --record " + (tmp.path / "bad.csv").string() + " --out " +
              (tmp.path / "r").string() + " 2> " + (tmp.path / "err.txt").string()) == 2);
    CHECK(slurp(tmp.path / "err.txt").find(":3:") != std::string::npos);
}

TEST_CASE("figure: figS3 bundle exists, unknown preset exits 2") {
    TempDir tmp;
    REQUIRE(run("figure figS3 --out " + (tmp.path / "f").string() + " > /dev/null") == 0);
    CHECK(fs::exists(tmp.path / "f" / "figS3_density.csv"));
    CHECK(fs::exists(tmp.path / "f" / "figS3_topt.json"));
    CHECK(fs::exists(tmp.path / "f" / "manifest.json"));
    CHECK(run("figure nosuch --out " + (tmp.path / "g").string() + " 2> /dev/null") == 2);
}

TEST_CASE("QPATH_OUT provides the default output root") {
    TempDir tmp;
    const std::string cmd = "QPATH_OUT=" + tmp.path.string() + " " + QPATH_BIN +
                            " simulate --n 1 --seed 1 --duration 1.6e-7 > /dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(tmp.path / "simulate" / "readouts.bin"));
}
