#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pakf/csv.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "pakf_test_cli";

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result run(const std::string& args) {
    fs::create_directories(kWork);
    const fs::path out = kWork / "stdout.txt";
    const fs::path err = kWork / "stderr.txt";
    const std::string cmd = std::string(PAKF_CLI_PATH) + " " + args + " >" + out.string() + " 2>" +
                            err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string dir(const std::string& name) { return (kWork / name).string(); }

}  // namespace

TEST_CASE("simulate writes a deterministic trajectory") {
    const auto a = run("simulate --model sdofs --steps 400 --seed 7 --out " + dir("sim_a"));
    REQUIRE(a.code == 0);
    const auto b = run("simulate --model sdofs --steps 400 --seed 7 --out " + dir("sim_b"));
    REQUIRE(b.code == 0);
    const auto table = pakf::csv::read(kWork / "sim_a" / "trajectory.csv");
    CHECK(table.rows.size() == 400);
    CHECK(table.header == std::vector<std::string>{"t", "x1", "x2", "u1", "y1"});
    CHECK(slurp(kWork / "sim_a" / "trajectory.csv") == slurp(kWork / "sim_b" / "trajectory.csv"));

    const auto c = run("simulate --steps 400 --seed 8 --out " + dir("sim_c"));
    REQUIRE(c.code == 0);
    CHECK(slurp(kWork / "sim_a" / "trajectory.csv") != slurp(kWork / "sim_c" / "trajectory.csv"));
}

TEST_CASE("simulate validation") {
    const auto r = run("simulate --steps 1 --out " + dir("bad"));
    CHECK(r.code == 2);
    CHECK(r.err.find("steps") != std::string::npos);
    CHECK(run("simulate --bogus 3").code == 2);
    CHECK(run("simulate --steps abc").code == 2);
    CHECK(run("simulate --model nonexistent.json --out " + dir("bad")).code == 2);
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("help documents every flag") {
    const auto sim = run("simulate --help");
    CHECK(sim.code == 0);
    for (const char* flag : {"--steps", "--seed", "--model", "--out", "--config", "--input-std"}) {
        CHECK(sim.out.find(flag) != std::string::npos);
    }
    const auto bench = run("bench --help");
    CHECK(bench.code == 0);
    for (const char* flag : {"--runs", "--steps", "--particles", "--filters", "--threads"}) {
        CHECK(bench.out.find(flag) != std::string::npos);
    }
    const auto filt = run("filter --help");
    CHECK(filt.code == 0);
    for (const char* flag : {"--trajectory", "--filter", "--particles"}) {
        CHECK(filt.out.find(flag) != std::string::npos);
    }
}

TEST_CASE("filter over a simulated trajectory") {
    REQUIRE(run("simulate --steps 200 --seed 3 --out " + dir("traj")).code == 0);
    const std::string traj = (kWork / "traj" / "trajectory.csv").string();

    const auto pakf = run("filter --trajectory " + traj + " --filter pakf --out " + dir("f_pakf"));
    REQUIRE(pakf.code == 0);
    const auto ekf = run("filter --trajectory " + traj + " --filter ekf --out " + dir("f_ekf"));
    REQUIRE(ekf.code == 0);
    const auto pf = run("filter --trajectory " + traj + " --filter pf --particles 500 --out " +
                        dir("f_pf"));
    REQUIRE(pf.code == 0);

    const auto rmse_of = [](const std::string& out) {
        const auto pos = out.find("RMSE ");
        REQUIRE(pos != std::string::npos);
        return std::stod(out.substr(pos + 5));
    };
    const double a = rmse_of(pakf.out);
    const double b = rmse_of(ekf.out);
    CHECK(std::isfinite(a));
    CHECK(std::isfinite(b));
    CHECK(a != b);
    CHECK(std::isfinite(rmse_of(pf.out)));

    const auto est = pakf::csv::read(kWork / "f_pakf" / "estimates.csv");
    CHECK(est.rows.size() == 200);
    CHECK(est.header.size() == 1 + 2 + 4);

    CHECK(run("filter --trajectory " + dir("nope.csv") + " --out " + dir("f_x")).code == 2);
    CHECK(run("filter --out " + dir("f_x")).code == 2);
    CHECK(run("filter --trajectory " + traj + " --filter kalman --out " + dir("f_x")).code == 2);
}

TEST_CASE("bench subcommand") {
    const auto one = run("bench --runs 1 --steps 50 --particles 100 --out " + dir("b1"));
    REQUIRE(one.code == 0);
    const auto summary = pakf::csv::read(kWork / "b1" / "summary.csv");
    REQUIRE(summary.rows.size() == 3);
    for (const auto& row : summary.rows) CHECK(pakf::csv::parse_double(row[2]) == 0.0);
    for (const char* f : {"runs.csv", "armse_trace.csv", "rmse_cdf.csv", "summary.csv"}) {
        CHECK(fs::exists(kWork / "b1" / f));
    }

    const auto two = run("bench --runs 3 --steps 50 --filters pakf,ekf --out " + dir("b2"));
    REQUIRE(two.code == 0);
    CHECK(two.out.find("pf ") == std::string::npos);
    const auto rows = pakf::csv::read(kWork / "b2" / "runs.csv");
    CHECK(rows.rows.size() == 6);

    CHECK(run("bench --runs 0 --out " + dir("b3")).code == 2);
    CHECK(run("bench --filters pakf,magic --out " + dir("b3")).code == 2);
}

TEST_CASE("config file with explicit overrides") {
    fs::create_directories(kWork);
    const fs::path cfg = kWork / "cfg.json";
    std::ofstream(cfg) << R"({"steps": 40, "runs": 2, "seed": 5, "filters": ["ekf"], "particles": 50})";
    const auto r = run("bench --config " + cfg.string() + " --runs 3 --out " + dir("cfg"));
    REQUIRE(r.code == 0);
    const auto rows = pakf::csv::read(kWork / "cfg" / "runs.csv");
    CHECK(rows.rows.size() == 3);
    CHECK(rows.rows[0][1] == "ekf");
    CHECK(pakf::csv::read(kWork / "cfg" / "armse_trace.csv").rows.size() == 40);

    std::ofstream(kWork / "bad.json") << "{\"steps\": \"many\"}";
    CHECK(run("bench --config " + (kWork / "bad.json").string() + " --out " + dir("cfg")).code == 2);
    CHECK(run("bench --config " + dir("absent.json")).code == 2);
}

TEST_CASE("model file round trip through the CLI") {
    // A model JSON equal to the builtin gives byte-identical simulations.
    fs::create_directories(kWork);
    const fs::path model = kWork / "model.json";
    std::ofstream(model) << R"({
  "n_x": 2, "n_y": 1, "n_u": 1,
  "Phi": [1.0, 0.01], "phi": [0.99], "F": [],
  "B": [[0.0], [0.01]], "C": [[1.0, 0.0]],
  "Q": [[0.01, 0.0], [0.0, 0.01]], "R": [[1.0]],
  "breakpoints": ["-inf", -1.0, 1.0, "inf"],
  "slopes": [-0.5, -0.05, -0.5],
  "intercepts": [-0.45, 0.0, 0.45]
})";
    const auto a = run("simulate --steps 50 --seed 2 --model " + model.string() + " --out " + dir("m1"));
    REQUIRE(a.code == 0);
    const auto b = run("simulate --steps 50 --seed 2 --model sdofs --out " + dir("m2"));
    REQUIRE(b.code == 0);
    // Builtin coefficients are computed in floating point, so compare values.
    const auto ta = pakf::csv::read(kWork / "m1" / "trajectory.csv");
    const auto tb = pakf::csv::read(kWork / "m2" / "trajectory.csv");
    REQUIRE(ta.rows.size() == tb.rows.size());
    for (std::size_t t = 0; t < ta.rows.size(); ++t) {
        CHECK(std::abs(pakf::csv::parse_double(ta.rows[t][1]) -
                       pakf::csv::parse_double(tb.rows[t][1])) < 1e-9);
    }
}
