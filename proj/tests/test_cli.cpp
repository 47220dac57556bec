#include "catch_amalgamated.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "hybrid_cli_test";

int run(const std::string& args) {
    const std::string cmd = std::string(HYBRID_CLI_PATH) + " -q " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& name) { return (work / name).string(); }

std::string first_line(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
}

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    fs::create_directories(work);
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("respond") == 1);  // --out is required
    CHECK(run("sweep --direction sideways --out " + p("x.csv")) == 1);
    CHECK(run("respond --d -1 --out " + p("x.csv")) == 1);
    CHECK(run("--help") == 0);
}

TEST_CASE("numerical failures exit with 2") {
    CHECK(run("sweep --steps 3 --steps-per-period 10 --out " + p("coarse.csv")) == 2);
    CHECK(run("respond --f 0 --out " + p("unforced.csv")) == 2);
}

TEST_CASE("data errors exit with 3") {
    {
        std::ofstream bad(p("bad.csv"));
        bad << "record_id,f11\nr0,zebra\n";
    }
    CHECK(run("rank --data " + p("bad.csv") + " --out " + p("rank.csv")) == 3);
    CHECK(run("predict --model " + p("missing.json") + " --data " + p("bad.csv") + " --out " + p("pred.csv")) == 3);
}

TEST_CASE("respond writes branch and folds") {
    REQUIRE(run("respond --f 1.1 --out " + p("branch.csv") + " --folds " + p("folds.csv")) == 0);
    CHECK(first_line(p("branch.csv")) == "sigma1,omega,a1,gamma1,a2,gamma2,u1,u2,stable");
    CHECK(line_count(p("folds.csv")) == 5);
}

TEST_CASE("sweep writes one row per grid point") {
    REQUIRE(run("sweep --omega-min 0.8 --omega-max 1.0 --steps 5 --settle-periods 10 --measure-periods 5 --out " +
                p("sweep.csv")) == 0);
    CHECK(first_line(p("sweep.csv")) == "omega,amp_x,amp_y,direction");
    CHECK(line_count(p("sweep.csv")) == 6);
}

TEST_CASE("dataset, rank, search, train and predict chain") {
    const std::string scenario = p("tiny.json");
    {
        std::ofstream out(scenario);
        out << R"({"name": "tiny", "target": "delta",
                   "fixed": {"d": 1.0, "beta": 40.0, "f": 1.0},
                   "sampled": {"delta": {"low": 1.0, "high": 2.0}},
                   "counts": {"train": 60, "test": 10, "cross": 0},
                   "monostable_policy": "steepest_flank", "seed": 3})";
    }
    REQUIRE(run("dataset --scenario " + scenario + " --out " + p("ds")) == 0);
    const std::string train = p("ds/train.csv"), test = p("ds/test.csv");
    REQUIRE(fs::exists(train));
    CHECK(line_count(train) == 61);
    REQUIRE(run("rank --data " + train + " --target delta --out " + p("rank.csv")) == 0);
    CHECK(first_line(p("rank.csv")).rfind("# bins=", 0) == 0);
    REQUIRE(run("search --data " + train + " --rank " + p("rank.csv") + " --hidden 5 --out " + p("search.csv")) == 0);
    CHECK(line_count(p("search.csv")) >= 21);
    REQUIRE(run("train --data " + train + " --features f12,f13,f22,f23 --hidden 5 --seed 2 --out " + p("model.json")) ==
            0);
    REQUIRE(run("predict --model " + p("model.json") + " --data " + test + " --out " + p("pred.csv")) == 0);
    CHECK(line_count(p("pred.csv")) == 11);
    CHECK(run("train --data " + train + " --features f12,zz --out " + p("m2.json")) == 1);
}
