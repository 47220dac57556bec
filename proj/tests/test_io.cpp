#include "catch_amalgamated.hpp"

#include "hybrid/dataset.hpp"
#include "hybrid/error.hpp"
#include "hybrid/io.hpp"

#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

using namespace hybrid;
namespace fs = std::filesystem;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("hybrid_io_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("doubles survive text") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        REQUIRE(same_bits(io::parse_double(io::format_double(v)), v));
    }
    CHECK(std::isnan(io::parse_double(io::format_double(std::nan("")))));
    CHECK(io::parse_double(io::format_double(std::numeric_limits<double>::infinity())) > 1e308);
    CHECK_THROWS_AS(io::parse_double("1.0abc"), Error);
    CHECK_THROWS_AS(io::parse_double(""), Error);
}

TEST_CASE("csv split") {
    CHECK(io::split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
}

TEST_CASE("parameters in json") {
    SystemParams p;
    p.d = 1.7;
    p.delta = 1.3;
    const auto q = io::params_from_json(io::to_json(p));
    CHECK(q.d == 1.7);
    CHECK(q.delta == 1.3);
    CHECK(q.beta == p.beta);
    CHECK_THROWS_AS(io::params_from_json(nlohmann::json{{"d", -1.0}}), Error);
    CHECK_THROWS_AS(io::params_from_json(nlohmann::json{{"d", "soft"}}), Error);
}

TEST_CASE("feature csv round trip") {
    Dataset data;
    for (int i = 0; i < 3; ++i) {
        Record r;
        r.id = "r" + std::to_string(i);
        r.params.delta = 1.0 + 0.1 * i;
        r.params.f = 0.95;
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            r.features.values[k] = 0.1 * static_cast<double>(k) + i / 3.0;
            r.features.valid[k] = k != 5 || i != 1;
        }
        data.push_back(r);
    }
    std::stringstream ss;
    write_feature_csv(ss, data);
    const auto header = ss.str().substr(0, ss.str().find('\n'));
    CHECK(header.rfind("record_id,f11,", 0) == 0);
    CHECK(header.find("alpha22,d,beta,delta,f") != std::string::npos);
    const auto back = read_feature_csv(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].id == data[i].id);
        CHECK(back[i].params.delta == data[i].params.delta);
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            CHECK(back[i].features.valid[k] == data[i].features.valid[k]);
            if (data[i].features.valid[k]) CHECK(same_bits(back[i].features.values[k], data[i].features.values[k]));
        }
    }
    CHECK(valid_rows(back).size() == 2);
}

TEST_CASE("malformed feature csv") {
    std::stringstream missing("record_id,f11\nr0,1.0\n");
    CHECK_THROWS_AS(read_feature_csv(missing), Error);
    std::stringstream empty;
    CHECK_THROWS_AS(read_feature_csv(empty), Error);
    CHECK_THROWS_AS(read_feature_csv(std::string("/nonexistent/file.csv")), Error);
}

TEST_CASE("time series with sidecar") {
    SystemParams p;
    const auto ts = integrate(p, 1.1, {0.1, 0.0, 0.0, 0.0}, 20.0, 0.05, 0.3);
    const auto dir = scratch("ts");
    const auto path = (dir / "series.csv").string();
    io::write_time_series(path, ts);
    CHECK(fs::exists(path + ".json"));
    const auto back = io::read_time_series(path);
    CHECK(back.Omega == ts.Omega);
    CHECK(back.dt == ts.dt);
    CHECK(back.final_phase == ts.final_phase);
    CHECK(back.params.beta == p.beta);
    REQUIRE(back.samples.size() == ts.samples.size());
    for (std::size_t i = 0; i < ts.samples.size(); ++i)
        for (int k = 0; k < 4; ++k) REQUIRE(same_bits(back.samples[i][k], ts.samples[i][k]));
    fs::remove_all(dir);
}

TEST_CASE("branch and fold tables") {
    SystemParams p;
    p.f = 1.1;
    const auto [lo, hi] = default_window(p);
    const auto b = trace_branch(p, lo, hi);
    std::stringstream bs, fs_;
    io::write_branch_csv(bs, b);
    io::write_folds_csv(fs_, b.folds);
    std::string line;
    std::getline(bs, line);
    CHECK(line == "sigma1,omega,a1,gamma1,a2,gamma2,u1,u2,stable");
    std::getline(fs_, line);
    CHECK(line == "sigma1,u1,u2,kind,resonance");
    std::size_t rows = 0;
    while (std::getline(fs_, line)) ++rows;
    CHECK(rows == b.folds.size());
}
