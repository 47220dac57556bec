#include "catch_amalgamated.hpp"

#include "hybrid/error.hpp"
#include "hybrid/io.hpp"
#include "hybrid/pipeline.hpp"

#include <filesystem>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

using namespace hybrid;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("hybrid_pipeline_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Scenario small_table1() {
    auto s = builtin_scenario("table1");
    s.grid_values = {1.0, 1.6};
    s.counts = {60, 10, 4};
    return s;
}

}  // namespace

TEST_CASE("builtin scenarios") {
    for (const char* name : {"table1", "table2", "ideal"}) {
        const auto s = builtin_scenario(name);
        CHECK_NOTHROW(s.validate());
        const auto back = scenario_from_json(to_json(s));
        CHECK(to_json(back).dump() == to_json(s).dump());
    }
    CHECK(builtin_scenario("table1").cell_count() == 6);
    CHECK(builtin_scenario("ideal").cell_count() == 1);
    CHECK(builtin_scenario("table2").cell_label(0) == "delta-1.0");
    CHECK_THROWS_AS(builtin_scenario("table3"), Error);
}

TEST_CASE("scenario validation") {
    auto s = builtin_scenario("table1");
    s.sampled["gamma"] = {0.0, 1.0};
    CHECK_THROWS_AS(s.validate(), Error);
    s = builtin_scenario("table1");
    s.sampled["delta"] = {2.0, 1.0};
    CHECK_THROWS_AS(s.validate(), Error);
    s = builtin_scenario("table1");
    s.features = {"f12", "f77"};
    CHECK_THROWS_AS(s.validate(), Error);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"target": "omega"})")), Error);
}

TEST_CASE("derived seeds are distinct") {
    CHECK(derive_seed(1, {0, 1}) != derive_seed(1, {1, 0}));
    CHECK(derive_seed(1, {0, 1}) != derive_seed(2, {0, 1}));
    CHECK(derive_seed(1, {0, 1}) == derive_seed(1, {0, 1}));
}

TEST_CASE("table1 cell dataset") {
    const auto s = builtin_scenario("table1");
    const auto cell = generate_dataset(s, 0);
    CHECK(cell.train.size() == 100);
    CHECK(cell.test.size() == 30);
    for (const auto& r : cell.train) {
        REQUIRE(r.features.all_valid());
        REQUIRE(r.params.d == 1.0);
        REQUIRE(r.params.delta >= 1.0);
        REQUIRE(r.params.delta <= 2.0);
        REQUIRE(r.params.f >= 0.9);
        REQUIRE(r.params.f <= 1.1);
    }
}

TEST_CASE("rejection rate on the paper's ranges") {
    for (const char* name : {"table1", "table2"}) {
        const auto s = builtin_scenario(name);
        for (std::size_t c = 0; c < s.cell_count(); ++c) {
            const auto g = generate_records(s, c, RecordSet::train, 100);
            INFO(name << " cell " << c << ": " << g.rejections.size() << " rejected draws");
            CHECK(g.rejections.size() < 5);
        }
    }
}

TEST_CASE("no nonlinearity, no records") {
    auto s = builtin_scenario("ideal");
    s.fixed.beta = 0.0;
    s.counts = {20, 5, 0};
    try {
        (void)generate_dataset(s, 0);
        FAIL("expected TooManyRejections");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooManyRejections);
    }
}

TEST_CASE("dataset files are reproducible") {
    const auto s = small_table1();
    const auto a = scratch("ds_a"), b = scratch("ds_b");
    write_dataset(s, a.string());
    write_dataset(s, b.string());
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a);
        REQUIRE(fs::exists(b / rel));
        CHECK(slurp(e.path()) == slurp(b / rel));
        ++files;
    }
    CHECK(files == 1 + 3 * s.cell_count());
    const auto train = read_feature_csv((a / "d-1.0" / "train.csv").string());
    CHECK(train.size() == 60);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("experiment report is reproducible and recomputable") {
    auto s = builtin_scenario("ideal");
    s.counts = {60, 10, 3};
    s.tune = false;
    ExperimentOptions opts;
    opts.audit = false;
    const auto a = scratch("exp_a"), b = scratch("exp_b");
    const auto ra = run_experiment(s, opts);
    const auto rb = run_experiment(s, opts);
    REQUIRE(ra.complete);
    write_report(ra, a.string());
    write_report(rb, b.string());
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
    CHECK(slurp(a / "parity.csv") == slurp(b / "parity.csv"));
    CHECK(slurp(a / "model.json") == slurp(b / "model.json"));

    // RMSE columns follow from the parity table
    std::ifstream in(a / "parity.csv");
    std::string line;
    std::map<std::string, std::pair<double, int>> sums;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = io::split_csv_line(line);
        const double e = io::parse_double(f[1]) - io::parse_double(f[2]);
        sums[f[0]].first += e * e;
        sums[f[0]].second += 1;
    }
    const auto& cell = ra.cells.at(0);
    auto rm = [&](const std::string& k) { return std::sqrt(sums.at(k).first / sums.at(k).second); };
    CHECK(std::fabs(rm("test") - cell.rmse_adaptive) < 1e-12);
    CHECK(std::fabs(rm("matched") - cell.rmse_adaptive_matched) < 1e-12);
    CHECK(std::fabs(rm("graybox") - cell.rmse_graybox) < 1e-12);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("cross-source evaluation") {
    auto s = builtin_scenario("table1");
    const auto cell = generate_dataset(s, 0);
    const auto model = train(cell.train, s.features, s.target, s.hyper, 1);
    CHECK_THROWS_AS(cross_source_test(model, s, 0, {}), Error);

    SECTION("the report's RMSE is the model's RMSE on the continuation test set") {
        auto opts = ExperimentOptions{};
        opts.graybox = false;
        opts.cross_source = false;
        opts.audit = false;
        auto quick = s;
        quick.tune = false;
        const auto rep = run_cell(quick, 0, opts);
        const auto pred = predict(rep.model, cell.test);
        CHECK(rmse(target_column(cell.test, s.target), pred) == rep.rmse_adaptive);
    }

    SECTION("swept features give a comparable error") {
        std::vector<SystemParams> recs;
        for (std::uint64_t i = 0; i < 12; ++i) recs.push_back(sample_params(s, 0, derive_seed(5, {i})));
        const auto r = cross_source_test(model, s, 0, recs);
        const double same = rmse(target_column(cell.test, s.target), predict(model, cell.test));
        INFO("cross-source " << r.rmse << ", same-source " << same);
        CHECK(r.used + r.mismatched == 12);
        CHECK(r.rmse <= 3.0 * same);
    }
}
