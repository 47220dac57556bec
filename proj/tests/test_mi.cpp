#include "catch_amalgamated.hpp"

#include "hybrid/error.hpp"
#include "hybrid/mi.hpp"
#include "hybrid/pipeline.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace hybrid;
using Catch::Approx;

namespace {

// I(X;Y) summed straight from a joint table, for the discrete reference case.
double table_mi(const std::vector<std::vector<double>>& p) {
    std::vector<double> px(p.size(), 0.0), py(p[0].size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p[i].size(); ++j) {
            px[i] += p[i][j];
            py[j] += p[i][j];
        }
    double mi = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p[i].size(); ++j)
            if (p[i][j] > 0) mi += p[i][j] * std::log(p[i][j] / (px[i] * py[j]));
    return mi;
}

Dataset table1_rows(int n, std::uint64_t seed) {
    auto s = builtin_scenario("table1");
    s.seed = seed;
    return generate_records(s, 0, RecordSet::train, n).records;
}

}  // namespace

TEST_CASE("mutual information of a variable with itself") {
    std::vector<double> x;
    for (int i = 0; i < 400; ++i) x.push_back(i % 4);
    CHECK(estimate_mi(x, x, 4, 4, Binning::equal_mass) == Approx(std::log(4.0)).margin(1e-12));
}

TEST_CASE("independent samples") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> x, y;
    for (int i = 0; i < 10000; ++i) {
        x.push_back(u(rng));
        y.push_back(u(rng));
    }
    CHECK(estimate_mi(x, y, 8, 8) < 0.02);
    CHECK(estimate_mi(x, y, 8, 8, Binning::equal_mass) < 0.02);
}

TEST_CASE("binary symmetric channel") {
    const double ref = table_mi({{0.4, 0.1}, {0.1, 0.4}});
    CHECK(ref == Approx(0.1927).margin(5e-5));
    CHECK(ref / std::log(2.0) == Approx(0.2780).margin(1e-4));  // 0.27807 rounded
    std::vector<double> x, y;
    auto add = [&](double a, double b, int n) {
        for (int i = 0; i < n; ++i) {
            x.push_back(a);
            y.push_back(b);
        }
    };
    add(0, 0, 40);
    add(1, 1, 40);
    add(0, 1, 10);
    add(1, 0, 10);
    CHECK(estimate_mi(x, y, 2, 2) == Approx(ref).margin(1e-12));
}

TEST_CASE("too few samples") {
    std::vector<double> x(50, 1.0);
    CHECK_THROWS_AS(estimate_mi(x, x, 16, 10), Error);
    CHECK_THROWS_AS(estimate_mi(x, std::vector<double>(49, 1.0), 2, 2), Error);
}

TEST_CASE("quantization") {
    const std::vector<double> v{0.0, 0.1, 0.5, 0.99, 1.0};
    CHECK(quantize(v, 2, Binning::equal_width) == std::vector<int>{0, 0, 1, 1, 1});
    CHECK(quantize(std::vector<double>(5, 3.0), 4, Binning::equal_width) == std::vector<int>(5, 0));
    // ties share a bin
    const auto q = quantize(std::vector<double>{1, 1, 1, 1, 2, 3}, 3, Binning::equal_mass);
    CHECK(q[0] == q[3]);
}

TEST_CASE("mi never negative") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int k = 0; k < 50; ++k) {
        std::vector<double> x, y;
        for (int i = 0; i < 200; ++i) {
            x.push_back(g(rng));
            y.push_back(g(rng) + (k % 2 ? x.back() : 0.0));
        }
        REQUIRE(estimate_mi(x, y, 5 + k % 7, 4 + k % 5) >= 0.0);
        REQUIRE(estimate_mi(x, y, 5 + k % 7, 4 + k % 5, Binning::equal_mass) >= 0.0);
    }
}

TEST_CASE("equal-mass mi ignores monotone transforms") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::vector<double> x, y, ex, cube;
    for (int i = 0; i < 500; ++i) {
        x.push_back(g(rng));
        y.push_back(x.back() + 0.5 * g(rng));
        ex.push_back(std::exp(x.back()));
        cube.push_back(x.back() * x.back() * x.back() + x.back());
    }
    const double base = estimate_mi(x, y, 10, 10, Binning::equal_mass);
    CHECK(std::fabs(estimate_mi(ex, y, 10, 10, Binning::equal_mass) - base) < 1e-9);
    CHECK(std::fabs(estimate_mi(cube, y, 10, 10, Binning::equal_mass) - base) < 1e-9);
}

TEST_CASE("table1 ranking") {
    const auto data = table1_rows(100, 1);
    const auto r = rank_features(data, TargetParameter::delta);
    REQUIRE(r.entries.size() == kFeatureCount);
    CHECK(r.samples == 100);
    CHECK(r.feature_bins == 10);
    CHECK(r.target_classes == 10);
    for (std::size_t i = 1; i < r.entries.size(); ++i) CHECK(r.entries[i - 1].mi >= r.entries[i].mi);
    const auto top = r.top(4);
    CHECK(std::set<std::string>(top.begin(), top.end()) == std::set<std::string>{"f12", "f13", "f22", "f23"});

    SECTION("monotone map of a feature keeps the top four") {
        Dataset mapped = data;
        const auto i = feature_index("f12");
        for (auto& rec : mapped) rec.features.values[i] = std::exp(rec.features.values[i] / 4.0);
        const auto t = rank_features(mapped, TargetParameter::delta).top(4);
        CHECK(std::set<std::string>(t.begin(), t.end()) == std::set<std::string>{"f12", "f13", "f22", "f23"});
    }
}

TEST_CASE("permuted target carries no information") {
    // 16x10 bins need a few thousand rows before the plug-in bias (~ 135 / 2n nats) is small
    auto data = table1_rows(3000, 5);
    std::vector<double> target;
    for (const auto& r : data) target.push_back(r.params.delta);
    std::mt19937_64 rng(77);
    std::shuffle(target.begin(), target.end(), rng);
    for (std::size_t i = 0; i < data.size(); ++i) data[i].params.delta = target[i];
    const auto r = rank_features(data, TargetParameter::delta);
    CHECK(r.feature_bins == 16);
    for (const auto& e : r.entries) {
        INFO(e.feature);
        CHECK(e.mi < 0.05);
        CHECK(e.mi >= 0.0);
    }
}

TEST_CASE("estimate is stable under doubling the sample") {
    const auto big = table1_rows(2000, 9);
    const Dataset half(big.begin(), big.begin() + 1000);
    const auto a = rank_features(half, TargetParameter::delta);
    const auto b = rank_features(big, TargetParameter::delta);
    for (const auto& e : a.entries) {
        const auto it = std::find_if(b.entries.begin(), b.entries.end(),
                                     [&](const MIEntry& x) { return x.feature == e.feature; });
        INFO(e.feature << ": " << e.mi << " vs " << it->mi);
        CHECK(std::fabs(it->mi - e.mi) < 0.1 * e.mi);
    }
}

TEST_CASE("ranking needs enough rows") {
    CHECK_THROWS_AS(rank_features(table1_rows(49, 2), TargetParameter::delta), Error);
}

TEST_CASE("ranking csv round trip") {
    const auto r = rank_features(table1_rows(60, 3), TargetParameter::delta);
    std::stringstream ss;
    write_ranking_csv(ss, r);
    CHECK(ss.str().rfind("# bins=", 0) == 0);
    CHECK(ss.str().find("unit=nats") != std::string::npos);
    const auto back = read_ranking_csv(ss);
    REQUIRE(back.entries.size() == r.entries.size());
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        CHECK(back.entries[i].feature == r.entries[i].feature);
        CHECK(back.entries[i].mi == r.entries[i].mi);
    }
    CHECK(back.feature_bins == r.feature_bins);
    CHECK(back.samples == r.samples);
}
