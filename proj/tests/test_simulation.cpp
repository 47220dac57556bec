#include "catch_amalgamated.hpp"

#include "hybrid/continuation.hpp"
#include "hybrid/error.hpp"
#include "hybrid/simulation.hpp"
#include "oracles.hpp"

#include <algorithm>

using namespace hybrid;
using Catch::Approx;

namespace {

SystemParams params(double delta, double d, double f, double beta) {
    SystemParams p;
    p.delta = delta;
    p.d = d;
    p.f = f;
    p.beta = beta;
    return p;
}

// Amplitude of the fundamental of x1 over the last `periods` forcing periods.
double fundamental_amplitude(const TimeSeries& ts, int periods) {
    const double T = 2.0 * oracle::pi / ts.Omega;
    const auto n = static_cast<std::size_t>(std::llround(periods * T / ts.dt));
    REQUIRE(ts.samples.size() > n);
    const std::size_t first = ts.samples.size() - 1 - n;
    double c = 0.0, s = 0.0;
    for (std::size_t i = first; i < ts.samples.size() - 1; ++i) {  // rectangle rule is exact for trig polynomials
        const double t = ts.t0 + static_cast<double>(i) * ts.dt;
        c += ts.samples[i][0] * std::cos(ts.Omega * t);
        s += ts.samples[i][0] * std::sin(ts.Omega * t);
    }
    return 2.0 * std::hypot(c, s) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("free harmonic oscillator") {
    const auto p = params(0.0, 0.0, 0.0, 0.0);
    const auto ts = integrate(p, 1.0, {1.0, 0.0, 0.0, 0.0}, 200.0 * oracle::pi, 0.01);
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        const double t = ts.t0 + static_cast<double>(i) * ts.dt;
        worst = std::max(worst, std::fabs(ts.samples[i][0] - std::cos(t)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("fourth-order convergence") {
    // undamped coupled pair released from x1 = 1: x1 = (cos w1 t + cos w2 t) / 2
    const auto p = params(1.0, 0.0, 0.0, 0.0);
    const double w2 = std::sqrt(3.0), t_end = 20.0;
    auto error = [&](double dt) {
        const auto ts = integrate(p, 1.0, {1.0, 0.0, 0.0, 0.0}, t_end, dt);
        const double last = ts.t0 + static_cast<double>(ts.samples.size() - 1) * ts.dt;
        REQUIRE(last == Approx(t_end).margin(1e-9));
        // worst over the trajectory; the error at any single instant crosses zero
        double worst = 0.0;
        for (std::size_t i = 0; i < ts.samples.size(); ++i) {
            const double t = ts.t0 + static_cast<double>(i) * ts.dt;
            worst = std::max(worst, std::fabs(ts.samples[i][0] - 0.5 * (std::cos(t) + std::cos(w2 * t))));
        }
        return worst;
    };
    const std::vector<double> dts{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> errs;
    for (double dt : dts) errs.push_back(error(dt));
    // least-squares slope on log-log
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        const double x = std::log(dts[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(dts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    INFO("slope " << slope);
    CHECK(slope > 3.7);
    CHECK(slope < 4.3);
}

TEST_CASE("coarse steps are refused") {
    const auto p = params(1.0, 1.0, 1.0, 40.0);
    const double T = 2.0 * oracle::pi / 1.5;
    CHECK_THROWS_AS(integrate(p, 1.5, {}, 10.0, T / 30.0), Error);
    CHECK_NOTHROW(integrate(p, 1.5, {}, 10.0, T / 40.0));
}

TEST_CASE("linear forced steady amplitude") {
    const auto p = params(1.0, 1.0, 1.0, 0.0);
    for (double Omega : {0.8, 1.0, 1.3, 1.72}) {
        const double T = 2.0 * oracle::pi / Omega;
        // transients decay like exp(-eps d t / 2); 120 periods leaves < 1e-6 of them
        const auto ts = integrate(p, Omega, {}, 120.0 * T, T / 200.0);
        const double a = fundamental_amplitude(ts, 20);
        const double ref = oracle::linear_full_amplitude(p, Omega);
        INFO("Omega " << Omega);
        CHECK(std::fabs(a - ref) / ref < 1e-4);
    }
}

TEST_CASE("linear sweeps show no hysteresis") {
    const auto p = params(1.0, 1.0, 1.0, 0.0);
    const auto up = sweep(p, omega_grid(0.8, 1.9, 45, SweepDirection::up), SweepDirection::up);
    const auto dn = sweep(p, omega_grid(0.8, 1.9, 45, SweepDirection::down), SweepDirection::down);
    REQUIRE(up.points.size() == dn.points.size());
    for (std::size_t i = 0; i < up.points.size(); ++i) {
        const auto& a = up.points[i];
        const auto& b = dn.points[dn.points.size() - 1 - i];
        REQUIRE(a.Omega == Approx(b.Omega).margin(1e-12));
        CHECK(std::fabs(a.amp_x - b.amp_x) < 1e-4);
        CHECK(std::fabs(a.amp_y - b.amp_y) < 1e-4);
    }
}

TEST_CASE("upper branch amplitude agrees with the slow flow") {
    const auto p = params(1.0, 1.0, 1.0, 40.0);
    const auto [lo, hi] = default_window(p);
    const auto b = trace_branch(p, lo, hi);
    // climb the first resonance from below, stop on its upper branch
    const double s_stop = 2.0;
    const double W_stop = excitation_frequency(p, s_stop);
    auto grid = omega_grid(0.8, W_stop, 41, SweepDirection::up);
    const auto sw = sweep(p, grid, SweepDirection::up);
    double u_cont = 0.0;
    for (const auto& pt : b.points)
        if (pt.stable && std::fabs(pt.sigma1 - s_stop) < 0.05) u_cont = std::max(u_cont, pt.response.u1);
    REQUIRE(u_cont > 0.0);
    const double u_sim = sw.points.back().amp_x;
    INFO("simulated " << u_sim << " slow flow " << u_cont);
    CHECK(std::fabs(u_sim - u_cont) / u_cont < 0.05);
}

TEST_CASE("sweep grid and parsing") {
    const auto g = omega_grid(1.0, 2.0, 11, SweepDirection::down);
    REQUIRE(g.size() == 11);
    CHECK(g.front() == 2.0);
    CHECK(g.back() == 1.0);
    CHECK(parse_direction("up") == SweepDirection::up);
    CHECK_THROWS_AS(parse_direction("sideways"), Error);
    CHECK(parse_target("d") == TargetParameter::d);
    CHECK_THROWS_AS(parse_target("beta"), Error);
}

TEST_CASE("gray box recovers the truth from the truth") {
    for (TargetParameter target : {TargetParameter::delta, TargetParameter::d}) {
        const auto truth = params(1.37, 1.21, 1.0, 40.0);
        GrayBoxSettings s = default_graybox_settings(target);
        s.init = get_parameter(truth, target);
        std::vector<TimeSeries> obs;
        for (double W : graybox_frequencies(truth, 4)) obs.push_back(simulate_observation(truth, W, s));
        const auto est = graybox_fit(obs, truth, target, s);
        INFO(to_string(target));
        CHECK(std::fabs(est.final - get_parameter(truth, target)) < 1e-3);
    }
}

TEST_CASE("gray box objective is smallest at the truth") {
    const auto truth = params(1.37, 1.21, 1.0, 40.0);
    for (TargetParameter target : {TargetParameter::delta, TargetParameter::d}) {
        GrayBoxSettings s = default_graybox_settings(target);
        s.regularization = 0.0;
        const double W = graybox_frequencies(truth, 10)[3];
        const auto obs = simulate_observation(truth, W, s);
        const double at_truth = graybox_objective(obs, truth, target, get_parameter(truth, target), s);
        CHECK(at_truth < 1e-20);
        for (int k = 0; k < 20; ++k) {
            const double theta = 1.0 + 0.05 * k + 0.013;
            REQUIRE(graybox_objective(obs, truth, target, theta, s) >= at_truth);
        }
    }
}

TEST_CASE("gray box frequencies span both resonances") {
    const auto p = params(1.0, 1.0, 1.0, 40.0);
    const auto w = graybox_frequencies(p, 10);
    REQUIRE(w.size() == 10);
    const double w2 = std::sqrt(3.0);
    CHECK(w.front() == Approx(0.7));
    CHECK(w.back() == Approx(w2 + 0.3 * (w2 - 1.0)));
    CHECK(std::is_sorted(w.begin(), w.end()));
}

TEST_CASE("sweep amplitudes continuous away from jumps") {
    const auto p = params(1.0, 1.0, 1.0, 40.0);
    const auto sw = sweep(p, omega_grid(0.7, 2.2, 301, SweepDirection::up), SweepDirection::up);
    const auto& pts = sw.points;
    // the jump of each resonance is its largest drop; a grid step either side of it is
    // still settling onto the new branch
    auto largest_drop = [&](double lo, double hi) {
        std::size_t best = 0;
        double size = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            if (pts[i].Omega < lo || pts[i].Omega >= hi) continue;
            const double drop = pts[i].amp_x - pts[i + 1].amp_x;
            if (drop > size) {
                size = drop;
                best = i;
            }
        }
        return best;
    };
    const double mid = 0.5 * (1.0 + std::sqrt(3.0));
    const std::size_t j1 = largest_drop(0.0, mid), j2 = largest_drop(mid, 10.0);
    CHECK(pts[j1].Omega > 1.0);
    CHECK(pts[j1].Omega < 1.5);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto near = [&](std::size_t j) { return i + 1 >= j && i <= j + 1; };
        if (near(j1) || near(j2)) continue;
        const double a = pts[i].amp_x, b = pts[i + 1].amp_x;
        INFO("Omega " << pts[i].Omega << ": " << a << " -> " << b);
        CHECK(std::fabs(b - a) <= 0.1 * std::max(a, b));
    }
}
