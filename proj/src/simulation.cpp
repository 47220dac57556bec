#include "hybrid/simulation.hpp"

#include "hybrid/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace hybrid {

namespace {

struct Rhs {
    double w0sq, damping, cubic, coupling, force;

    OscillatorState operator()(const OscillatorState& y, double phase) const {
        const double x1 = y[0], v1 = y[1], x2 = y[2], v2 = y[3];
        return {v1,
                force * std::cos(phase) - w0sq * x1 - damping * v1 - cubic * x1 * x1 * x1 - coupling * (x1 - x2),
                v2, -w0sq * x2 - damping * v2 - cubic * x2 * x2 * x2 - coupling * (x2 - x1)};
    }
};

Rhs make_rhs(const SystemParams& p) {
    return {p.omega0 * p.omega0, p.epsilon * p.d, p.epsilon * p.beta, p.delta, p.epsilon * p.f};
}

inline OscillatorState axpy(const OscillatorState& y, double a, const OscillatorState& k) {
    return {y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]};
}

// One RK4 step; the forcing phase advances linearly with time.
inline OscillatorState rk4_step(const Rhs& f, const OscillatorState& y, double phase, double dphase, double dt) {
    const auto k1 = f(y, phase);
    const auto k2 = f(axpy(y, 0.5 * dt, k1), phase + 0.5 * dphase);
    const auto k3 = f(axpy(y, 0.5 * dt, k2), phase + 0.5 * dphase);
    const auto k4 = f(axpy(y, dt, k3), phase + dphase);
    OscillatorState out;
    for (int i = 0; i < 4; ++i) out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

void check_step(double Omega, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    if (Omega > 0.0 && dt > (2.0 * kPi / Omega) / 40.0 * (1.0 + 1e-12)) {
        throw Error(ErrorCode::StepTooCoarse, "dt exceeds 1/40 of the forcing period");
    }
}

std::size_t step_count(double t_end, double dt) {
    return static_cast<std::size_t>(std::llround(t_end / dt));
}

}  // namespace

TimeSeries integrate(const SystemParams& p, double Omega, const OscillatorState& initial, double t_end, double dt,
                     double phase0) {
    p.validate();
    check_step(Omega, dt);
    if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive");
    const std::size_t n = step_count(t_end, dt);
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "integration window shorter than one step");

    const Rhs rhs = make_rhs(p);
    TimeSeries ts;
    ts.dt = dt;
    ts.Omega = Omega;
    ts.params = p;
    ts.samples.reserve(n + 1);
    ts.samples.push_back(initial);
    OscillatorState y = initial;
    const double dphase = Omega * dt;
    for (std::size_t i = 0; i < n; ++i) {
        y = rk4_step(rhs, y, phase0 + static_cast<double>(i) * dphase, dphase, dt);
        ts.samples.push_back(y);
    }
    if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::NonFinite, "integration diverged");
    }
    ts.final_phase = std::fmod(phase0 + static_cast<double>(n) * dphase, 2.0 * kPi);
    return ts;
}

const char* to_string(SweepDirection d) noexcept { return d == SweepDirection::up ? "up" : "down"; }

SweepDirection parse_direction(const std::string& s) {
    if (s == "up") return SweepDirection::up;
    if (s == "down") return SweepDirection::down;
    throw Error(ErrorCode::InvalidArgument, "sweep direction must be 'up' or 'down', got '" + s + "'");
}

std::vector<double> omega_grid(double omega_min, double omega_max, int steps, SweepDirection direction) {
    if (steps < 2 || !(omega_min < omega_max) || !(omega_min > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "omega grid needs 0 < min < max and at least two steps");
    }
    std::vector<double> grid(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        grid[static_cast<std::size_t>(i)] = omega_min + (omega_max - omega_min) * i / (steps - 1);
    }
    if (direction == SweepDirection::down) std::reverse(grid.begin(), grid.end());
    return grid;
}

SweptResponse sweep(const SystemParams& p, const std::vector<double>& grid, SweepDirection direction,
                    const SweepSettings& settings) {
    p.validate();
    if (grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "sweep grid needs at least two frequencies");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const bool ok = direction == SweepDirection::up ? grid[i] > grid[i - 1] : grid[i] < grid[i - 1];
        if (!ok) throw Error(ErrorCode::InvalidArgument, "sweep grid is not monotonic in the stated direction");
    }
    if (settings.measure_periods < 1 || settings.settle_periods < 0) {
        throw Error(ErrorCode::InvalidArgument, "sweep needs a measurement window");
    }
    if (settings.steps_per_period < 40) {
        throw Error(ErrorCode::StepTooCoarse, "sweep needs >= 40 steps per period");
    }

    const Rhs rhs = make_rhs(p);
    SweptResponse out;
    out.direction = direction;
    OscillatorState y{0.0, 0.0, 0.0, 0.0};
    double phase = 0.0;
    for (double Omega : grid) {
        if (!(Omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "sweep frequencies must be positive");
        const double dt = 2.0 * kPi / Omega / settings.steps_per_period;
        const double dphase = 2.0 * kPi / settings.steps_per_period;
        const int settle = settings.settle_periods * settings.steps_per_period;
        const int measure = settings.measure_periods * settings.steps_per_period;
        double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
        for (int i = 0; i < settle + measure; ++i) {
            y = rk4_step(rhs, y, phase, dphase, dt);
            phase += dphase;
            if (phase > 2.0 * kPi) phase -= 2.0 * kPi;
            if (i >= settle) {
                xmin = std::min(xmin, y[0]);
                xmax = std::max(xmax, y[0]);
                ymin = std::min(ymin, y[2]);
                ymax = std::max(ymax, y[2]);
            }
        }
        if (!std::isfinite(xmax - xmin) || !std::isfinite(ymax - ymin)) {
            throw Error(ErrorCode::NonFinite, "sweep integration diverged");
        }
        out.points.push_back({Omega, 0.5 * (xmax - xmin), 0.5 * (ymax - ymin)});
    }
    return out;
}

// -----------------------------------------------------------------------------
// Gray box
// -----------------------------------------------------------------------------

const char* to_string(TargetParameter t) noexcept { return t == TargetParameter::delta ? "delta" : "d"; }

TargetParameter parse_target(const std::string& s) {
    if (s == "delta") return TargetParameter::delta;
    if (s == "d") return TargetParameter::d;
    throw Error(ErrorCode::InvalidArgument, "target must be 'delta' or 'd', got '" + s + "'");
}

double get_parameter(const SystemParams& p, TargetParameter t) {
    return t == TargetParameter::delta ? p.delta : p.d;
}

void set_parameter(SystemParams& p, TargetParameter t, double value) {
    (t == TargetParameter::delta ? p.delta : p.d) = value;
}

GrayBoxSettings default_graybox_settings(TargetParameter target) {
    GrayBoxSettings s;
    s.regularization = target == TargetParameter::d ? 0.1 : 0.0;
    return s;
}

std::vector<double> graybox_frequencies(const SystemParams& p, int count) {
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "need at least one fit frequency");
    const auto m = modal_frequencies(p);
    const double lo = m.omega1 - 0.3;
    const double hi = m.omega2 + 0.3 * (m.omega2 - m.omega1);
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1));
    }
    return out;
}

namespace {

double fit_dt(double Omega, const GrayBoxSettings& s) { return 2.0 * kPi / Omega / s.steps_per_period; }

}  // namespace

TimeSeries simulate_observation(const SystemParams& p, double Omega, const GrayBoxSettings& s) {
    return integrate(p, Omega, {0.0, 0.0, 0.0, 0.0}, s.t_end, fit_dt(Omega, s));
}

double graybox_objective(const TimeSeries& observed, const SystemParams& model, TargetParameter target, double theta,
                         const GrayBoxSettings& s) {
    SystemParams candidate = model;
    set_parameter(candidate, target, theta);
    const Rhs rhs = make_rhs(candidate);
    const double dt = observed.dt;
    const double dphase = observed.Omega * dt;
    const std::size_t first = step_count(s.transient, dt);
    if (first >= observed.samples.size()) {
        throw Error(ErrorCode::InvalidArgument, "observed series shorter than the transient window");
    }
    OscillatorState y = observed.samples.front();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 1; i < observed.samples.size(); ++i) {
        y = rk4_step(rhs, y, observed.t0 * observed.Omega + static_cast<double>(i - 1) * dphase, dphase, dt);
        if (i >= first) {
            const double e1 = y[0] - observed.samples[i][0];
            const double e2 = y[2] - observed.samples[i][2];
            sum += e1 * e1 + e2 * e2;
            ++count;
        }
    }
    if (!std::isfinite(sum)) return std::numeric_limits<double>::max();
    const double mse = sum / static_cast<double>(2 * count);
    return mse + s.regularization * (theta - s.init) * (theta - s.init);
}

GrayBoxEstimate graybox_fit(const std::vector<TimeSeries>& observed, const SystemParams& model,
                            TargetParameter target, const GrayBoxSettings& s) {
    if (observed.empty()) throw Error(ErrorCode::EmptyInput, "gray box needs at least one observed series");
    if (!(s.lower < s.upper) || s.init < s.lower || s.init > s.upper) {
        throw Error(ErrorCode::InvalidArgument, "gray-box initial guess must lie inside the bounds");
    }
    GrayBoxEstimate out;
    out.target = target;
    out.initial_guess = s.init;
    for (const auto& series : observed) {
        FrequencyEstimate fe;
        fe.Omega = series.Omega;
        auto objective = [&](double theta) {
            ++fe.evaluations;
            return graybox_objective(series, model, target, theta, s);
        };
        fe.objective_init = objective(s.init);
        std::uintmax_t iterations = static_cast<std::uintmax_t>(s.max_iterations);
        const auto [theta, value] = boost::math::tools::brent_find_minima(objective, s.lower, s.upper, s.bits,
                                                                          iterations);
        if (value < fe.objective_init) {
            fe.estimate = theta;
            fe.objective = value;
        } else {
            fe.estimate = s.init;
            fe.objective = fe.objective_init;
            fe.stalled = value > fe.objective_init;
        }
        out.stalled = out.stalled || fe.stalled;
        out.per_frequency.push_back(fe);
    }
    double sum = 0.0;
    for (const auto& fe : out.per_frequency) sum += fe.estimate;
    out.final = sum / static_cast<double>(out.per_frequency.size());
    return out;
}

}  // namespace hybrid
