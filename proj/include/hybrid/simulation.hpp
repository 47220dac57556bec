#pragma once

// Direct time integration of the full coupled oscillator equations, stepped-sine
// sweeps, and the gray-box (simulation-fitting) parameter estimator.

#include "hybrid/core.hpp"

#include <array>
#include <string>
#include <vector>

namespace hybrid {

/// (x1, x1', x2, x2')
using OscillatorState = std::array<double, 4>;

struct TimeSeries {
    double dt = 0.0;
    double Omega = 0.0;
    double t0 = 0.0;
    SystemParams params;
    std::vector<OscillatorState> samples;  // samples[i] at t0 + i * dt
    double final_phase = 0.0;             // forcing phase after the last sample
};

/// Classical fixed-step RK4 of the full equations with forcing eps f cos(Omega t + phase0).
/// Requires at least 40 steps per forcing period (throws StepTooCoarse otherwise).
[[nodiscard]] TimeSeries integrate(const SystemParams& p, double Omega, const OscillatorState& initial, double t_end,
                                   double dt, double phase0 = 0.0);

enum class SweepDirection { up, down };

[[nodiscard]] const char* to_string(SweepDirection d) noexcept;
[[nodiscard]] SweepDirection parse_direction(const std::string& s);

struct SweepPoint {
    double Omega = 0.0;
    double amp_x = 0.0;  // half peak-to-peak of x1 over the measurement window
    double amp_y = 0.0;
};

struct SweptResponse {
    SweepDirection direction = SweepDirection::up;
    std::vector<SweepPoint> points;
};

struct SweepSettings {
    int settle_periods = 100;
    int measure_periods = 20;
    int steps_per_period = 64;
};

/// Stepped-sine sweep over a monotonic grid; the oscillator state and forcing phase
/// carry over from one frequency to the next so hysteresis is preserved.
[[nodiscard]] SweptResponse sweep(const SystemParams& p, const std::vector<double>& omega_grid,
                                  SweepDirection direction, const SweepSettings& settings = {});

/// Evenly spaced grid, ascending for up and descending for down.
[[nodiscard]] std::vector<double> omega_grid(double omega_min, double omega_max, int steps, SweepDirection direction);

// -----------------------------------------------------------------------------
// Gray-box estimation
// -----------------------------------------------------------------------------

enum class TargetParameter { delta, d };

[[nodiscard]] const char* to_string(TargetParameter t) noexcept;
[[nodiscard]] TargetParameter parse_target(const std::string& s);
[[nodiscard]] double get_parameter(const SystemParams& p, TargetParameter t);
void set_parameter(SystemParams& p, TargetParameter t, double value);

struct GrayBoxSettings {
    double init = 1.5;
    double lower = 1.0;
    double upper = 2.0;
    double regularization = 0.0;  // weight on (theta - init)^2
    int max_iterations = 40;
    int bits = 30;                 // Brent tolerance in bits
    double t_end = 400.0;
    double transient = 200.0;      // discarded from the objective
    int steps_per_period = 64;
};

/// Default weights: 0.1 toward the initial guess for damping, none for coupling.
[[nodiscard]] GrayBoxSettings default_graybox_settings(TargetParameter target);

struct FrequencyEstimate {
    double Omega = 0.0;
    double estimate = 0.0;
    double objective = 0.0;       // at the estimate
    double objective_init = 0.0;  // at the initial guess
    int evaluations = 0;
    bool stalled = false;         // no decrease below the initial-guess objective
};

struct GrayBoxEstimate {
    TargetParameter target = TargetParameter::delta;
    double initial_guess = 0.0;
    std::vector<FrequencyEstimate> per_frequency;
    double final = 0.0;  // mean of the per-frequency estimates
    bool stalled = false;
};

/// Ten (by default) fit frequencies spanning both resonances:
/// [omega1 - 0.3, omega2 + 0.3 (omega2 - omega1)].
[[nodiscard]] std::vector<double> graybox_frequencies(const SystemParams& p, int count = 10);

/// Observed record for the gray box: the full series from rest, sampled like the fit model.
[[nodiscard]] TimeSeries simulate_observation(const SystemParams& p, double Omega, const GrayBoxSettings& s);

/// Mean squared error of (x1, x2) over the steady window plus the regularization term.
/// The candidate is `model` with the target set to theta, driven at the observed frequency.
[[nodiscard]] double graybox_objective(const TimeSeries& observed, const SystemParams& model, TargetParameter target,
                                       double theta, const GrayBoxSettings& s);

/// One bounded Brent search per observed series; the estimate is the mean over frequencies.
/// `model` holds what the modeler believes about every other parameter; the parameters
/// stored with the observations are never looked at.
[[nodiscard]] GrayBoxEstimate graybox_fit(const std::vector<TimeSeries>& observed, const SystemParams& model,
                                          TargetParameter target, const GrayBoxSettings& s);

}  // namespace hybrid
