#pragma once

// Slow-flow (modulation) model of two identical Duffing oscillators with a
// linear coupling spring, forced on the first oscillator near its primary
// resonances:
//
//   x1'' + w0^2 x1 + eps d x1' + eps beta x1^3 + delta (x1 - x2) = eps f cos(W t)
//   x2'' + w0^2 x2 + eps d x2' + eps beta x2^3 + delta (x2 - x1) = 0
//
// The modal amplitudes/phases (a1, g1, a2, g2) evolve on the slow time scale
// and their fixed points are the periodic steady states.

#include <Eigen/Dense>

namespace hybrid {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultAmplitudeFloor = 1e-12;

struct SystemParams {
    double omega0 = 1.0;
    double d = 1.0;       // damping, already divided by epsilon
    double beta = 40.0;   // cubic stiffness, already divided by epsilon
    double delta = 1.0;   // coupling (not rescaled)
    double f = 1.0;       // forcing amplitude, F = epsilon * f
    double epsilon = 0.1;

    /// Throws Error(InvalidArgument) if a field is outside its physical range.
    void validate() const;
};

struct ModalFrequencies {
    double omega1 = 0.0;
    double omega2 = 0.0;
    double sigma2 = 0.0;  // internal detuning (omega2 - omega1) / epsilon
};

[[nodiscard]] ModalFrequencies modal_frequencies(const SystemParams& p);

/// Excitation frequency for a detuning: W = omega1 + eps * sigma1.
[[nodiscard]] double excitation_frequency(const SystemParams& p, double sigma1);
[[nodiscard]] double detuning_of(const SystemParams& p, double omega);

struct ModulationState {
    double a1 = 0.0;
    double gamma1 = 0.0;
    double a2 = 0.0;
    double gamma2 = 0.0;

    [[nodiscard]] Vec4 as_vector() const { return {a1, gamma1, a2, gamma2}; }
    [[nodiscard]] static ModulationState from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Negative amplitudes are folded back with a half-turn of the phase.
/// Idempotent.
[[nodiscard]] ModulationState canonicalize(ModulationState s);

/// Smallest distance between two angles modulo 2 pi.
[[nodiscard]] double angle_distance(double a, double b);

struct PhysicalResponse {
    double u1 = 0.0;  // amplitude of oscillator X
    double u2 = 0.0;  // amplitude of oscillator Y
    double Gamma1 = 0.0;
    double Gamma2 = 0.0;
};

/// Right-hand side (a1', g1', a2', g2') of the autonomous modulation equations.
/// Throws SingularAmplitude when a1 or a2 is at or below `amplitude_floor`.
[[nodiscard]] Vec4 modulation_rhs(const ModulationState& s, const SystemParams& p, double sigma1,
                                  double amplitude_floor = kDefaultAmplitudeFloor);

struct SteadyEvaluation {
    Vec4 residual;
    Mat4 jacobian;  // d(rhs)/d(a1, g1, a2, g2), analytic
};

[[nodiscard]] SteadyEvaluation steady_residual_jacobian(const ModulationState& s, const SystemParams& p,
                                                        double sigma1,
                                                        double amplitude_floor = kDefaultAmplitudeFloor);

/// d(rhs)/d(sigma1). Constant: sigma1 enters both phase equations linearly.
[[nodiscard]] inline Vec4 rhs_sigma_derivative() { return {0.0, 1.0, 0.0, 1.0}; }

[[nodiscard]] PhysicalResponse reconstruct_physical(const ModulationState& s);

/// Derivatives of (u1, u2) along a state direction ds.
[[nodiscard]] Eigen::Vector2d physical_amplitude_derivative(const ModulationState& s, const Vec4& ds);

/// Closed-form a1 of the linear (beta = 0) system. Throws InvalidArgument if beta != 0.
[[nodiscard]] double linear_amplitude_oracle(const SystemParams& p, double sigma1);

/// Smooth Cartesian form of the slow flow, (P, Q) = a (cos g, sin g) per mode.
/// Regular at a = 0, so it is used to relax from a small seed.
[[nodiscard]] Vec4 cartesian_slow_flow(const Vec4& pq, const SystemParams& p, double sigma1);

[[nodiscard]] ModulationState from_cartesian(const Vec4& pq);
[[nodiscard]] Vec4 to_cartesian(const ModulationState& s);

}  // namespace hybrid
