#pragma once

#include "hybrid/core.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace hybrid {

enum class JumpKind { jump_down, jump_up };
enum class Resonance { first, second };

[[nodiscard]] const char* to_string(JumpKind k) noexcept;
[[nodiscard]] const char* to_string(Resonance r) noexcept;

struct BranchPoint {
    double sigma1 = 0.0;
    ModulationState state;
    PhysicalResponse response;
    bool stable = false;
    double arclength = 0.0;  // cumulative, in the scaled metric
};

struct FoldPoint {
    double sigma1 = 0.0;
    ModulationState state;
    double u1 = 0.0;
    double u2 = 0.0;
    JumpKind kind = JumpKind::jump_down;
    Resonance resonance = Resonance::first;
};

struct ResponseBranch {
    SystemParams params;
    std::vector<BranchPoint> points;
    std::vector<FoldPoint> folds;  // sorted by sigma1
};

struct StepControls {
    double initial_step = 0.05;
    double min_step = 1e-6;
    double max_step = 0.05;
    double corrector_tolerance = 1e-10;
    int max_corrector_iterations = 8;
    int fast_convergence_iterations = 3;  // step doubles at or below this count
    double min_tangent_cosine = 0.9;      // rejects predictor steps that turn too sharply
    std::size_t max_points = 200000;
};

/// Weights of the arclength metric: amplitudes 1, phases 1/pi, sigma1 1/10.
struct ArclengthScaling {
    double amplitude = 1.0;
    double phase = 1.0 / kPi;
    double sigma = 0.1;
};

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 60;
};

/// Damped Newton on the steady-state residual at fixed detuning.
[[nodiscard]] std::optional<ModulationState> solve_steady(const SystemParams& p, double sigma1,
                                                          ModulationState guess, const NewtonOptions& opts = {});

/// Steady state at sigma1_start: relaxes the slow flow from a small seed, then polishes with Newton.
/// Throws NoConvergence (also for the unforced system, whose only fixed point is a = 0).
[[nodiscard]] ModulationState initial_point(const SystemParams& p, double sigma1_start);

/// Default detuning window [-15, sigma2 + 15].
[[nodiscard]] std::pair<double, double> default_window(const SystemParams& p);

/// Pseudo-arclength continuation (secant predictor, bordered Newton corrector) over
/// [sigma1_min, sigma1_max]. Folds are detected and labeled on the result.
/// Throws StepCollapse, NoConvergence, FoldCountUnexpected.
[[nodiscard]] ResponseBranch trace_branch(const SystemParams& p, double sigma1_min, double sigma1_max,
                                          const StepControls& controls = {});

/// Largest real part among the slow-flow Jacobian eigenvalues at the point.
[[nodiscard]] double stability_margin(const ModulationState& s, const SystemParams& p, double sigma1);

/// Stable iff every eigenvalue has real part below -tolerance. Marginal points are unstable.
[[nodiscard]] bool classify_stability(const BranchPoint& point, const SystemParams& p, double tolerance = 1e-9);

/// Locates folds by sign changes of d(sigma1) along the branch, refines each by bisection
/// on det(J) along the chord, then pairs consecutive folds (in arclength order) into
/// resonances and labels them.
/// Throws FoldCountUnexpected for an odd count or more than four folds.
[[nodiscard]] std::vector<FoldPoint> detect_folds(const ResponseBranch& branch);

/// d(state)/d(sigma1) along a steady-state branch (implicit function theorem).
[[nodiscard]] Vec4 state_sigma_derivative(const ModulationState& s, const SystemParams& p, double sigma1);

/// Point of steepest descent of the resonating modal amplitude on the high-detuning
/// flank of a resonance. This is where a fold pair sits once it has merged at the cusp.
struct FlankPoint {
    double sigma1 = 0.0;
    ModulationState state;
    PhysicalResponse response;
    Eigen::Vector2d slope = Eigen::Vector2d::Zero();  // d(u1, u2)/d(sigma1)
    Resonance resonance = Resonance::first;
};

[[nodiscard]] std::optional<FlankPoint> steepest_flank(const ResponseBranch& branch, Resonance resonance);

[[nodiscard]] int fold_count(const ResponseBranch& branch, Resonance resonance);

}  // namespace hybrid
