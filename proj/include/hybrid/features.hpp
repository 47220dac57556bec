#pragma once

// The 20 jump features of a frequency response: for each oscillator i, the
// detunings f_i1..f_i4 and amplitudes p_i1..p_i4 of the four jump points, and
// the bending slopes alpha_i1, alpha_i2 of the two resonances.
//
// Points are numbered in the order a sweep meets them:
//   1  first-resonance jump-down   (up-sweep)
//   2  second-resonance jump-down  (up-sweep)
//   3  second-resonance jump-up    (down-sweep)
//   4  first-resonance jump-up     (down-sweep)

#include "hybrid/continuation.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace hybrid {

inline constexpr std::size_t kFeatureCount = 20;

/// Canonical order: f11..f14, p11..p14, alpha11, alpha12, f21..f24, p21..p24, alpha21, alpha22.
[[nodiscard]] const std::array<std::string, kFeatureCount>& feature_names();

/// Throws InvalidArgument for an unknown name.
[[nodiscard]] std::size_t feature_index(std::string_view name);

// oscillator and point/resonance are 1-based, as in the names.
[[nodiscard]] constexpr std::size_t freq_index(int oscillator, int point) {
    return static_cast<std::size_t>((oscillator - 1) * 10 + (point - 1));
}
[[nodiscard]] constexpr std::size_t amp_index(int oscillator, int point) {
    return static_cast<std::size_t>((oscillator - 1) * 10 + 4 + (point - 1));
}
[[nodiscard]] constexpr std::size_t slope_index(int oscillator, int resonance) {
    return static_cast<std::size_t>((oscillator - 1) * 10 + 8 + (resonance - 1));
}

/// Jump-down and jump-up point numbers of a resonance.
[[nodiscard]] constexpr std::pair<int, int> jump_points(Resonance r) {
    return r == Resonance::first ? std::pair{1, 4} : std::pair{2, 3};
}

/// How a resonance without a fold pair is represented.
///  reject          such a branch raises MissingFolds
///  steepest_flank  the steepest-descent point of the resonating mode stands in for
///                  both jumps (the fold pair merges there at the cusp); alpha becomes
///                  the tangent slope at that point. Linear branches (beta = 0) are
///                  rejected under either policy.
enum class MonostablePolicy { reject, steepest_flank };

[[nodiscard]] const char* to_string(MonostablePolicy p) noexcept;
[[nodiscard]] MonostablePolicy parse_policy(const std::string& s);

enum class ResonanceKind { bistable, monostable };

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::array<bool, kFeatureCount> valid{};
    std::array<ResonanceKind, 2> kinds{ResonanceKind::bistable, ResonanceKind::bistable};

    [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
    [[nodiscard]] double at(std::string_view name) const { return values[feature_index(name)]; }
    [[nodiscard]] bool all_valid() const;
};

/// Throws MissingFolds when a resonance has no fold pair and the policy is reject
/// (in particular for every linear branch).
[[nodiscard]] FeatureVector extract(const ResponseBranch& branch,
                                    MonostablePolicy policy = MonostablePolicy::reject);

struct NoiseConfig {
    double sigma_rel = 0.005;  // amplitudes: p * (1 + N(0, sigma_rel))
    double sigma_abs = 0.01;   // detunings: f + N(0, sigma_abs)
};

/// Slopes of bistable resonances are recomputed from the noised endpoints. A monostable
/// resonance has a single point, noised once; its tangent slope gets relative noise.
[[nodiscard]] FeatureVector inject_noise(const FeatureVector& v, const NoiseConfig& noise, std::uint64_t seed);

/// Secant slope through the jump points of a bistable resonance.
[[nodiscard]] double secant_slope(const FeatureVector& v, int oscillator, Resonance r);

}  // namespace hybrid
