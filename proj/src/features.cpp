#include "hybrid/features.hpp"

#include "hybrid/error.hpp"

#include <algorithm>
#include <random>

namespace hybrid {

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = [] {
        std::array<std::string, kFeatureCount> n;
        for (int i = 1; i <= 2; ++i) {
            const std::string osc = std::to_string(i);
            for (int j = 1; j <= 4; ++j) {
                n[freq_index(i, j)] = "f" + osc + std::to_string(j);
                n[amp_index(i, j)] = "p" + osc + std::to_string(j);
            }
            for (int r = 1; r <= 2; ++r) n[slope_index(i, r)] = "alpha" + osc + std::to_string(r);
        }
        return n;
    }();
    return names;
}

std::size_t feature_index(std::string_view name) {
    const auto& names = feature_names();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::InvalidArgument, "unknown feature '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names.begin());
}

const char* to_string(MonostablePolicy p) noexcept {
    return p == MonostablePolicy::reject ? "reject" : "steepest_flank";
}

MonostablePolicy parse_policy(const std::string& s) {
    if (s == "reject") return MonostablePolicy::reject;
    if (s == "steepest_flank") return MonostablePolicy::steepest_flank;
    throw Error(ErrorCode::InvalidArgument, "monostable policy must be 'reject' or 'steepest_flank', got '" + s + "'");
}

bool FeatureVector::all_valid() const {
    return std::all_of(valid.begin(), valid.end(), [](bool b) { return b; });
}

double secant_slope(const FeatureVector& v, int oscillator, Resonance r) {
    const auto [down, up] = jump_points(r);
    const double df = v[freq_index(oscillator, down)] - v[freq_index(oscillator, up)];
    return (v[amp_index(oscillator, down)] - v[amp_index(oscillator, up)]) / df;
}

namespace {

void set_point(FeatureVector& v, int point, double sigma1, double u1, double u2) {
    v.values[freq_index(1, point)] = sigma1;
    v.values[freq_index(2, point)] = sigma1;
    v.values[amp_index(1, point)] = u1;
    v.values[amp_index(2, point)] = u2;
    for (int i = 1; i <= 2; ++i) {
        v.valid[freq_index(i, point)] = true;
        v.valid[amp_index(i, point)] = true;
    }
}

}  // namespace

FeatureVector extract(const ResponseBranch& branch, MonostablePolicy policy) {
    FeatureVector v;
    for (const Resonance r : {Resonance::first, Resonance::second}) {
        const auto [down, up] = jump_points(r);
        const int ri = r == Resonance::first ? 1 : 2;
        const FoldPoint* jd = nullptr;
        const FoldPoint* ju = nullptr;
        for (const auto& f : branch.folds) {
            if (f.resonance != r) continue;
            (f.kind == JumpKind::jump_down ? jd : ju) = &f;
        }
        if (jd && ju) {
            set_point(v, down, jd->sigma1, jd->u1, jd->u2);
            set_point(v, up, ju->sigma1, ju->u1, ju->u2);
            for (int i = 1; i <= 2; ++i) {
                v.values[slope_index(i, ri)] = secant_slope(v, i, r);
                v.valid[slope_index(i, ri)] = true;
            }
            continue;
        }
        // the flank stands in for a fold pair that has merged past the cusp; a linear
        // branch never had one
        if (policy == MonostablePolicy::reject || branch.params.beta == 0.0) {
            throw Error(ErrorCode::MissingFolds,
                        std::string("no fold pair at the ") + to_string(r) + " resonance");
        }
        const auto flank = steepest_flank(branch, r);
        if (!flank) {
            throw Error(ErrorCode::MissingFolds,
                        std::string("no fold pair and no descending flank at the ") + to_string(r) + " resonance");
        }
        v.kinds[static_cast<std::size_t>(ri - 1)] = ResonanceKind::monostable;
        set_point(v, down, flank->sigma1, flank->response.u1, flank->response.u2);
        set_point(v, up, flank->sigma1, flank->response.u1, flank->response.u2);
        for (int i = 1; i <= 2; ++i) {
            v.values[slope_index(i, ri)] = flank->slope[i - 1];
            v.valid[slope_index(i, ri)] = true;
        }
    }
    return v;
}

FeatureVector inject_noise(const FeatureVector& v, const NoiseConfig& noise, std::uint64_t seed) {
    if (noise.sigma_rel < 0.0 || noise.sigma_abs < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "noise levels must be non-negative");
    }
    FeatureVector out = v;
    if (noise.sigma_rel == 0.0 && noise.sigma_abs == 0.0) return out;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (const Resonance r : {Resonance::first, Resonance::second}) {
        const auto [down, up] = jump_points(r);
        const int ri = r == Resonance::first ? 1 : 2;
        const bool mono = v.kinds[static_cast<std::size_t>(ri - 1)] == ResonanceKind::monostable;
        for (int i = 1; i <= 2; ++i) {
            for (const int point : {down, up}) {
                if (mono && point == up) {
                    out.values[freq_index(i, up)] = out.values[freq_index(i, down)];
                    out.values[amp_index(i, up)] = out.values[amp_index(i, down)];
                    continue;
                }
                out.values[freq_index(i, point)] += noise.sigma_abs * unit(rng);
                out.values[amp_index(i, point)] *= 1.0 + noise.sigma_rel * unit(rng);
            }
            const std::size_t s = slope_index(i, ri);
            out.values[s] = mono ? v.values[s] * (1.0 + noise.sigma_rel * unit(rng)) : secant_slope(out, i, r);
        }
    }
    return out;
}

}  // namespace hybrid
