#include "hybrid/continuation.hpp"

#include "hybrid/error.hpp"
#include "hybrid/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace hybrid {

const char* to_string(JumpKind k) noexcept {
    return k == JumpKind::jump_down ? "jump-down" : "jump-up";
}

const char* to_string(Resonance r) noexcept {
    return r == Resonance::first ? "first" : "second";
}

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

constexpr ArclengthScaling kScale{};

Vec5 to_scaled(const ModulationState& s, double sigma1) {
    Vec5 w;
    w << s.a1 * kScale.amplitude, s.gamma1 * kScale.phase, s.a2 * kScale.amplitude, s.gamma2 * kScale.phase,
        sigma1 * kScale.sigma;
    return w;
}

ModulationState state_of(const Vec5& w) {
    return {w[0] / kScale.amplitude, w[1] / kScale.phase, w[2] / kScale.amplitude, w[3] / kScale.phase};
}

double sigma_of(const Vec5& w) { return w[4] / kScale.sigma; }

struct CorrectorResult {
    bool converged = false;
    Vec5 w = Vec5::Zero();
    int iterations = 0;
};

// Newton on [r(x, sigma) = 0; n . (w - w_pred) = 0] in scaled coordinates.
CorrectorResult correct(const SystemParams& p, const Vec5& start, const Vec5& w_pred, const Vec5& normal,
                        double tol, int max_iterations) {
    CorrectorResult out;
    Vec5 w = start;
    const Vec4 inv_scale(1.0 / kScale.amplitude, 1.0 / kScale.phase, 1.0 / kScale.amplitude, 1.0 / kScale.phase);
    for (int it = 0; it <= max_iterations; ++it) {
        SteadyEvaluation ev;
        try {
            ev = steady_residual_jacobian(state_of(w), p, sigma_of(w));
        } catch (const Error&) {
            return out;
        }
        const double constraint = normal.dot(w - w_pred);
        if (!ev.residual.allFinite()) return out;
        if (ev.residual.lpNorm<Eigen::Infinity>() < tol && std::abs(constraint) < tol) {
            out.converged = true;
            out.w = w;
            out.iterations = it;
            return out;
        }
        if (it == max_iterations) break;

        Mat5 A;
        A.block<4, 4>(0, 0) = ev.jacobian * inv_scale.asDiagonal();
        A.block<4, 1>(0, 4) = rhs_sigma_derivative() / kScale.sigma;
        A.row(4) = normal.transpose();
        Vec5 F;
        F.head<4>() = ev.residual;
        F[4] = constraint;
        const Vec5 dw = A.partialPivLu().solve(-F);
        if (!dw.allFinite()) return out;
        w += dw;
    }
    return out;
}

double jacobian_determinant(const ModulationState& s, const SystemParams& p, double sigma1) {
    return steady_residual_jacobian(s, p, sigma1).jacobian.determinant();
}

BranchPoint make_point(const ModulationState& s, const SystemParams& p, double sigma1, double arclength) {
    BranchPoint bp;
    bp.sigma1 = sigma1;
    bp.state = s;
    bp.response = reconstruct_physical(s);
    bp.arclength = arclength;
    bp.stable = classify_stability(bp, p);
    return bp;
}

// Refines a fold between two branch points by bisecting det(J) along their chord.
FoldPoint refine_fold(const SystemParams& p, const BranchPoint& a, const BranchPoint& b) {
    const Vec5 wa = to_scaled(a.state, a.sigma1);
    const Vec5 wb = to_scaled(b.state, b.sigma1);
    const Vec5 chord = wb - wa;
    const double length = chord.norm();
    const Vec5 normal = chord / length;

    const double det_a = jacobian_determinant(a.state, p, a.sigma1);
    double lo = 0.0, hi = 1.0;
    Vec5 best = (std::abs(det_a) < std::abs(jacobian_determinant(b.state, p, b.sigma1))) ? wa : wb;
    const bool sign_a = det_a > 0.0;

    while ((hi - lo) * length > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        const Vec5 w_pred = wa + mid * chord;
        const auto res = correct(p, w_pred, w_pred, normal, 1e-12, 30);
        if (!res.converged) break;
        best = res.w;
        const double det_mid = jacobian_determinant(state_of(res.w), p, sigma_of(res.w));
        if ((det_mid > 0.0) == sign_a) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    FoldPoint fp;
    fp.state = state_of(best);
    fp.sigma1 = sigma_of(best);
    const auto r = reconstruct_physical(fp.state);
    fp.u1 = r.u1;
    fp.u2 = r.u2;
    return fp;
}

void label_pair(FoldPoint& x, FoldPoint& y, Resonance res) {
    x.resonance = y.resonance = res;
    // the jump-down fold ends the upper branch: larger amplitude of the resonating mode
    const bool first = res == Resonance::first;
    if ((first ? x.state.a1 : x.state.a2) >= (first ? y.state.a1 : y.state.a2)) {
        x.kind = JumpKind::jump_down;
        y.kind = JumpKind::jump_up;
    } else {
        x.kind = JumpKind::jump_up;
        y.kind = JumpKind::jump_down;
    }
}

}  // namespace

std::optional<ModulationState> solve_steady(const SystemParams& p, double sigma1, ModulationState guess,
                                            const NewtonOptions& opts) {
    ModulationState x = canonicalize(guess);
    auto residual_norm = [&](const ModulationState& s) -> double {
        try {
            return modulation_rhs(s, p, sigma1).norm();
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    double norm = residual_norm(x);
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (!std::isfinite(norm)) return std::nullopt;
        if (norm < opts.tolerance) return x;
        const auto ev = steady_residual_jacobian(x, p, sigma1);
        const Vec4 dx = ev.jacobian.partialPivLu().solve(-ev.residual);
        if (!dx.allFinite()) return std::nullopt;

        double lambda = 1.0;
        ModulationState trial;
        double trial_norm = std::numeric_limits<double>::infinity();
        while (lambda > 1.0 / 4096.0) {
            trial = canonicalize(ModulationState::from_vector(x.as_vector() + lambda * dx));
            trial_norm = residual_norm(trial);
            if (trial_norm < (1.0 - 1e-4 * lambda) * norm) break;
            lambda *= 0.5;
        }
        if (!std::isfinite(trial_norm)) return std::nullopt;
        x = trial;
        norm = trial_norm;
    }
    if (norm < opts.tolerance) return x;
    return std::nullopt;
}

ModulationState initial_point(const SystemParams& p, double sigma1_start) {
    p.validate();
    if (!(p.f > 0.0)) {
        throw Error(ErrorCode::NoConvergence, "unforced system: the only steady state is the trivial a = 0");
    }
    const double sigma2 = modal_frequencies(p).sigma2;
    const double rate_scale = 1.0 + std::abs(sigma1_start) + std::abs(sigma1_start - sigma2) + std::abs(p.beta);
    const double dt = std::min(0.05, 0.5 / rate_scale);
    const double t_max = (p.d > 0.0) ? std::min(4000.0, 60.0 / p.d) : 400.0;

    auto relax = [&](Vec4 pq) {
        for (double t = 0.0; t < t_max; t += dt) {
            const Vec4 k1 = cartesian_slow_flow(pq, p, sigma1_start);
            if (k1.lpNorm<Eigen::Infinity>() < 1e-11) break;
            const Vec4 k2 = cartesian_slow_flow(pq + 0.5 * dt * k1, p, sigma1_start);
            const Vec4 k3 = cartesian_slow_flow(pq + 0.5 * dt * k2, p, sigma1_start);
            const Vec4 k4 = cartesian_slow_flow(pq + dt * k3, p, sigma1_start);
            pq += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!pq.allFinite()) break;
        }
        return pq;
    };

    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> amp(0.01, 0.5), phase(-kPi, kPi);
    Vec4 seed(1e-3, 0.0, 1e-3, 0.0);
    for (int attempt = 0; attempt < 8; ++attempt) {
        const Vec4 relaxed = relax(seed);
        if (relaxed.allFinite()) {
            const auto guess = from_cartesian(relaxed);
            if (guess.a1 > 1e-9 && guess.a2 > 1e-9) {
                if (auto x = solve_steady(p, sigma1_start, guess, {1e-12, 100})) return *x;
            }
        }
        const double r1 = amp(rng), r2 = amp(rng), g1 = phase(rng), g2 = phase(rng);
        seed = Vec4(r1 * std::cos(g1), r1 * std::sin(g1), r2 * std::cos(g2), r2 * std::sin(g2));
    }
    throw Error(ErrorCode::NoConvergence,
                "no steady state found at sigma1=" + std::to_string(sigma1_start) + " after damped retries");
}

std::pair<double, double> default_window(const SystemParams& p) {
    return {-15.0, modal_frequencies(p).sigma2 + 15.0};
}

double stability_margin(const ModulationState& s, const SystemParams& p, double sigma1) {
    const auto ev = steady_residual_jacobian(s, p, sigma1);
    Eigen::EigenSolver<Mat4> solver(ev.jacobian, false);
    return solver.eigenvalues().real().maxCoeff();
}

bool classify_stability(const BranchPoint& point, const SystemParams& p, double tolerance) {
    const double margin = stability_margin(point.state, p, point.sigma1);
    if (std::abs(margin) <= tolerance) {
        log::debug("marginal stability at sigma1=" + std::to_string(point.sigma1) + ", flagged unstable");
        return false;
    }
    return margin < -tolerance;
}

Vec4 state_sigma_derivative(const ModulationState& s, const SystemParams& p, double sigma1) {
    const auto ev = steady_residual_jacobian(s, p, sigma1);
    return ev.jacobian.partialPivLu().solve(-rhs_sigma_derivative());
}

ResponseBranch trace_branch(const SystemParams& p, double sigma1_min, double sigma1_max,
                            const StepControls& controls) {
    p.validate();
    if (!(sigma1_min < sigma1_max)) {
        throw Error(ErrorCode::InvalidArgument, "sigma1_min must be below sigma1_max");
    }

    ResponseBranch branch;
    branch.params = p;

    const ModulationState x0 = initial_point(p, sigma1_min);
    branch.points.push_back(make_point(x0, p, sigma1_min, 0.0));

    Vec5 w = to_scaled(x0, sigma1_min);
    Vec5 tangent;
    {
        const Vec4 dx = state_sigma_derivative(x0, p, sigma1_min);
        tangent = to_scaled(ModulationState::from_vector(dx), 1.0);
        tangent.normalize();
        if (tangent[4] < 0.0) tangent = -tangent;
    }

    double h = controls.initial_step;
    double arclength = 0.0;
    while (true) {
        if (branch.points.size() >= controls.max_points) {
            throw Error(ErrorCode::NoConvergence, "continuation exceeded the point budget before leaving the window");
        }
        const Vec5 w_pred = w + h * tangent;
        const auto res = correct(p, w_pred, w_pred, tangent, controls.corrector_tolerance,
                                 controls.max_corrector_iterations);
        bool accepted = res.converged;
        Vec5 secant = Vec5::Zero();
        double length = 0.0;
        if (accepted) {
            secant = res.w - w;
            length = secant.norm();
            accepted = length > 0.0 && (secant / length).dot(tangent) >= controls.min_tangent_cosine;
        }
        if (!accepted) {
            h *= 0.5;
            if (h < controls.min_step) {
                throw Error(ErrorCode::StepCollapse, "continuation step fell below " +
                                                         std::to_string(controls.min_step) + " near sigma1=" +
                                                         std::to_string(sigma_of(w)));
            }
            continue;
        }

        const double sigma_new = sigma_of(res.w);
        if (sigma_new >= sigma1_max) {
            // Close the branch exactly on the window edge.
            const double frac = (sigma1_max - sigma_of(w)) / (sigma_new - sigma_of(w));
            const Vec5 guess = w + frac * (res.w - w);
            if (auto x = solve_steady(p, sigma1_max, state_of(guess), {controls.corrector_tolerance, 60})) {
                // keep the phase on the continuous lift of the branch
                ModulationState s = *x;
                const ModulationState g = state_of(guess);
                s.gamma1 = g.gamma1 + std::remainder(s.gamma1 - g.gamma1, 2.0 * kPi);
                s.gamma2 = g.gamma2 + std::remainder(s.gamma2 - g.gamma2, 2.0 * kPi);
                arclength += (to_scaled(s, sigma1_max) - w).norm();
                branch.points.push_back(make_point(s, p, sigma1_max, arclength));
            }
            break;
        }

        arclength += length;
        branch.points.push_back(make_point(state_of(res.w), p, sigma_new, arclength));
        w = res.w;
        tangent = secant / length;
        if (res.iterations <= controls.fast_convergence_iterations) {
            h = std::min(2.0 * h, controls.max_step);
        }
    }

    branch.folds = detect_folds(branch);
    return branch;
}

std::vector<FoldPoint> detect_folds(const ResponseBranch& branch) {
    const auto& pts = branch.points;
    const auto& p = branch.params;
    std::vector<FoldPoint> folds;
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
        const double before = pts[k].sigma1 - pts[k - 1].sigma1;
        const double after = pts[k + 1].sigma1 - pts[k].sigma1;
        if (!(before * after < 0.0)) continue;

        const bool s0 = jacobian_determinant(pts[k - 1].state, p, pts[k - 1].sigma1) > 0.0;
        const bool s1 = jacobian_determinant(pts[k].state, p, pts[k].sigma1) > 0.0;
        const bool s2 = jacobian_determinant(pts[k + 1].state, p, pts[k + 1].sigma1) > 0.0;
        if (s0 != s1) {
            folds.push_back(refine_fold(p, pts[k - 1], pts[k]));
        } else if (s1 != s2) {
            folds.push_back(refine_fold(p, pts[k], pts[k + 1]));
        } else {
            log::warn("turning point without determinant sign change near sigma1=" + std::to_string(pts[k].sigma1));
            FoldPoint fp;
            fp.sigma1 = pts[k].sigma1;
            fp.state = pts[k].state;
            fp.u1 = pts[k].response.u1;
            fp.u2 = pts[k].response.u2;
            folds.push_back(fp);
        }
    }

    // Detection order is arclength order: the branch turns back at a resonance's
    // jump-down fold and forward again at its jump-up fold, so consecutive folds
    // pair up. Grouping by the widest sigma1 gap fails once the first bistable
    // interval is wider than the spacing of the resonances (small d, large f).
    const std::size_t n = folds.size();
    if (n % 2 == 1 || n > 4) {
        throw Error(ErrorCode::FoldCountUnexpected, "found " + std::to_string(n) + " folds");
    }
    if (n == 2) {
        const double a1 = folds[0].state.a1 + folds[1].state.a1;
        const double a2 = folds[0].state.a2 + folds[1].state.a2;
        label_pair(folds[0], folds[1], a1 >= a2 ? Resonance::first : Resonance::second);
    } else if (n == 4) {
        label_pair(folds[0], folds[1], Resonance::first);
        label_pair(folds[2], folds[3], Resonance::second);
        if (std::max(folds[0].sigma1, folds[1].sigma1) > std::min(folds[2].sigma1, folds[3].sigma1)) {
            log::warn("bistable intervals of the two resonances overlap");
        }
    }
    std::sort(folds.begin(), folds.end(), [](const FoldPoint& a, const FoldPoint& b) { return a.sigma1 < b.sigma1; });
    return folds;
}

int fold_count(const ResponseBranch& branch, Resonance resonance) {
    return static_cast<int>(std::count_if(branch.folds.begin(), branch.folds.end(),
                                          [&](const FoldPoint& f) { return f.resonance == resonance; }));
}

std::optional<FlankPoint> steepest_flank(const ResponseBranch& branch, Resonance resonance) {
    const auto& p = branch.params;
    const auto& pts = branch.points;
    const int mode = resonance == Resonance::first ? 0 : 2;
    const int other = resonance == Resonance::first ? 2 : 0;

    auto slope_at = [&](const ModulationState& s, double sigma1) {
        return state_sigma_derivative(s, p, sigma1)[mode];
    };

    std::size_t best = pts.size();
    double best_slope = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& pt = pts[k];
        if (!pt.stable) continue;
        const Vec4 v = pt.state.as_vector();
        if (!(v[mode] > v[other])) continue;
        const double s = slope_at(pt.state, pt.sigma1);
        if (s < best_slope) {
            best_slope = s;
            best = k;
        }
    }
    if (best == pts.size()) return std::nullopt;

    // Golden-section refinement of the steepest point between the neighbours.
    double lo = pts[best > 0 ? best - 1 : best].sigma1;
    double hi = pts[best + 1 < pts.size() ? best + 1 : best].sigma1;
    ModulationState anchor = pts[best].state;
    double sigma_best = pts[best].sigma1;
    ModulationState state_best = anchor;

    if (lo < hi) {
        auto evaluate = [&](double sigma, ModulationState& out) -> double {
            auto x = solve_steady(p, sigma, anchor, {1e-12, 60});
            if (!x) return std::numeric_limits<double>::infinity();
            out = *x;
            return slope_at(*x, sigma);
        };
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
        ModulationState sc, sd;
        double fc = evaluate(c, sc), fd = evaluate(d, sd);
        while (hi - lo > 1e-9) {
            if (fc < fd) {
                hi = d;
                d = c;
                fd = fc;
                sd = sc;
                c = hi - g * (hi - lo);
                fc = evaluate(c, sc);
            } else {
                lo = c;
                c = d;
                fc = fd;
                sc = sd;
                d = lo + g * (hi - lo);
                fd = evaluate(d, sd);
            }
        }
        const double f_mid = std::min(fc, fd);
        if (std::isfinite(f_mid) && f_mid <= best_slope) {
            sigma_best = fc < fd ? c : d;
            state_best = fc < fd ? sc : sd;
        }
    }

    FlankPoint fp;
    fp.sigma1 = sigma_best;
    fp.state = state_best;
    fp.response = reconstruct_physical(state_best);
    fp.slope = physical_amplitude_derivative(state_best, state_sigma_derivative(state_best, p, sigma_best));
    fp.resonance = resonance;
    return fp;
}

}  // namespace hybrid
