#include "hybrid/core.hpp"

#include "hybrid/error.hpp"

#include <cmath>
#include <string>

namespace hybrid {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SingularAmplitude: return "SingularAmplitude";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::StepCollapse: return "StepCollapse";
        case ErrorCode::StepTooCoarse: return "StepTooCoarse";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::FoldCountUnexpected: return "FoldCountUnexpected";
        case ErrorCode::MissingFolds: return "MissingFolds";
        case ErrorCode::MissingFeature: return "MissingFeature";
        case ErrorCode::DegenerateFeature: return "DegenerateFeature";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::TooManyRejections: return "TooManyRejections";
        case ErrorCode::SweepFeatureMismatch: return "SweepFeatureMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

void SystemParams::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (!(omega0 > 0.0)) fail("omega0 must be positive");
    if (!(d >= 0.0)) fail("damping d must be non-negative");
    if (!(delta >= 0.0)) fail("coupling delta must be non-negative");
    if (!(f >= 0.0)) fail("forcing f must be non-negative");
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
    if (!std::isfinite(beta)) fail("beta must be finite");
}

ModalFrequencies modal_frequencies(const SystemParams& p) {
    ModalFrequencies m;
    m.omega1 = p.omega0;
    m.omega2 = std::sqrt(p.omega0 * p.omega0 + 2.0 * p.delta);
    m.sigma2 = (m.omega2 - m.omega1) / p.epsilon;
    return m;
}

double excitation_frequency(const SystemParams& p, double sigma1) {
    return p.omega0 + p.epsilon * sigma1;
}

double detuning_of(const SystemParams& p, double omega) {
    return (omega - p.omega0) / p.epsilon;
}

ModulationState canonicalize(ModulationState s) {
    if (s.a1 < 0.0) {
        s.a1 = -s.a1;
        s.gamma1 += kPi;
    }
    if (s.a2 < 0.0) {
        s.a2 = -s.a2;
        s.gamma2 += kPi;
    }
    return s;
}

double angle_distance(double a, double b) {
    double r = std::remainder(a - b, 2.0 * kPi);
    return std::abs(r);
}

namespace {

struct Coefficients {
    double w1, w2, s2;
    double mu;
    double k1, k2;          // forcing f / (4 w)
    double self1, cross1;   // 3 beta / (8 w1), 3 beta / (4 w1)
    double self2, cross2;
};

Coefficients coefficients(const SystemParams& p) {
    const auto m = modal_frequencies(p);
    Coefficients c{};
    c.w1 = m.omega1;
    c.w2 = m.omega2;
    c.s2 = m.sigma2;
    c.mu = 0.5 * p.d;
    c.k1 = p.f / (4.0 * c.w1);
    c.k2 = p.f / (4.0 * c.w2);
    c.self1 = 3.0 * p.beta / (8.0 * c.w1);
    c.cross1 = 3.0 * p.beta / (4.0 * c.w1);
    c.self2 = 3.0 * p.beta / (8.0 * c.w2);
    c.cross2 = 3.0 * p.beta / (4.0 * c.w2);
    return c;
}

void require_amplitudes(const ModulationState& s, double floor) {
    if (!(s.a1 > floor) || !(s.a2 > floor)) {
        throw Error(ErrorCode::SingularAmplitude,
                    "modal amplitude at or below floor (a1=" + std::to_string(s.a1) +
                        ", a2=" + std::to_string(s.a2) + ")");
    }
}

}  // namespace

Vec4 modulation_rhs(const ModulationState& s, const SystemParams& p, double sigma1, double amplitude_floor) {
    require_amplitudes(s, amplitude_floor);
    const auto c = coefficients(p);
    const double a1sq = s.a1 * s.a1;
    const double a2sq = s.a2 * s.a2;
    Vec4 r;
    r[0] = -c.mu * s.a1 + c.k1 * std::sin(s.gamma1);
    r[1] = sigma1 - c.self1 * a1sq - c.cross1 * a2sq + c.k1 * std::cos(s.gamma1) / s.a1;
    r[2] = -c.mu * s.a2 + c.k2 * std::sin(s.gamma2);
    r[3] = sigma1 - c.s2 - c.self2 * a2sq - c.cross2 * a1sq + c.k2 * std::cos(s.gamma2) / s.a2;
    return r;
}

SteadyEvaluation steady_residual_jacobian(const ModulationState& s, const SystemParams& p, double sigma1,
                                          double amplitude_floor) {
    SteadyEvaluation out;
    out.residual = modulation_rhs(s, p, sigma1, amplitude_floor);
    const auto c = coefficients(p);
    const double c1 = std::cos(s.gamma1), s1 = std::sin(s.gamma1);
    const double c2 = std::cos(s.gamma2), s2 = std::sin(s.gamma2);

    Mat4& J = out.jacobian;
    J.setZero();
    J(0, 0) = -c.mu;
    J(0, 1) = c.k1 * c1;

    J(1, 0) = -2.0 * c.self1 * s.a1 - c.k1 * c1 / (s.a1 * s.a1);
    J(1, 1) = -c.k1 * s1 / s.a1;
    J(1, 2) = -2.0 * c.cross1 * s.a2;

    J(2, 2) = -c.mu;
    J(2, 3) = c.k2 * c2;

    J(3, 0) = -2.0 * c.cross2 * s.a1;
    J(3, 2) = -2.0 * c.self2 * s.a2 - c.k2 * c2 / (s.a2 * s.a2);
    J(3, 3) = -c.k2 * s2 / s.a2;
    return out;
}

PhysicalResponse reconstruct_physical(const ModulationState& s) {
    const double c1 = s.a1 * std::cos(s.gamma1) + s.a2 * std::cos(s.gamma2);
    const double c2 = s.a1 * std::sin(s.gamma1) + s.a2 * std::sin(s.gamma2);
    const double c3 = s.a1 * std::cos(s.gamma1) - s.a2 * std::cos(s.gamma2);
    const double c4 = s.a1 * std::sin(s.gamma1) - s.a2 * std::sin(s.gamma2);
    PhysicalResponse r;
    r.u1 = std::hypot(c1, c2);
    r.u2 = std::hypot(c3, c4);
    r.Gamma1 = std::atan2(c2, c1);
    r.Gamma2 = std::atan2(c4, c3);
    return r;
}

Eigen::Vector2d physical_amplitude_derivative(const ModulationState& s, const Vec4& ds) {
    const double cg1 = std::cos(s.gamma1), sg1 = std::sin(s.gamma1);
    const double cg2 = std::cos(s.gamma2), sg2 = std::sin(s.gamma2);
    const double x1 = s.a1 * cg1, y1 = s.a1 * sg1;
    const double x2 = s.a2 * cg2, y2 = s.a2 * sg2;
    const double dx1 = cg1 * ds[0] - y1 * ds[1];
    const double dy1 = sg1 * ds[0] + x1 * ds[1];
    const double dx2 = cg2 * ds[2] - y2 * ds[3];
    const double dy2 = sg2 * ds[2] + x2 * ds[3];

    const double c1 = x1 + x2, c2 = y1 + y2, c3 = x1 - x2, c4 = y1 - y2;
    const double u1 = std::hypot(c1, c2);
    const double u2 = std::hypot(c3, c4);
    Eigen::Vector2d du;
    du[0] = u1 > 0.0 ? (c1 * (dx1 + dx2) + c2 * (dy1 + dy2)) / u1 : 0.0;
    du[1] = u2 > 0.0 ? (c3 * (dx1 - dx2) + c4 * (dy1 - dy2)) / u2 : 0.0;
    return du;
}

double linear_amplitude_oracle(const SystemParams& p, double sigma1) {
    if (p.beta != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "linear amplitude oracle requires beta = 0");
    }
    const double w1 = modal_frequencies(p).omega1;
    return p.f / (2.0 * w1 * std::sqrt(p.d * p.d + 4.0 * sigma1 * sigma1));
}

Vec4 cartesian_slow_flow(const Vec4& pq, const SystemParams& p, double sigma1) {
    const auto c = coefficients(p);
    const double a1sq = pq[0] * pq[0] + pq[1] * pq[1];
    const double a2sq = pq[2] * pq[2] + pq[3] * pq[3];
    const double nu1 = sigma1 - c.self1 * a1sq - c.cross1 * a2sq;
    const double nu2 = sigma1 - c.s2 - c.self2 * a2sq - c.cross2 * a1sq;
    Vec4 r;
    r[0] = -c.mu * pq[0] - nu1 * pq[1];
    r[1] = -c.mu * pq[1] + nu1 * pq[0] + c.k1;
    r[2] = -c.mu * pq[2] - nu2 * pq[3];
    r[3] = -c.mu * pq[3] + nu2 * pq[2] + c.k2;
    return r;
}

ModulationState from_cartesian(const Vec4& pq) {
    return {std::hypot(pq[0], pq[1]), std::atan2(pq[1], pq[0]), std::hypot(pq[2], pq[3]),
            std::atan2(pq[3], pq[2])};
}

Vec4 to_cartesian(const ModulationState& s) {
    return {s.a1 * std::cos(s.gamma1), s.a1 * std::sin(s.gamma1), s.a2 * std::cos(s.gamma2),
            s.a2 * std::sin(s.gamma2)};
}

}  // namespace hybrid
