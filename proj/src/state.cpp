#include "sideband/state.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sideband {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

void require_finite(std::complex<double> z, const char* what) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw std::invalid_argument(std::string(what) + ": amplitude is not finite");
    }
}

}  // namespace

Eigen::Matrix4d symplectic_form() {
    Eigen::Matrix4d sigma = Eigen::Matrix4d::Zero();
    sigma(0, 1) = 1.0;
    sigma(1, 0) = -1.0;
    sigma(2, 3) = 1.0;
    sigma(3, 2) = -1.0;
    return sigma;
}

Eigen::Matrix4d plus_minus_transform() {
    Eigen::Matrix4d t;
    t << kSqrtHalf, 0, kSqrtHalf, 0,
         0, kSqrtHalf, 0, kSqrtHalf,
         kSqrtHalf, 0, -kSqrtHalf, 0,
         0, kSqrtHalf, 0, -kSqrtHalf;
    return t;
}

TwoModeState vacuum() { return TwoModeState{}; }

TwoModeState displace(const TwoModeState& state, std::complex<double> beta_upper,
                      std::complex<double> beta_lower) {
    require_finite(beta_upper, "displace");
    require_finite(beta_lower, "displace");
    TwoModeState out = state;
    out.mean[0] += 2.0 * beta_upper.real();
    out.mean[1] += 2.0 * beta_upper.imag();
    out.mean[2] += 2.0 * beta_lower.real();
    out.mean[3] += 2.0 * beta_lower.imag();
    return out;
}

TwoModeState to_plus_minus(const TwoModeState& state) {
    const Eigen::Matrix4d t = plus_minus_transform();
    TwoModeState out;
    out.mean = t * state.mean;
    out.cov = t * state.cov * t.transpose();
    out.basis = Basis::PlusMinus;
    return out;
}

TwoModeState from_plus_minus(const TwoModeState& state) {
    // The transform is its own inverse.
    TwoModeState out = to_plus_minus(state);
    out.basis = Basis::Sideband;
    return out;
}

double mode_energy(const TwoModeState& state, ModeIndex mode) {
    const int i = (mode == ModeIndex::UpperSideband) ? 0 : 2;
    return 0.5 * (state.cov(i, i) + state.cov(i + 1, i + 1)) - 1.0;
}

EnergySummary energy_summary(const TwoModeState& state) {
    EnergySummary e;
    e.e_upper = mode_energy(state, ModeIndex::UpperSideband);
    e.e_lower = mode_energy(state, ModeIndex::LowerSideband);
    e.sum = e.e_upper + e.e_lower;
    e.imbalance = e.e_upper - e.e_lower;
    return e;
}

HDCoefficients hd_coefficients(const TwoModeState& state) {
    const TwoModeState pm = to_plus_minus(state);
    HDCoefficients c;
    c.a = pm.cov(0, 0) + pm.cov(3, 3);
    c.b = pm.cov(2, 2) + pm.cov(1, 1);
    c.c = pm.cov(0, 1) - pm.cov(2, 3);
    return c;
}

TwoModeState canonical_hd_state(const HDCoefficients& coeffs) {
    const double det4 = coeffs.a * coeffs.b - coeffs.c * coeffs.c;
    const double tol = 1e-9 * std::max(1.0, std::abs(coeffs.a * coeffs.b));
    if (!(coeffs.a > 0.0) || !(coeffs.b > 0.0) || det4 < 4.0 - tol) {
        std::ostringstream msg;
        msg << "canonical_hd_state: coefficients not attainable by a physical state "
            << "(a=" << coeffs.a << ", b=" << coeffs.b << ", c=" << coeffs.c
            << ", need a,b > 0 and a*b - c^2 >= 4, got " << det4 << ")";
        throw std::domain_error(msg.str());
    }
    TwoModeState pm;
    pm.basis = Basis::PlusMinus;
    pm.cov.setZero();
    pm.cov(0, 0) = coeffs.a / 2.0;
    pm.cov(3, 3) = coeffs.a / 2.0;
    pm.cov(2, 2) = coeffs.b / 2.0;
    pm.cov(1, 1) = coeffs.b / 2.0;
    pm.cov(0, 1) = pm.cov(1, 0) = coeffs.c / 2.0;
    pm.cov(2, 3) = pm.cov(3, 2) = -coeffs.c / 2.0;
    return from_plus_minus(pm);
}

PhysicalityReport physicality_check(const TwoModeState& state, double tolerance) {
    const double asym = (state.cov - state.cov.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, state.cov.cwiseAbs().maxCoeff());
    if (asym > 1e-9 * scale) {
        throw std::invalid_argument("physicality_check: covariance is not symmetric");
    }
    const std::complex<double> i(0.0, 1.0);
    Eigen::Matrix4cd h = state.cov.cast<std::complex<double>>() + i * symplectic_form();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(h);
    PhysicalityReport report;
    report.margin = solver.eigenvalues().minCoeff();
    report.pass = report.margin >= -tolerance;
    return report;
}

double purity(const TwoModeState& state) {
    const double det = state.cov.determinant();
    if (!(det > 1e-300)) {
        throw std::domain_error("purity: singular covariance matrix");
    }
    return 1.0 / std::sqrt(det);
}

SingleModeMarginal single_mode_marginal(const TwoModeState& state, ModeIndex mode) {
    const int i = (mode == ModeIndex::UpperSideband) ? 0 : 2;
    SingleModeMarginal m;
    m.mean = state.mean.segment<2>(i);
    m.cov = state.cov.block<2, 2>(i, i);
    return m;
}

double wigner_eval(const SingleModeMarginal& marginal, double p, double q) {
    const double det = marginal.cov.determinant();
    if (!(det > 1e-300)) {
        throw std::domain_error("wigner_eval: singular marginal covariance");
    }
    Eigen::Vector2d d(p - marginal.mean[0], q - marginal.mean[1]);
    const double quad = d.dot(marginal.cov.inverse() * d);
    return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
}

}  // namespace sideband
