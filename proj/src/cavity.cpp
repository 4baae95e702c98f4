#include "sideband/cavity.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sideband {

namespace {

constexpr double kCarrierFloor = 1e-12;

void validate(const CavityParams& params) {
    if (params.r0_intensity < 0.0 || params.r0_intensity > 1.0) {
        throw std::invalid_argument("cavity: r0_intensity outside [0,1]");
    }
    if (!(params.bandwidth_mhz > 0.0)) {
        throw std::invalid_argument("cavity: bandwidth must be positive");
    }
    if (!(params.eta > 0.0) || params.eta > 1.0) {
        throw std::invalid_argument("cavity: eta outside (0,1]");
    }
}

// 2x2 action of a complex amplitude coefficient on (p, q).
Eigen::Matrix2d quadrature_map(std::complex<double> c) {
    Eigen::Matrix2d k;
    k << c.real(), -c.imag(),
         c.imag(), c.real();
    return k;
}

}  // namespace

std::complex<double> reflection(const CavityParams& params, double delta) {
    validate(params);
    const double sign = (params.coupling == Coupling::Overcoupled) ? -1.0 : 1.0;
    const double d = sign * std::sqrt(params.r0_intensity);
    const std::complex<double> i(0.0, 1.0);
    return (d + i * delta) / (1.0 + i * delta);
}

double transmission(const CavityParams& params, double delta) {
    const double r2 = std::norm(reflection(params, delta));
    return std::sqrt(std::max(0.0, 1.0 - r2));
}

std::complex<double> effective_reflection(const CavityParams& params, double delta) {
    return (1.0 - params.eta) + params.eta * reflection(params, delta);
}

bool carrier_alive(const CavityParams& params, double delta) {
    return std::abs(effective_reflection(params, delta)) >= kCarrierFloor;
}

SidebandResponse sideband_response(const CavityParams& params, double delta,
                                   double omega_over_gamma) {
    const std::complex<double> rc = effective_reflection(params, delta);
    if (std::abs(rc) < kCarrierFloor) {
        std::ostringstream msg;
        msg << "sideband_response: carrier extinguished at delta=" << delta;
        throw std::domain_error(msg.str());
    }
    const std::complex<double> phase = rc / std::abs(rc);
    SidebandResponse resp;
    // Upper sideband crosses resonance at delta = +omega/gamma.
    resp.r_upper = phase * effective_reflection(params, delta - omega_over_gamma);
    resp.r_lower = phase * effective_reflection(params, delta + omega_over_gamma);
    const double nu = std::norm(resp.r_upper);
    const double nl = std::norm(resp.r_lower);
    resp.g_plus = nu + nl;
    resp.g_minus = nu - nl;
    const std::complex<double> prod = resp.r_upper * resp.r_lower * 0.5;
    resp.g_r = prod.real();
    resp.g_i = prod.imag();
    return resp;
}

TwoModeState apply_cavity_channel(const TwoModeState& state, const CavityParams& params,
                                  double delta, double omega_over_gamma) {
    if (!physicality_check(state).pass) {
        throw std::domain_error("apply_cavity_channel: nonphysical input state");
    }
    const SidebandResponse resp = sideband_response(params, delta, omega_over_gamma);
    Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
    k.block<2, 2>(0, 0) = quadrature_map(resp.r_upper);
    k.block<2, 2>(2, 2) = quadrature_map(resp.r_lower);
    TwoModeState out;
    out.mean = k * state.mean;
    out.cov = k * state.cov * k.transpose();
    out.cov(0, 0) += 1.0 - std::norm(resp.r_upper);
    out.cov(1, 1) += 1.0 - std::norm(resp.r_upper);
    out.cov(2, 2) += 1.0 - std::norm(resp.r_lower);
    out.cov(3, 3) += 1.0 - std::norm(resp.r_lower);
    return out;
}

}  // namespace sideband
