#include "sideband/preparation.hpp"

#include <cmath>
#include <stdexcept>

namespace sideband {

TwoModeState prepare_psi1(std::complex<double> beta) {
    return displace(vacuum(), beta, std::conj(beta));
}

TwoModeState attenuate_mode(const TwoModeState& state, ModeIndex mode, double kappa) {
    if (kappa < 0.0 || kappa > 1.0) {
        throw std::invalid_argument("attenuate_mode: kappa outside [0,1]");
    }
    if (!physicality_check(state).pass) {
        throw std::domain_error("attenuate_mode: nonphysical input state");
    }
    const int i = (mode == ModeIndex::UpperSideband) ? 0 : 2;
    const int j = 2 - i;  // the untouched mode
    TwoModeState out = state;
    out.mean.segment<2>(i) *= kappa;
    out.cov.block<2, 2>(i, i) = kappa * kappa * state.cov.block<2, 2>(i, i) +
                                (1.0 - kappa * kappa) * Eigen::Matrix2d::Identity();
    out.cov.block<2, 2>(i, j) *= kappa;
    out.cov.block<2, 2>(j, i) *= kappa;
    return out;
}

TwoModeState randomize_displacement(double kappa, double beta0_sq) {
    if (kappa < 0.0 || kappa > 1.0) {
        throw std::invalid_argument("randomize_displacement: kappa outside [0,1]");
    }
    if (beta0_sq < 0.0) {
        throw std::invalid_argument("randomize_displacement: beta0_sq must be >= 0");
    }
    // Mean vector of the attenuated conjugate displacement is linear in
    // (Re beta, Im beta); averaging over the Gaussian ensemble adds
    // (beta0_sq/2) L L^T of classical noise on top of vacuum.
    Eigen::Matrix<double, 4, 2> l;
    l << 2.0, 0.0,
         0.0, 2.0,
         2.0 * kappa, 0.0,
         0.0, -2.0 * kappa;
    TwoModeState out;
    out.cov = Eigen::Matrix4d::Identity() + (beta0_sq / 2.0) * (l * l.transpose());
    return out;
}

TwoModeState prepare_rho(const PreparationParams& params) {
    return randomize_displacement(params.kappa, params.beta0_sq);
}

TwoModeState prepare_rho_r(double beta0_sq) {
    return randomize_displacement(1.0, beta0_sq);
}

double kappa_from_cavity(const CavityParams& params, double delta) {
    return std::abs(effective_reflection(params, delta));
}

}  // namespace sideband
