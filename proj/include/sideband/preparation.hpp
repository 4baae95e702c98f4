#pragma once

#include <complex>

#include "sideband/cavity.hpp"
#include "sideband/state.hpp"

namespace sideband {

struct PreparationParams {
    std::complex<double> beta = 0.0;  // EOM displacement, quadrature units
    double kappa = 1.0;               // amplitude attenuation of the lower sideband
    double beta0_sq = 0.0;            // ensemble modulation energy |beta0|^2
};

/// Conjugate-displaced sideband pair: beta on the upper mode, conj(beta) on
/// the lower one. Covariance stays at vacuum.
TwoModeState prepare_psi1(std::complex<double> beta);

/// Pure-loss channel on one mode: mean scaled by kappa, variance excess by
/// kappa^2, cross-mode correlations by kappa.
TwoModeState attenuate_mode(const TwoModeState& state, ModeIndex mode, double kappa);

/// Ensemble of attenuated conjugate displacements with Gaussian-distributed
/// beta, Var(Re beta) = Var(Im beta) = beta0_sq/2. Mean is zero; in the +/-
/// basis Var(p_+) = Var(q_-) = 1 + (1+kappa)^2 beta0_sq and
/// Var(p_-) = Var(q_+) = 1 + (1-kappa)^2 beta0_sq.
TwoModeState randomize_displacement(double kappa, double beta0_sq);

/// Benchmark state with modal energy imbalance E_l/E_u = kappa^2.
TwoModeState prepare_rho(const PreparationParams& params);

/// Balanced reference thermal state (kappa = 1).
TwoModeState prepare_rho_r(double beta0_sq);

/// Attenuation produced by reflecting off a cavity at the given detuning.
double kappa_from_cavity(const CavityParams& params, double delta = 0.0);

}  // namespace sideband
