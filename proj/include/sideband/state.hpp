#pragma once

#include <Eigen/Dense>
#include <complex>

namespace sideband {

/// Which of the two spectral sideband modes around the carrier.
enum class ModeIndex { UpperSideband, LowerSideband };

/// Quadrature ordering of a TwoModeState.
/// Sideband: (p_u, q_u, p_l, q_l). PlusMinus: (p_+, q_+, p_-, q_-).
enum class Basis { Sideband, PlusMinus };

/// Gaussian state of the two-sideband pair: mean vector and symmetric
/// covariance matrix in vacuum-normalized quadrature units (vacuum = I).
struct TwoModeState {
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
    Basis basis = Basis::Sideband;
};

/// The three coefficients visible to a homodyne phase scan:
/// a = Var(p_+) + Var(q_-), b = Var(p_-) + Var(q_+),
/// c = C(p_+,q_+) - C(p_-,q_-).
struct HDCoefficients {
    double a = 2.0;
    double b = 2.0;
    double c = 0.0;
};

/// Per-mode fluctuation energies E = (Var p + Var q)/2 - 1.
struct EnergySummary {
    double e_upper = 0.0;
    double e_lower = 0.0;
    double sum = 0.0;
    double imbalance = 0.0;  // e_upper - e_lower
};

struct PhysicalityReport {
    bool pass = false;
    double margin = 0.0;  // min eigenvalue of cov + i*Sigma
};

/// Mean and covariance of one mode's (p, q) marginal.
struct SingleModeMarginal {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

/// Block-diagonal symplectic form, per-mode blocks [[0,1],[-1,0]].
Eigen::Matrix4d symplectic_form();

/// Orthogonal (and symplectic) matrix taking sideband-ordered quadratures
/// to the +/- combinations. Its own inverse.
Eigen::Matrix4d plus_minus_transform();

TwoModeState vacuum();

/// Displace each mode; mean convention <p> = 2 Re(beta), <q> = 2 Im(beta).
TwoModeState displace(const TwoModeState& state, std::complex<double> beta_upper,
                      std::complex<double> beta_lower);

TwoModeState to_plus_minus(const TwoModeState& state);
TwoModeState from_plus_minus(const TwoModeState& state);

double mode_energy(const TwoModeState& state, ModeIndex mode);
EnergySummary energy_summary(const TwoModeState& state);

HDCoefficients hd_coefficients(const TwoModeState& state);

/// The balanced representative of a homodyne equivalence class: the state a
/// phase scan cannot distinguish from any other state with the same (a,b,c).
/// Throws std::domain_error if (a,b,c) is not attainable by a physical state.
TwoModeState canonical_hd_state(const HDCoefficients& coeffs);

/// Uncertainty-principle guard: pass iff min eig(cov + i Sigma) >= -tolerance.
/// Throws std::invalid_argument on an asymmetric covariance.
PhysicalityReport physicality_check(const TwoModeState& state, double tolerance = 1e-9);

/// 1/sqrt(det cov). Throws std::domain_error on a singular covariance.
double purity(const TwoModeState& state);

SingleModeMarginal single_mode_marginal(const TwoModeState& state, ModeIndex mode);

/// Gaussian Wigner density W(p,q) of a single-mode marginal.
double wigner_eval(const SingleModeMarginal& marginal, double p, double q);

}  // namespace sideband
