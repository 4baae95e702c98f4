#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sideband/detection.hpp"
#include "sideband/state.hpp"

namespace sideband {

struct FitReport {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd coeff_covariance;
    double residual_rms = 0.0;
    int design_rank = 0;
    double condition_number = 1.0;
};

struct ReconstructionResult {
    TwoModeState state;
    FitReport report;
    double purity = 0.0;
    EnergySummary energies;
    double projection_distance = 0.0;  // Frobenius distance of physicality projection
};

enum class Technique { HD, RDPower, RDLocked };

struct IdentifiabilityReport {
    int rank = 0;
    /// Orthonormal basis of unobservable covariance directions, one column per
    /// direction, in the 10-entry parameterization of cov_param_order().
    Eigen::MatrixXd null_space;
};

struct Comparison {
    double chi_square = 0.0;
    int dof = 0;
    std::string verdict;  // "indistinguishable" | "distinguishable" | "inconclusive"
};

/// Fixed ordering of the 10 free entries of a symmetric 4x4 covariance:
/// (0,0),(0,1),(0,2),(0,3),(1,1),(1,2),(1,3),(2,2),(2,3),(3,3).
const std::vector<std::pair<int, int>>& cov_param_order();
Eigen::VectorXd cov_to_params(const Eigen::Matrix4d& cov);
Eigen::Matrix4d params_to_cov(const Eigen::VectorXd& params);

/// Weighted linear least squares by SVD. Singular values below 1e-10 of the
/// largest count as zero. Unweighted when every sigma is zero.
FitReport linear_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& sigma,
                               const std::vector<std::string>& names);

/// Fit S(phi) = a/2 cos^2 + b/2 sin^2 + c/2 sin 2phi to a homodyne phase scan.
/// Requires >= 4 points spanning more than pi/2 of phase.
FitReport fit_hd_curve(const ScanCurve& curve);

/// Fit the four-coefficient g-model to a detuning noise-power scan.
/// Coefficients: energy_sum, energy_imbalance, a_minus_b, c.
FitReport fit_rd_power_curve(const ScanCurve& curve, const CavityParams& cavity,
                             double omega_over_gamma);

/// Least-squares recovery of the full mean vector and covariance matrix from a
/// phase-locked detuning scan. Throws std::domain_error when the design rank
/// is below 10. Optional projection onto the physical cone.
ReconstructionResult reconstruct_covariance(const std::vector<LockedSample>& locked,
                                            const CavityParams& cavity,
                                            double omega_over_gamma,
                                            bool project_physical = false);

/// Numerical rank and unobservable directions of a technique's linear map from
/// covariance entries to curve values. `grid` is a phase grid for HD and a
/// detuning grid otherwise.
IdentifiabilityReport identifiability_report(Technique technique,
                                             const std::vector<double>& grid,
                                             const CavityParams& cavity,
                                             double omega_over_gamma);

/// Chi-square distance between two curves on the same grid.
Comparison compare_states(const ScanCurve& a, const ScanCurve& b);

}  // namespace sideband
