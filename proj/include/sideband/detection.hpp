#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sideband/cavity.hpp"
#include "sideband/rng.hpp"
#include "sideband/state.hpp"

namespace sideband {

enum class ScanKind { HomodynePhase, ResonatorDetuning };

/// Sampled measurement curve in SQL units (vacuum = 1).
struct ScanCurve {
    ScanKind kind = ScanKind::HomodynePhase;
    std::vector<double> abscissa;
    std::vector<double> values;
    std::vector<double> sigma;
};

/// First and second moments of the (J_cos, J_sin) photocurrent pair at one
/// detuning, vacuum-closure terms included (vacuum input gives var = 2 each).
struct PhotocurrentMoments {
    double mean_cos = 0.0;
    double mean_sin = 0.0;
    double var_cos = 2.0;
    double var_sin = 2.0;
    double cov_cossin = 0.0;
};

/// One point of a phase-locked detuning scan.
struct LockedSample {
    double delta = 0.0;
    PhotocurrentMoments moments;
    PhotocurrentMoments sigma{0.0, 0.0, 0.0, 0.0, 0.0};  // standard errors; zero when noiseless
};

struct NoiseModel {
    int samples_per_point = 200;  // >= 2
    std::uint64_t seed = 0;
};

/// Homodyne noise power at LO phase phi, SQL-normalized. Visibility mixes
/// quadratically toward shot noise: S = 1 + v^2 (S_ideal - 1).
/// Throws std::domain_error on a nonphysical state.
double s_hd(const TwoModeState& state, double phi, double visibility = 1.0);
double s_hd(const HDCoefficients& coeffs, double phi, double visibility = 1.0);

ScanCurve hd_scan(const TwoModeState& state, const std::vector<double>& phi_grid,
                  double visibility = 1.0,
                  const std::optional<NoiseModel>& noise = std::nullopt, int threads = 1);

/// Moments of the resonator-detection photocurrents:
///   J_cos = x_u p_u + y_u q_u + x_l p_l + y_l q_l + J_vac
///   J_sin = -y_u p_u + x_u q_u + y_l p_l - x_l q_l + J_vac'
/// with x + i y the sideband reflections and Var(J_vac) = 2 - g_plus.
PhotocurrentMoments rd_moments(const TwoModeState& state, const CavityParams& cavity,
                               double delta, double omega_over_gamma);

/// Coefficient vectors of J_cos and J_sin over (p_u, q_u, p_l, q_l).
std::pair<Eigen::Vector4d, Eigen::Vector4d> rd_coefficient_vectors(
    const SidebandResponse& resp);

/// Weights of the four-coefficient noise-power model. Expanding the J_cos and
/// J_sin quadratic forms over the covariance matrix and adding the vacuum
/// closure 2(2 - g_plus) gives
///   var_cos + var_sin = 4 + g_plus*(E_u + E_l) + g_minus*(E_u - E_l)
///                         + 2 g_r*(a - b) + 4 g_i*c,
/// so with the SQL normalization s_rd = (var_cos + var_sin)/4,
///   s_rd = 1 + w . (E_u + E_l, E_u - E_l, a - b, c),
///   w = (g_plus/4, g_minus/4, g_r/2, g_i).
Eigen::Vector4d rd_basis_weights(const SidebandResponse& resp);

/// Phase-averaged resonator noise power, SQL-normalized:
/// (var_cos + var_sin)/4, which is invariant under the electronic reference
/// phase. Vacuum input gives exactly 1 at every detuning.
double s_rd(const TwoModeState& state, const CavityParams& cavity, double delta,
            double omega_over_gamma);

/// Detuning scan of s_rd. Carrier-extinguished grid points are dropped.
ScanCurve rd_scan(const TwoModeState& state, const CavityParams& cavity,
                  const std::vector<double>& delta_grid, double omega_over_gamma,
                  const std::optional<NoiseModel>& noise = std::nullopt, int threads = 1);

/// Phase-locked acquisition: full photocurrent moments per detuning.
std::vector<LockedSample> rd_locked_scan(const TwoModeState& state,
                                         const CavityParams& cavity,
                                         const std::vector<double>& delta_grid,
                                         double omega_over_gamma,
                                         const std::optional<NoiseModel>& noise = std::nullopt,
                                         int threads = 1);

/// Variance-estimator fluctuation of an N-sample noise power estimate,
/// Gaussian approximation of the chi-square law: sigma = value*sqrt(2/(N-1)).
/// Returns (noisy value, sigma).
std::pair<double, double> add_estimation_noise(double value, int n, RngStream& rng);

}  // namespace sideband
