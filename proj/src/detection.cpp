#include "sideband/detection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace sideband {

namespace {

void validate_noise(const NoiseModel& noise) {
    if (noise.samples_per_point < 2) {
        throw std::invalid_argument("noise model: samples_per_point must be >= 2");
    }
}

// Deterministic static partition; per-point RNG streams make the result
// independent of the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const int nthreads = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nthreads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

double s_hd(const HDCoefficients& coeffs, double phi, double visibility) {
    if (!(visibility > 0.0) || visibility > 1.0) {
        throw std::invalid_argument("s_hd: visibility outside (0,1]");
    }
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double ideal = 0.5 * c * c * coeffs.a + 0.5 * s * s * coeffs.b +
                         0.5 * std::sin(2.0 * phi) * coeffs.c;
    return 1.0 + visibility * visibility * (ideal - 1.0);
}

double s_hd(const TwoModeState& state, double phi, double visibility) {
    if (!physicality_check(state).pass) {
        throw std::domain_error("s_hd: nonphysical state");
    }
    return s_hd(hd_coefficients(state), phi, visibility);
}

ScanCurve hd_scan(const TwoModeState& state, const std::vector<double>& phi_grid,
                  double visibility, const std::optional<NoiseModel>& noise, int threads) {
    if (phi_grid.empty()) {
        throw std::invalid_argument("hd_scan: empty phase grid");
    }
    if (!physicality_check(state).pass) {
        throw std::domain_error("hd_scan: nonphysical state");
    }
    if (noise) validate_noise(*noise);
    const HDCoefficients coeffs = hd_coefficients(state);
    ScanCurve curve;
    curve.kind = ScanKind::HomodynePhase;
    curve.abscissa = phi_grid;
    curve.values.resize(phi_grid.size());
    curve.sigma.assign(phi_grid.size(), 0.0);
    parallel_for(phi_grid.size(), threads, [&](std::size_t i) {
        double value = s_hd(coeffs, phi_grid[i], visibility);
        if (noise) {
            RngStream rng = RngStream::for_point(noise->seed, i);
            auto [noisy, sigma] = add_estimation_noise(value, noise->samples_per_point, rng);
            value = noisy;
            curve.sigma[i] = sigma;
        }
        curve.values[i] = value;
    });
    return curve;
}

std::pair<Eigen::Vector4d, Eigen::Vector4d> rd_coefficient_vectors(
    const SidebandResponse& resp) {
    const double xu = resp.r_upper.real();
    const double yu = resp.r_upper.imag();
    const double xl = resp.r_lower.real();
    const double yl = resp.r_lower.imag();
    Eigen::Vector4d u(xu, yu, xl, yl);
    Eigen::Vector4d v(-yu, xu, yl, -xl);
    return {u, v};
}

Eigen::Vector4d rd_basis_weights(const SidebandResponse& resp) {
    return {resp.g_plus / 4.0, resp.g_minus / 4.0, resp.g_r / 2.0, resp.g_i};
}

PhotocurrentMoments rd_moments(const TwoModeState& state, const CavityParams& cavity,
                               double delta, double omega_over_gamma) {
    const SidebandResponse resp = sideband_response(cavity, delta, omega_over_gamma);
    const auto [u, v] = rd_coefficient_vectors(resp);
    const double closure = 2.0 - resp.g_plus;  // Var of the loss-port vacuum term
    PhotocurrentMoments m;
    m.mean_cos = u.dot(state.mean);
    m.mean_sin = v.dot(state.mean);
    m.var_cos = u.dot(state.cov * u) + closure;
    m.var_sin = v.dot(state.cov * v) + closure;
    m.cov_cossin = u.dot(state.cov * v);
    return m;
}

double s_rd(const TwoModeState& state, const CavityParams& cavity, double delta,
            double omega_over_gamma) {
    const PhotocurrentMoments m = rd_moments(state, cavity, delta, omega_over_gamma);
    return (m.var_cos + m.var_sin) / 4.0;
}

ScanCurve rd_scan(const TwoModeState& state, const CavityParams& cavity,
                  const std::vector<double>& delta_grid, double omega_over_gamma,
                  const std::optional<NoiseModel>& noise, int threads) {
    if (delta_grid.empty()) {
        throw std::invalid_argument("rd_scan: empty detuning grid");
    }
    if (!physicality_check(state).pass) {
        throw std::domain_error("rd_scan: nonphysical state");
    }
    if (noise) validate_noise(*noise);
    // Carrier-extinguished grid points are excluded, not interpolated.
    std::vector<double> kept;
    std::vector<std::size_t> kept_index;  // original index keeps RNG streams stable
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        if (carrier_alive(cavity, delta_grid[i])) {
            kept.push_back(delta_grid[i]);
            kept_index.push_back(i);
        }
    }
    ScanCurve curve;
    curve.kind = ScanKind::ResonatorDetuning;
    curve.abscissa = kept;
    curve.values.resize(kept.size());
    curve.sigma.assign(kept.size(), 0.0);
    parallel_for(kept.size(), threads, [&](std::size_t i) {
        double value = s_rd(state, cavity, kept[i], omega_over_gamma);
        if (noise) {
            RngStream rng = RngStream::for_point(noise->seed, kept_index[i]);
            auto [noisy, sigma] = add_estimation_noise(value, noise->samples_per_point, rng);
            value = noisy;
            curve.sigma[i] = sigma;
        }
        curve.values[i] = value;
    });
    return curve;
}

std::vector<LockedSample> rd_locked_scan(const TwoModeState& state,
                                         const CavityParams& cavity,
                                         const std::vector<double>& delta_grid,
                                         double omega_over_gamma,
                                         const std::optional<NoiseModel>& noise,
                                         int threads) {
    if (delta_grid.empty()) {
        throw std::invalid_argument("rd_locked_scan: empty detuning grid");
    }
    if (!physicality_check(state).pass) {
        throw std::domain_error("rd_locked_scan: nonphysical state");
    }
    if (noise) validate_noise(*noise);
    std::vector<double> kept;
    std::vector<std::size_t> kept_index;
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        if (carrier_alive(cavity, delta_grid[i])) {
            kept.push_back(delta_grid[i]);
            kept_index.push_back(i);
        }
    }
    std::vector<LockedSample> samples(kept.size());
    parallel_for(kept.size(), threads, [&](std::size_t i) {
        LockedSample sample;
        sample.delta = kept[i];
        sample.moments = rd_moments(state, cavity, kept[i], omega_over_gamma);
        sample.sigma = PhotocurrentMoments{0.0, 0.0, 0.0, 0.0, 0.0};
        if (noise) {
            const int n = noise->samples_per_point;
            RngStream rng = RngStream::for_point(noise->seed, kept_index[i]);
            PhotocurrentMoments& m = sample.moments;
            PhotocurrentMoments& s = sample.sigma;
            const double vc = m.var_cos;
            const double vs = m.var_sin;
            // Standard N-sample estimator fluctuations, Gaussian approximation.
            auto [nvc, svc] = add_estimation_noise(vc, n, rng);
            auto [nvs, svs] = add_estimation_noise(vs, n, rng);
            m.var_cos = nvc;
            m.var_sin = nvs;
            s.var_cos = svc;
            s.var_sin = svs;
            s.cov_cossin = std::sqrt((vc * vs + m.cov_cossin * m.cov_cossin) / (n - 1));
            m.cov_cossin += s.cov_cossin * rng.gaussian();
            s.mean_cos = std::sqrt(vc / n);
            s.mean_sin = std::sqrt(vs / n);
            m.mean_cos += s.mean_cos * rng.gaussian();
            m.mean_sin += s.mean_sin * rng.gaussian();
        }
        samples[i] = sample;
    });
    return samples;
}

std::pair<double, double> add_estimation_noise(double value, int n, RngStream& rng) {
    if (n < 2) {
        throw std::invalid_argument("add_estimation_noise: need n >= 2");
    }
    if (!(value > 0.0)) {
        throw std::invalid_argument("add_estimation_noise: value must be positive");
    }
    const double sigma = value * std::sqrt(2.0 / (n - 1));
    return {value + sigma * rng.gaussian(), sigma};
}

}  // namespace sideband
