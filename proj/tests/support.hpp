#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "sideband/rng.hpp"
#include "sideband/state.hpp"

namespace sideband::testing {

inline std::vector<double> linspace(double start, double stop, int count) {
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
        grid[i] = start + (stop - start) * i / (count - 1);
    }
    return grid;
}

inline Eigen::Matrix2d rotation2(double theta) {
    Eigen::Matrix2d r;
    r << std::cos(theta), -std::sin(theta),
         std::sin(theta), std::cos(theta);
    return r;
}

/// Random physical two-mode Gaussian state: a random symplectic (local
/// rotations, modest squeezing, a mode mixer) applied to vacuum, plus a dash
/// of classical noise and a random displacement.
inline TwoModeState random_physical_state(RngStream& rng, double max_squeeze = 0.5,
                                          double classical_scale = 1.0) {
    Eigen::Matrix4d s = Eigen::Matrix4d::Identity();

    auto local = [&](double theta_a, double r_a, double theta_b, double r_b) {
        Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
        Eigen::Matrix2d sq_a = Eigen::Vector2d(std::exp(r_a), std::exp(-r_a)).asDiagonal();
        Eigen::Matrix2d sq_b = Eigen::Vector2d(std::exp(r_b), std::exp(-r_b)).asDiagonal();
        m.block<2, 2>(0, 0) = rotation2(theta_a) * sq_a;
        m.block<2, 2>(2, 2) = rotation2(theta_b) * sq_b;
        return m;
    };
    auto mixer = [&](double theta) {
        Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
        m.block<2, 2>(0, 0) = std::cos(theta) * Eigen::Matrix2d::Identity();
        m.block<2, 2>(0, 2) = std::sin(theta) * Eigen::Matrix2d::Identity();
        m.block<2, 2>(2, 0) = -std::sin(theta) * Eigen::Matrix2d::Identity();
        m.block<2, 2>(2, 2) = std::cos(theta) * Eigen::Matrix2d::Identity();
        return m;
    };

    const double two_pi = 2.0 * std::numbers::pi;
    s = local(two_pi * rng.uniform(), max_squeeze * (2.0 * rng.uniform() - 1.0),
              two_pi * rng.uniform(), max_squeeze * (2.0 * rng.uniform() - 1.0)) *
        mixer(two_pi * rng.uniform()) *
        local(two_pi * rng.uniform(), max_squeeze * (2.0 * rng.uniform() - 1.0),
              two_pi * rng.uniform(), max_squeeze * (2.0 * rng.uniform() - 1.0));

    TwoModeState state;
    state.cov = s * s.transpose();
    if (classical_scale > 0.0) {
        Eigen::Matrix4d noise;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) noise(i, j) = rng.gaussian();
        }
        state.cov += classical_scale * (noise * noise.transpose()) / 4.0;
    }
    state.cov = 0.5 * (state.cov + state.cov.transpose());
    for (int i = 0; i < 4; ++i) state.mean[i] = 2.0 * rng.gaussian();
    return state;
}

}  // namespace sideband::testing
