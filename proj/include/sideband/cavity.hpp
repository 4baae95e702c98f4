#pragma once

#include <complex>

#include "sideband/state.hpp"

namespace sideband {

/// Sign of the on-resonance amplitude reflection.
enum class Coupling { Overcoupled, Undercoupled };

struct CavityParams {
    double r0_intensity = 0.04;   // intensity reflectivity at resonance, [0,1]
    double bandwidth_mhz = 6.0;   // > 0
    Coupling coupling = Coupling::Overcoupled;
    double eta = 1.0;             // mode-matching efficiency, (0,1]
};

/// Complex reflection seen by each sideband, with the carrier phase factor
/// folded in, plus the derived g-functions of the noise-power model.
///
/// Detuning convention: delta > 0 means the cavity resonance sits above the
/// carrier, so the upper sideband crosses resonance at delta = +omega/gamma.
struct SidebandResponse {
    std::complex<double> r_upper;
    std::complex<double> r_lower;
    double g_plus = 2.0;   // |r_upper|^2 + |r_lower|^2
    double g_minus = 0.0;  // |r_upper|^2 - |r_lower|^2
    double g_r = 0.5;      // Re(r_upper * r_lower) / 2
    double g_i = 0.0;      // Im(r_upper * r_lower) / 2
};

/// Single-pole amplitude reflection r(delta) = (d + i delta)/(1 + i delta),
/// d = sign * sqrt(r0_intensity).
std::complex<double> reflection(const CavityParams& params, double delta);

/// Amplitude coupling into the loss/vacuum port; t^2 + |r|^2 = 1 exactly.
double transmission(const CavityParams& params, double delta);

/// Mode mismatch as coherent bypass: (1 - eta) + eta * r(delta).
std::complex<double> effective_reflection(const CavityParams& params, double delta);

/// False when the reflected carrier is extinguished at this detuning
/// (|r_eff| < 1e-12); such grid points are excluded from scans.
bool carrier_alive(const CavityParams& params, double delta);

/// Throws std::domain_error when the carrier is extinguished.
SidebandResponse sideband_response(const CavityParams& params, double delta,
                                   double omega_over_gamma);

/// Gaussian channel of the cavity on a two-sideband state: each mode is
/// scaled/rotated by its complex reflection and back-filled with vacuum.
/// Throws std::domain_error on a nonphysical input.
TwoModeState apply_cavity_channel(const TwoModeState& state, const CavityParams& params,
                                  double delta, double omega_over_gamma);

}  // namespace sideband
