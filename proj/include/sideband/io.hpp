#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sideband/cavity.hpp"
#include "sideband/detection.hpp"
#include "sideband/reconstruct.hpp"
#include "sideband/state.hpp"

namespace sideband::io {

/// Schema or syntax problem in an input file; message carries the location.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be opened.
struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Format a double with 17 significant digits (round-trip exact).
std::string format_double(double value);

/// Write via a temp file in the same directory, then rename.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

// TwoModeState <-> JSON {mean:[4], cov:[[4x4]], basis:"sideband"|"plusminus"}
std::string state_to_json(const TwoModeState& state);
TwoModeState state_from_json(const std::string& text);
void save_state(const TwoModeState& state, const std::string& path);
TwoModeState load_state(const std::string& path);

std::string energy_summary_to_json(const EnergySummary& e);

// ScanCurve <-> CSV with header `kind,abscissa,value,sigma`, and JSON.
std::string curve_to_csv(const ScanCurve& curve);
ScanCurve curve_from_csv(const std::string& text);
std::string curve_to_json(const ScanCurve& curve);
ScanCurve curve_from_json(const std::string& text);
void save_curve_csv(const ScanCurve& curve, const std::string& path);
ScanCurve load_curve_csv(const std::string& path);

// Phase-locked scan, self-contained (cavity parameters and omega/gamma ride
// along so reconstruction needs no extra inputs).
std::string locked_scan_to_json(const std::vector<LockedSample>& samples,
                                const CavityParams& cavity, double omega_over_gamma);
struct LockedScanFile {
    std::vector<LockedSample> samples;
    CavityParams cavity;
    double omega_over_gamma = 17.0 / 6.0;
};
LockedScanFile locked_scan_from_json(const std::string& text);

std::string fit_report_to_json(const FitReport& report);
std::string reconstruction_to_json(const ReconstructionResult& result);
std::string comparison_to_json(const Comparison& comparison);

}  // namespace sideband::io
