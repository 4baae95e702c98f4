#include "sideband/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sideband::io {

namespace {

using nlohmann::json;

std::string kind_name(ScanKind kind) {
    return kind == ScanKind::HomodynePhase ? "homodyne_phase" : "resonator_detuning";
}

ScanKind kind_from_name(const std::string& name, const std::string& where) {
    if (name == "homodyne_phase") return ScanKind::HomodynePhase;
    if (name == "resonator_detuning") return ScanKind::ResonatorDetuning;
    throw ParseError(where + ": unknown scan kind '" + name + "'");
}

json parse(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(where + ": " + e.what());
    }
}

double number_at(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ParseError(where + ": missing numeric field '" + key + "'");
    }
    return j[key].get<double>();
}

// Emit JSON with our own double formatting so files carry full precision and
// stay byte-stable.
void emit(std::ostringstream& os, const json& j, int indent) {
    const std::string pad(indent, ' ');
    if (j.is_object()) {
        os << "{";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            os << (first ? "\n" : ",\n") << pad << "  " << json(it.key()).dump() << ": ";
            emit(os, it.value(), indent + 2);
            first = false;
        }
        os << "\n" << pad << "}";
    } else if (j.is_array()) {
        os << "[";
        bool first = true;
        for (const auto& item : j) {
            os << (first ? "" : ", ");
            emit(os, item, indent);
            first = false;
        }
        os << "]";
    } else if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v)) {
            os << format_double(v);
        } else {
            os << "null";  // JSON has no inf/nan
        }
    } else {
        os << j.dump();
    }
}

std::string emit(const json& j) {
    std::ostringstream os;
    emit(os, j, 0);
    os << "\n";
    return os.str();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json energy_json(const EnergySummary& e) {
    json j;
    j["e_upper"] = e.e_upper;
    j["e_lower"] = e.e_lower;
    j["sum"] = e.sum;
    j["imbalance"] = e.imbalance;
    j["ratio"] = (e.e_upper != 0.0) ? e.e_lower / e.e_upper : 0.0;
    return j;
}

json moments_json(const PhotocurrentMoments& m) {
    json j;
    j["mean_cos"] = m.mean_cos;
    j["mean_sin"] = m.mean_sin;
    j["var_cos"] = m.var_cos;
    j["var_sin"] = m.var_sin;
    j["cov_cossin"] = m.cov_cossin;
    return j;
}

PhotocurrentMoments moments_from_json(const json& j, const std::string& where) {
    PhotocurrentMoments m;
    m.mean_cos = number_at(j, "mean_cos", where);
    m.mean_sin = number_at(j, "mean_sin", where);
    m.var_cos = number_at(j, "var_cos", where);
    m.var_sin = number_at(j, "var_sin", where);
    m.cov_cossin = number_at(j, "cov_cossin", where);
    return m;
}

json cavity_json(const CavityParams& c) {
    json j;
    j["r0_intensity"] = c.r0_intensity;
    j["bandwidth_mhz"] = c.bandwidth_mhz;
    j["coupling"] = c.coupling == Coupling::Overcoupled ? "over" : "under";
    j["eta"] = c.eta;
    return j;
}

CavityParams cavity_from_json(const json& j, const std::string& where) {
    CavityParams c;
    c.r0_intensity = number_at(j, "r0_intensity", where);
    c.bandwidth_mhz = number_at(j, "bandwidth_mhz", where);
    c.eta = number_at(j, "eta", where);
    const std::string coupling = j.value("coupling", "over");
    if (coupling == "over") {
        c.coupling = Coupling::Overcoupled;
    } else if (coupling == "under") {
        c.coupling = Coupling::Undercoupled;
    } else {
        throw ParseError(where + ": coupling must be 'over' or 'under'");
    }
    return c;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FileError("cannot write " + tmp);
        out << content;
        if (!out.flush()) throw FileError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string state_to_json(const TwoModeState& state) {
    json j;
    json mean = json::array();
    for (int i = 0; i < 4; ++i) mean.push_back(state.mean[i]);
    j["mean"] = mean;
    j["cov"] = matrix_to_json(state.cov);
    j["basis"] = state.basis == Basis::Sideband ? "sideband" : "plusminus";
    return emit(j);
}

TwoModeState state_from_json(const std::string& text) {
    const json j = parse(text, "state");
    TwoModeState state;
    if (!j.contains("mean") || !j["mean"].is_array() || j["mean"].size() != 4) {
        throw ParseError("state: 'mean' must be an array of 4 numbers");
    }
    for (int i = 0; i < 4; ++i) state.mean[i] = j["mean"][i].get<double>();
    if (!j.contains("cov") || !j["cov"].is_array() || j["cov"].size() != 4) {
        throw ParseError("state: 'cov' must be a 4x4 array");
    }
    for (int i = 0; i < 4; ++i) {
        if (!j["cov"][i].is_array() || j["cov"][i].size() != 4) {
            throw ParseError("state: 'cov' row " + std::to_string(i) +
                             " must have 4 entries");
        }
        for (int k = 0; k < 4; ++k) state.cov(i, k) = j["cov"][i][k].get<double>();
    }
    const std::string basis = j.value("basis", "sideband");
    if (basis == "sideband") {
        state.basis = Basis::Sideband;
    } else if (basis == "plusminus") {
        state.basis = Basis::PlusMinus;
    } else {
        throw ParseError("state: basis must be 'sideband' or 'plusminus'");
    }
    return state;
}

void save_state(const TwoModeState& state, const std::string& path) {
    write_text_atomic(path, state_to_json(state));
}

TwoModeState load_state(const std::string& path) {
    return state_from_json(read_text(path));
}

std::string energy_summary_to_json(const EnergySummary& e) {
    return emit(energy_json(e));
}

std::string curve_to_csv(const ScanCurve& curve) {
    std::ostringstream os;
    os << "kind,abscissa,value,sigma\n";
    const std::string kind = kind_name(curve.kind);
    for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
        os << kind << ',' << format_double(curve.abscissa[i]) << ','
           << format_double(curve.values[i]) << ',' << format_double(curve.sigma[i])
           << '\n';
    }
    return os.str();
}

ScanCurve curve_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "kind,abscissa,value,sigma") {
        throw ParseError("curve csv line 1: expected header 'kind,abscissa,value,sigma'");
    }
    ScanCurve curve;
    bool have_kind = false;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string kind, a, v, s;
        if (!std::getline(row, kind, ',') || !std::getline(row, a, ',') ||
            !std::getline(row, v, ',') || !std::getline(row, s, ',')) {
            throw ParseError("curve csv line " + std::to_string(lineno) +
                             ": expected 4 comma-separated fields");
        }
        const std::string where = "curve csv line " + std::to_string(lineno);
        const ScanKind k = kind_from_name(kind, where);
        if (!have_kind) {
            curve.kind = k;
            have_kind = true;
        } else if (k != curve.kind) {
            throw ParseError(where + ": mixed scan kinds in one file");
        }
        try {
            curve.abscissa.push_back(std::stod(a));
            curve.values.push_back(std::stod(v));
            curve.sigma.push_back(std::stod(s));
        } catch (const std::exception&) {
            throw ParseError(where + ": malformed number");
        }
    }
    return curve;
}

std::string curve_to_json(const ScanCurve& curve) {
    json j;
    j["kind"] = kind_name(curve.kind);
    j["abscissa"] = curve.abscissa;
    j["values"] = curve.values;
    j["sigma"] = curve.sigma;
    j["sql_reference"] = 1.0;
    return emit(j);
}

ScanCurve curve_from_json(const std::string& text) {
    const json j = parse(text, "curve");
    ScanCurve curve;
    if (!j.contains("kind")) throw ParseError("curve: missing 'kind'");
    curve.kind = kind_from_name(j["kind"].get<std::string>(), "curve");
    for (const char* key : {"abscissa", "values", "sigma"}) {
        if (!j.contains(key) || !j[key].is_array()) {
            throw ParseError(std::string("curve: missing array '") + key + "'");
        }
    }
    curve.abscissa = j["abscissa"].get<std::vector<double>>();
    curve.values = j["values"].get<std::vector<double>>();
    curve.sigma = j["sigma"].get<std::vector<double>>();
    if (curve.values.size() != curve.abscissa.size() ||
        curve.sigma.size() != curve.abscissa.size()) {
        throw ParseError("curve: array length mismatch");
    }
    return curve;
}

void save_curve_csv(const ScanCurve& curve, const std::string& path) {
    write_text_atomic(path, curve_to_csv(curve));
}

ScanCurve load_curve_csv(const std::string& path) {
    return curve_from_csv(read_text(path));
}

std::string locked_scan_to_json(const std::vector<LockedSample>& samples,
                                const CavityParams& cavity, double omega_over_gamma) {
    json j;
    j["cavity"] = cavity_json(cavity);
    j["omega_over_gamma"] = omega_over_gamma;
    json points = json::array();
    for (const LockedSample& s : samples) {
        json p;
        p["delta"] = s.delta;
        p["moments"] = moments_json(s.moments);
        p["sigma"] = moments_json(s.sigma);
        points.push_back(p);
    }
    j["points"] = points;
    return emit(j);
}

LockedScanFile locked_scan_from_json(const std::string& text) {
    const json j = parse(text, "locked scan");
    LockedScanFile file;
    if (!j.contains("cavity")) throw ParseError("locked scan: missing 'cavity'");
    file.cavity = cavity_from_json(j["cavity"], "locked scan cavity");
    file.omega_over_gamma = number_at(j, "omega_over_gamma", "locked scan");
    if (!j.contains("points") || !j["points"].is_array()) {
        throw ParseError("locked scan: missing 'points' array");
    }
    int index = 0;
    for (const auto& p : j["points"]) {
        const std::string where = "locked scan point " + std::to_string(index++);
        LockedSample sample;
        sample.delta = number_at(p, "delta", where);
        if (!p.contains("moments")) throw ParseError(where + ": missing 'moments'");
        sample.moments = moments_from_json(p["moments"], where);
        if (p.contains("sigma")) sample.sigma = moments_from_json(p["sigma"], where);
        else sample.sigma = PhotocurrentMoments{0, 0, 0, 0, 0};
        file.samples.push_back(sample);
    }
    return file;
}

std::string fit_report_to_json(const FitReport& report) {
    json coeffs;
    for (std::size_t i = 0; i < report.names.size(); ++i) {
        coeffs[report.names[i]] = report.coefficients[static_cast<Eigen::Index>(i)];
    }
    json j;
    j["coefficients"] = coeffs;
    j["coeff_covariance"] = matrix_to_json(report.coeff_covariance);
    j["residual_rms"] = report.residual_rms;
    j["design_rank"] = report.design_rank;
    j["condition_number"] = report.condition_number;
    return emit(j);
}

std::string reconstruction_to_json(const ReconstructionResult& result) {
    json state = parse(state_to_json(result.state), "internal");
    json report = parse(fit_report_to_json(result.report), "internal");
    json j;
    j["state"] = state;
    j["report"] = report;
    j["purity"] = result.purity;
    j["energies"] = energy_json(result.energies);
    j["projection_distance"] = result.projection_distance;
    return emit(j);
}

std::string comparison_to_json(const Comparison& comparison) {
    json j;
    j["chi_square"] = comparison.chi_square;
    j["dof"] = comparison.dof;
    j["chi_square_per_dof"] =
        comparison.dof > 0 ? comparison.chi_square / comparison.dof : 0.0;
    j["verdict"] = comparison.verdict;
    return emit(j);
}

}  // namespace sideband::io
