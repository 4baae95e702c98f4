// Batch front end: config-driven state preparation, scan simulation, fitting,
// reconstruction, comparison and Wigner-grid export.
//
// Exit codes: 0 success, 2 config error, 3 missing/invalid input file,
// 4 numerical failure (rank deficiency, nonphysical state).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sideband/cavity.hpp"
#include "sideband/detection.hpp"
#include "sideband/io.hpp"
#include "sideband/preparation.hpp"
#include "sideband/reconstruct.hpp"
#include "sideband/state.hpp"

namespace {

using nlohmann::json;
using namespace sideband;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumerical = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double start = 0.0;
    double stop = 1.0;
    int count = 4;
};

struct RunConfig {
    std::string experiment = "sideband";
    double beta_re = 0.0;
    double beta_im = 0.0;
    double kappa = 1.0;
    double beta0_sq = 0.0;
    CavityParams cavity;
    double omega_mhz = 17.0;
    double gamma_mhz = 6.0;
    GridSpec phase_grid{0.0, std::numbers::pi, 60};
    GridSpec detuning_grid{-8.0, 8.0, 161};
    GridSpec wigner_grid{-6.0, 6.0, 61};
    double visibility = 1.0;
    std::optional<NoiseModel> noise;
    int threads = 1;
    std::string out = "out";

    double omega_over_gamma() const { return omega_mhz / gamma_mhz; }
};

std::vector<double> grid_points(const GridSpec& g) {
    std::vector<double> pts(g.count);
    for (int i = 0; i < g.count; ++i) {
        pts[i] = g.start + (g.stop - g.start) * i / (g.count - 1);
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Config loading: JSON file, then SIDEBAND_* environment overrides (nested
// keys flattened with underscores, e.g. SIDEBAND_CAVITY_ETA), then --seed.

void apply_env_overrides(json& j) {
    struct Override {
        const char* env;     // suffix after SIDEBAND_
        json::json_pointer where;
        char type;           // d(ouble), i(nt), u(int64), s(tring)
    };
    using ptr = json::json_pointer;
    static const std::vector<Override> table = {
        {"EXPERIMENT", ptr("/experiment"), 's'},
        {"BETA_RE", ptr("/beta_re"), 'd'},
        {"BETA_IM", ptr("/beta_im"), 'd'},
        {"KAPPA", ptr("/kappa"), 'd'},
        {"BETA0_SQ", ptr("/beta0_sq"), 'd'},
        {"CAVITY_R0_INTENSITY", ptr("/cavity/r0_intensity"), 'd'},
        {"CAVITY_BANDWIDTH_MHZ", ptr("/cavity/bandwidth_mhz"), 'd'},
        {"CAVITY_COUPLING", ptr("/cavity/coupling"), 's'},
        {"CAVITY_ETA", ptr("/cavity/eta"), 'd'},
        {"OMEGA_MHZ", ptr("/omega_mhz"), 'd'},
        {"GAMMA_MHZ", ptr("/gamma_mhz"), 'd'},
        {"PHASE_GRID_START", ptr("/phase_grid/start"), 'd'},
        {"PHASE_GRID_STOP", ptr("/phase_grid/stop"), 'd'},
        {"PHASE_GRID_COUNT", ptr("/phase_grid/count"), 'i'},
        {"DETUNING_GRID_START", ptr("/detuning_grid/start"), 'd'},
        {"DETUNING_GRID_STOP", ptr("/detuning_grid/stop"), 'd'},
        {"DETUNING_GRID_COUNT", ptr("/detuning_grid/count"), 'i'},
        {"WIGNER_GRID_START", ptr("/wigner_grid/start"), 'd'},
        {"WIGNER_GRID_STOP", ptr("/wigner_grid/stop"), 'd'},
        {"WIGNER_GRID_COUNT", ptr("/wigner_grid/count"), 'i'},
        {"VISIBILITY", ptr("/visibility"), 'd'},
        {"NOISE_SAMPLES_PER_POINT", ptr("/noise/samples_per_point"), 'i'},
        {"NOISE_SEED", ptr("/noise/seed"), 'u'},
        {"THREADS", ptr("/threads"), 'i'},
        {"OUT", ptr("/out"), 's'},
    };
    for (const Override& o : table) {
        const std::string name = std::string("SIDEBAND_") + o.env;
        const char* raw = std::getenv(name.c_str());
        if (!raw) continue;
        try {
            switch (o.type) {
                case 'd': j[o.where] = std::stod(raw); break;
                case 'i': j[o.where] = std::stoi(raw); break;
                case 'u': j[o.where] = std::stoull(raw); break;
                default: j[o.where] = std::string(raw); break;
            }
        } catch (const std::exception&) {
            throw ConfigError(name + ": cannot parse '" + raw + "'");
        }
    }
}

double get_double(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string(key) + ": expected a number");
    return j[key].get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ConfigError(std::string(key) + ": expected an integer");
    return j[key].get<int>();
}

GridSpec get_grid(const json& j, const char* key, const GridSpec& fallback) {
    if (!j.contains(key)) return fallback;
    const json& g = j[key];
    if (!g.is_object()) throw ConfigError(std::string(key) + ": expected an object");
    GridSpec spec = fallback;
    spec.start = get_double(g, "start", spec.start);
    spec.stop = get_double(g, "stop", spec.stop);
    spec.count = get_int(g, "count", spec.count);
    if (spec.count < 4) throw ConfigError(std::string(key) + ".count: must be >= 4");
    if (!(spec.stop > spec.start)) {
        throw ConfigError(std::string(key) + ": stop must exceed start");
    }
    return spec;
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    json j = json::object();
    if (!path.empty()) {
        std::string text;
        try {
            text = io::read_text(path);
        } catch (const io::FileError& e) {
            // a config named on the command line must exist
            throw ConfigError(e.what());
        }
        j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw ConfigError(path + ": not a JSON object");
        }
    }
    apply_env_overrides(j);
    reject_unknown_keys(j,
                        {"experiment", "beta_re", "beta_im", "kappa", "beta0_sq", "cavity",
                         "omega_mhz", "gamma_mhz", "phase_grid", "detuning_grid",
                         "wigner_grid", "visibility", "noise", "threads", "out"},
                        "config");

    RunConfig cfg;
    if (j.contains("experiment")) cfg.experiment = j["experiment"].get<std::string>();
    cfg.beta_re = get_double(j, "beta_re", cfg.beta_re);
    cfg.beta_im = get_double(j, "beta_im", cfg.beta_im);
    cfg.kappa = get_double(j, "kappa", cfg.kappa);
    cfg.beta0_sq = get_double(j, "beta0_sq", cfg.beta0_sq);
    if (j.contains("cavity")) {
        const json& c = j["cavity"];
        reject_unknown_keys(c, {"r0_intensity", "bandwidth_mhz", "coupling", "eta"},
                            "config.cavity");
        cfg.cavity.r0_intensity = get_double(c, "r0_intensity", cfg.cavity.r0_intensity);
        cfg.cavity.bandwidth_mhz = get_double(c, "bandwidth_mhz", cfg.cavity.bandwidth_mhz);
        cfg.cavity.eta = get_double(c, "eta", cfg.cavity.eta);
        if (c.contains("coupling")) {
            const std::string coupling = c["coupling"].get<std::string>();
            if (coupling == "over") {
                cfg.cavity.coupling = Coupling::Overcoupled;
            } else if (coupling == "under") {
                cfg.cavity.coupling = Coupling::Undercoupled;
            } else {
                throw ConfigError("config.cavity.coupling: expected \"over\" or \"under\"");
            }
        }
    }
    cfg.omega_mhz = get_double(j, "omega_mhz", cfg.omega_mhz);
    cfg.gamma_mhz = get_double(j, "gamma_mhz", cfg.gamma_mhz);
    cfg.phase_grid = get_grid(j, "phase_grid", cfg.phase_grid);
    cfg.detuning_grid = get_grid(j, "detuning_grid", cfg.detuning_grid);
    cfg.wigner_grid = get_grid(j, "wigner_grid", cfg.wigner_grid);
    cfg.visibility = get_double(j, "visibility", cfg.visibility);
    if (j.contains("noise")) {
        const json& n = j["noise"];
        reject_unknown_keys(n, {"samples_per_point", "seed"}, "config.noise");
        NoiseModel noise;
        noise.samples_per_point = get_int(n, "samples_per_point", noise.samples_per_point);
        if (!n.contains("seed")) {
            throw ConfigError("config.noise: seed is required when noise is configured");
        }
        noise.seed = n["seed"].get<std::uint64_t>();
        cfg.noise = noise;
    }
    cfg.threads = get_int(j, "threads", cfg.threads);
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (seed_override) {
        if (!cfg.noise) cfg.noise = NoiseModel{};
        cfg.noise->seed = *seed_override;
    }

    if (!(cfg.gamma_mhz > 0.0)) throw ConfigError("gamma_mhz must be positive");
    if (!(cfg.omega_mhz > 0.0)) throw ConfigError("omega_mhz must be positive");
    if (cfg.kappa < 0.0 || cfg.kappa > 1.0) throw ConfigError("kappa must lie in [0, 1]");
    if (cfg.beta0_sq < 0.0) throw ConfigError("beta0_sq must be >= 0");
    if (cfg.visibility < 0.0 || cfg.visibility > 1.0) {
        throw ConfigError("visibility must lie in [0, 1]");
    }
    if (cfg.noise && cfg.noise->samples_per_point < 2) {
        throw ConfigError("noise.samples_per_point must be >= 2");
    }
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    return cfg;
}

// ---------------------------------------------------------------------------

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out);
    return (std::filesystem::path(cfg.out) / name).string();
}

TwoModeState load_input_state(const std::string& path) {
    return io::load_state(path);  // FileError / ParseError map to exit 3
}

int cmd_prepare(const RunConfig& cfg, const std::string& stage, bool quiet) {
    const std::complex<double> beta(cfg.beta_re, cfg.beta_im);
    TwoModeState state;
    if (stage == "vacuum") {
        state = vacuum();
    } else if (stage == "psi1") {
        state = prepare_psi1(beta);
    } else if (stage == "psi2") {
        state = attenuate_mode(prepare_psi1(beta), ModeIndex::LowerSideband, cfg.kappa);
    } else if (stage == "rho") {
        state = prepare_rho({beta, cfg.kappa, cfg.beta0_sq});
    } else if (stage == "rho_r") {
        state = prepare_rho_r(cfg.beta0_sq);
    } else {
        throw ConfigError("prepare: unknown stage '" + stage + "'");
    }
    const EnergySummary e = energy_summary(state);
    io::save_state(state, out_path(cfg, "state.json"));
    io::write_text_atomic(out_path(cfg, "energy.json"), io::energy_summary_to_json(e));
    if (!quiet) {
        std::cout << "prepared " << stage << ": E_u = " << e.e_upper
                  << ", E_l = " << e.e_lower << ", imbalance = " << e.imbalance << "\n";
    }
    return kExitOk;
}

json curve_summary(const ScanCurve& curve) {
    json j = json::parse(io::curve_to_json(curve));
    j["sql_reference"] = 1.0;
    return j;
}

int cmd_scan(const RunConfig& cfg, const std::string& technique,
             const std::string& state_path, bool quiet) {
    const TwoModeState state = load_input_state(state_path);
    if (technique == "hd") {
        const ScanCurve curve = hd_scan(state, grid_points(cfg.phase_grid), cfg.visibility,
                                        cfg.noise, cfg.threads);
        io::save_curve_csv(curve, out_path(cfg, "scan_hd.csv"));
        io::write_text_atomic(out_path(cfg, "scan_hd.json"), curve_summary(curve).dump(2) + "\n");
        if (!quiet) std::cout << "homodyne scan: " << curve.values.size() << " points\n";
    } else if (technique == "rd") {
        const ScanCurve curve = rd_scan(state, cfg.cavity, grid_points(cfg.detuning_grid),
                                        cfg.omega_over_gamma(), cfg.noise, cfg.threads);
        io::save_curve_csv(curve, out_path(cfg, "scan_rd.csv"));
        io::write_text_atomic(out_path(cfg, "scan_rd.json"), curve_summary(curve).dump(2) + "\n");
        if (!quiet) std::cout << "detuning scan: " << curve.values.size() << " points\n";
    } else if (technique == "rd-locked") {
        const auto samples = rd_locked_scan(state, cfg.cavity, grid_points(cfg.detuning_grid),
                                            cfg.omega_over_gamma(), cfg.noise, cfg.threads);
        io::write_text_atomic(out_path(cfg, "locked_scan.json"),
                              io::locked_scan_to_json(samples, cfg.cavity,
                                                      cfg.omega_over_gamma()));
        if (!quiet) std::cout << "locked scan: " << samples.size() << " points\n";
    } else {
        throw ConfigError("scan: unknown technique '" + technique + "'");
    }
    return kExitOk;
}

int cmd_fit(const RunConfig& cfg, const std::string& model, const std::string& curve_path,
            bool quiet) {
    const ScanCurve curve = io::load_curve_csv(curve_path);
    FitReport report;
    if (model == "hd") {
        report = fit_hd_curve(curve);
    } else if (model == "rd-power") {
        report = fit_rd_power_curve(curve, cfg.cavity, cfg.omega_over_gamma());
    } else {
        throw ConfigError("fit: unknown model '" + model + "'");
    }
    io::write_text_atomic(out_path(cfg, "fit_" + model + ".json"),
                          io::fit_report_to_json(report));
    if (!quiet) {
        std::cout << "fit " << model << " (rank " << report.design_rank
                  << ", residual rms " << report.residual_rms << ")\n";
        for (std::size_t i = 0; i < report.names.size(); ++i) {
            std::cout << "  " << report.names[i] << " = "
                      << report.coefficients[static_cast<Eigen::Index>(i)] << "\n";
        }
    }
    return kExitOk;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& locked_path, bool project,
                    bool quiet) {
    const io::LockedScanFile file = io::locked_scan_from_json(io::read_text(locked_path));
    const ReconstructionResult result =
        reconstruct_covariance(file.samples, file.cavity, file.omega_over_gamma, project);
    io::write_text_atomic(out_path(cfg, "reconstruction.json"),
                          io::reconstruction_to_json(result));
    if (!quiet) {
        std::cout << "reconstruction: rank " << result.report.design_rank << ", purity "
                  << result.purity << ", E_u - E_l = " << result.energies.imbalance << "\n";
    }
    return kExitOk;
}

int cmd_compare(const RunConfig& cfg, const std::string& path_a, const std::string& path_b,
                bool quiet) {
    const ScanCurve a = io::load_curve_csv(path_a);
    const ScanCurve b = io::load_curve_csv(path_b);
    const Comparison c = compare_states(a, b);
    io::write_text_atomic(out_path(cfg, "comparison.json"), io::comparison_to_json(c));
    if (!quiet) {
        std::cout << "chi2/dof = " << (c.dof > 0 ? c.chi_square / c.dof : 0.0) << " ("
                  << c.verdict << ")\n";
    }
    return kExitOk;
}

int cmd_wigner(const RunConfig& cfg, const std::string& state_path, const std::string& mode,
               bool quiet) {
    const TwoModeState state = load_input_state(state_path);
    ModeIndex index;
    if (mode == "upper") {
        index = ModeIndex::UpperSideband;
    } else if (mode == "lower") {
        index = ModeIndex::LowerSideband;
    } else {
        throw ConfigError("wigner: unknown mode '" + mode + "'");
    }
    const SingleModeMarginal marginal = single_mode_marginal(state, index);
    std::ostringstream csv;
    csv << "p,q,w\n";
    for (double p : grid_points(cfg.wigner_grid)) {
        for (double q : grid_points(cfg.wigner_grid)) {
            csv << io::format_double(p) << ',' << io::format_double(q) << ','
                << io::format_double(wigner_eval(marginal, p, q)) << '\n';
        }
    }
    io::write_text_atomic(out_path(cfg, "wigner_" + mode + ".csv"), csv.str());
    if (!quiet) {
        std::cout << "wigner " << mode << ": var_p = " << marginal.cov(0, 0)
                  << ", var_q = " << marginal.cov(1, 1) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral-sideband measurement simulator and tomography toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "Output directory (overrides config)");
    app.add_option("--seed", seed, "RNG seed (overrides config)");
    app.add_flag("--quiet", quiet, "Suppress progress output");

    auto* prepare = app.add_subcommand("prepare", "Write a prepared state and energy sidecar");
    std::string stage = "rho";
    prepare->add_option("--stage", stage, "vacuum|psi1|psi2|rho|rho_r");

    auto* scan = app.add_subcommand("scan", "Simulate a measurement scan of a state file");
    std::string technique = "hd";
    std::string scan_state;
    scan->add_option("--technique", technique, "hd|rd|rd-locked");
    scan->add_option("--state", scan_state, "State JSON (default: <out>/state.json)");

    auto* fit = app.add_subcommand("fit", "Fit a model to a scan CSV");
    std::string model = "hd";
    std::string curve_path;
    fit->add_option("--model", model, "hd|rd-power");
    fit->add_option("--curve", curve_path, "Scan CSV file")->required();

    auto* reconstruct = app.add_subcommand("reconstruct", "Recover mean and covariance");
    std::string locked_path;
    bool project = false;
    reconstruct->add_option("--locked", locked_path, "Locked-scan JSON file")->required();
    reconstruct->add_flag("--project", project, "Project the estimate onto physical states");

    auto* compare = app.add_subcommand("compare", "Chi-square verdict between two scan CSVs");
    std::string path_a;
    std::string path_b;
    compare->add_option("a", path_a, "First scan CSV")->required();
    compare->add_option("b", path_b, "Second scan CSV")->required();

    auto* wigner = app.add_subcommand("wigner", "Wigner density grid of a single-mode marginal");
    std::string wigner_state;
    std::string mode = "upper";
    wigner->add_option("--state", wigner_state, "State JSON (default: <out>/state.json)");
    wigner->add_option("--mode", mode, "upper|lower");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        RunConfig cfg = load_config(config_path, seed);
        if (!out_dir.empty()) cfg.out = out_dir;
        if (scan_state.empty()) scan_state = out_path(cfg, "state.json");
        if (wigner_state.empty()) wigner_state = out_path(cfg, "state.json");

        if (prepare->parsed()) return cmd_prepare(cfg, stage, quiet);
        if (scan->parsed()) return cmd_scan(cfg, technique, scan_state, quiet);
        if (fit->parsed()) return cmd_fit(cfg, model, curve_path, quiet);
        if (reconstruct->parsed()) return cmd_reconstruct(cfg, locked_path, project, quiet);
        if (compare->parsed()) return cmd_compare(cfg, path_a, path_b, quiet);
        if (wigner->parsed()) return cmd_wigner(cfg, wigner_state, mode, quiet);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const io::FileError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const io::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
