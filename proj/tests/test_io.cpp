#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <numbers>

#include "sideband/io.hpp"
#include "sideband/preparation.hpp"
#include "support.hpp"

using namespace sideband;
using sideband::testing::linspace;
using sideband::testing::random_physical_state;

namespace {

const CavityParams kAnalysis{0.04, 6.0, Coupling::Overcoupled, 0.935};
constexpr double kOog = 17.0 / 6.0;

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("sideband-io-" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("double formatting survives a round trip") {
    for (double v : {0.0, 1.0, -1.0 / 3.0, 1e-300, 6.02214076e23, std::numbers::pi}) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
}

TEST_CASE("state files") {
    TempDir dir;
    SUBCASE("JSON round trip is bit exact") {
        RngStream rng(8);
        const TwoModeState s = random_physical_state(rng);
        const TwoModeState back = io::state_from_json(io::state_to_json(s));
        CHECK(back.mean == s.mean);
        CHECK(back.cov == s.cov);
        CHECK(back.basis == s.basis);
    }
    SUBCASE("plus/minus basis tag is preserved") {
        const TwoModeState pm = to_plus_minus(prepare_rho({0.0, 0.5, 1.0}));
        const TwoModeState back = io::state_from_json(io::state_to_json(pm));
        CHECK(back.basis == Basis::PlusMinus);
        CHECK(back.cov == pm.cov);
    }
    SUBCASE("save and load through a file") {
        const TwoModeState s = prepare_rho({{0.3, -0.2}, 0.5, 1.0});
        io::save_state(s, dir.file("state.json"));
        const TwoModeState back = io::load_state(dir.file("state.json"));
        CHECK(back.mean == s.mean);
        CHECK(back.cov == s.cov);
    }
    SUBCASE("schema violations reported") {
        CHECK_THROWS_AS(io::state_from_json("{}"), io::ParseError);
        CHECK_THROWS_AS(io::state_from_json("not json"), io::ParseError);
        CHECK_THROWS_AS(
            io::state_from_json(R"({"mean":[0,0,0],"cov":[[1]],"basis":"sideband"})"),
            io::ParseError);
        CHECK_THROWS_AS(io::load_state(dir.file("missing.json")), io::FileError);
    }
}

TEST_CASE("curve files") {
    TempDir dir;
    const TwoModeState rho = prepare_rho({0.0, 0.5, 1.0});
    const ScanCurve noiseless = rd_scan(rho, kAnalysis, linspace(-5.0, 5.0, 21), kOog);
    const ScanCurve noisy =
        hd_scan(rho, linspace(0.0, std::numbers::pi, 21), 1.0, NoiseModel{200, 4});

    SUBCASE("CSV round trip is bit exact") {
        for (const ScanCurve& c : {noiseless, noisy}) {
            const ScanCurve back = io::curve_from_csv(io::curve_to_csv(c));
            CHECK(back.kind == c.kind);
            CHECK(back.abscissa == c.abscissa);
            CHECK(back.values == c.values);
            CHECK(back.sigma == c.sigma);
        }
    }
    SUBCASE("CSV header names the columns") {
        CHECK(io::curve_to_csv(noisy).rfind("kind,abscissa,value,sigma\n", 0) == 0);
    }
    SUBCASE("JSON round trip is bit exact") {
        const ScanCurve back = io::curve_from_json(io::curve_to_json(noisy));
        CHECK(back.kind == noisy.kind);
        CHECK(back.values == noisy.values);
        CHECK(back.sigma == noisy.sigma);
    }
    SUBCASE("file round trip") {
        io::save_curve_csv(noisy, dir.file("scan.csv"));
        const ScanCurve back = io::load_curve_csv(dir.file("scan.csv"));
        CHECK(back.values == noisy.values);
    }
    SUBCASE("malformed CSV errors carry the line number") {
        const std::string bad =
            "kind,abscissa,value,sigma\n"
            "homodyne_phase,0.0,1.0,0.0\n"
            "homodyne_phase,oops,1.0,0.0\n";
        try {
            io::curve_from_csv(bad);
            FAIL("expected ParseError");
        } catch (const io::ParseError& e) {
            CHECK(std::string(e.what()).find("3") != std::string::npos);
        }
        CHECK_THROWS_AS(io::curve_from_csv("wrong,header\n"), io::ParseError);
        CHECK_THROWS_AS(
            io::curve_from_csv("kind,abscissa,value,sigma\nmystery_kind,0,1,0\n"),
            io::ParseError);
    }
}

TEST_CASE("locked scan files") {
    const TwoModeState rho = prepare_rho({{0.2, 0.1}, 0.5, 1.0});
    const auto samples =
        rd_locked_scan(rho, kAnalysis, linspace(-6.0, 6.0, 31), kOog, NoiseModel{200, 9});
    const std::string text = io::locked_scan_to_json(samples, kAnalysis, kOog);
    const io::LockedScanFile back = io::locked_scan_from_json(text);
    REQUIRE(back.samples.size() == samples.size());
    CHECK(back.omega_over_gamma == kOog);
    CHECK(back.cavity.eta == kAnalysis.eta);
    CHECK(back.cavity.coupling == kAnalysis.coupling);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(back.samples[i].delta == samples[i].delta);
        CHECK(back.samples[i].moments.mean_cos == samples[i].moments.mean_cos);
        CHECK(back.samples[i].moments.var_sin == samples[i].moments.var_sin);
        CHECK(back.samples[i].sigma.cov_cossin == samples[i].sigma.cov_cossin);
    }
    // round-tripped data feeds reconstruction unchanged
    const ReconstructionResult a = reconstruct_covariance(samples, kAnalysis, kOog);
    const ReconstructionResult b =
        reconstruct_covariance(back.samples, back.cavity, back.omega_over_gamma);
    CHECK((a.state.cov - b.state.cov).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("report serialization stays valid JSON") {
    const TwoModeState rho = prepare_rho({0.0, 0.5, 1.0});
    const ScanCurve curve = hd_scan(rho, linspace(0.0, std::numbers::pi, 21));
    const FitReport fit = fit_hd_curve(curve);
    const std::string fit_json = io::fit_report_to_json(fit);
    CHECK(fit_json.find("\"coefficients\"") != std::string::npos);
    CHECK(fit_json.find("\"residual_rms\"") != std::string::npos);

    ScanCurve other = curve;
    other.values[0] += 1.0;
    const Comparison cmp = compare_states(curve, other);
    const std::string cmp_json = io::comparison_to_json(cmp);
    // infinite chi-square must not break the JSON container
    CHECK(cmp_json.find("inf") == std::string::npos);
    CHECK(cmp_json.find("null") != std::string::npos);

    const auto locked = rd_locked_scan(rho, kAnalysis, linspace(-6.0, 6.0, 31), kOog);
    const ReconstructionResult rec = reconstruct_covariance(locked, kAnalysis, kOog);
    const std::string rec_json = io::reconstruction_to_json(rec);
    CHECK(rec_json.find("\"purity\"") != std::string::npos);
    CHECK(rec_json.find("\"cov\"") != std::string::npos);
}

TEST_CASE("atomic writes leave no partial files") {
    TempDir dir;
    const std::string target = dir.file("out.txt");
    io::write_text_atomic(target, "hello\n");
    CHECK(io::read_text(target) == "hello\n");
    io::write_text_atomic(target, "replaced\n");
    CHECK(io::read_text(target) == "replaced\n");
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path)) {
        (void)entry;
        ++files;
    }
    CHECK(files == 1);
    CHECK_THROWS_AS(io::write_text_atomic(dir.file("no/such/dir/x.txt"), "x"), io::FileError);
}
