#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sideband/detection.hpp"
#include "sideband/preparation.hpp"
#include "support.hpp"

using namespace sideband;
using sideband::testing::linspace;
using sideband::testing::random_physical_state;

namespace {

const CavityParams kAnalysis{0.04, 6.0, Coupling::Overcoupled, 0.935};
constexpr double kOog = 17.0 / 6.0;

}  // namespace

TEST_CASE("homodyne noise power") {
    SUBCASE("vacuum is flat at the SQL") {
        for (double phi : linspace(0.0, std::numbers::pi, 50)) {
            CHECK(std::abs(s_hd(vacuum(), phi) - 1.0) < 1e-14);
        }
    }
    SUBCASE("balanced thermal fringe") {
        const double beta0_sq = 0.7;
        const TwoModeState rho_r = prepare_rho_r(beta0_sq);
        CHECK(s_hd(rho_r, 0.0) == doctest::Approx(1.0 + 4.0 * beta0_sq).epsilon(1e-12));
        CHECK(s_hd(rho_r, std::numbers::pi / 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("visibility mixes toward shot noise") {
        const TwoModeState rho_r = prepare_rho_r(0.7);
        const double v = 0.91;
        const double full = s_hd(rho_r, 0.3, 1.0);
        CHECK(s_hd(rho_r, 0.3, v) == doctest::Approx(1.0 + v * v * (full - 1.0)).epsilon(1e-12));
        // fringe contrast approaches the visibility bound for bright modulation
        const TwoModeState bright = prepare_rho_r(50.0);
        const double smax = s_hd(bright, 0.0, v);
        const double smin = s_hd(bright, std::numbers::pi / 2.0, v);
        CHECK((smax - smin) / (smax + smin) > 0.91);
    }
    SUBCASE("nonphysical state rejected") {
        TwoModeState bad = vacuum();
        bad.cov *= 0.1;
        CHECK_THROWS_AS(s_hd(bad, 0.0), std::domain_error);
    }
}

TEST_CASE("homodyne scan") {
    const std::vector<double> grid = linspace(0.0, std::numbers::pi, 100);
    SUBCASE("vacuum scan is all ones") {
        const ScanCurve curve = hd_scan(vacuum(), grid);
        for (double v : curve.values) CHECK(std::abs(v - 1.0) < 1e-14);
        CHECK(curve.kind == ScanKind::HomodynePhase);
    }
    SUBCASE("blind to the canonical representative") {
        RngStream rng(3);
        for (int i = 0; i < 10; ++i) {
            const TwoModeState s = random_physical_state(rng);
            const TwoModeState mimic = canonical_hd_state(hd_coefficients(s));
            const ScanCurve a = hd_scan(s, grid);
            const ScanCurve b = hd_scan(mimic, grid);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                CHECK(std::abs(a.values[k] - b.values[k]) < 1e-12);
            }
        }
    }
    SUBCASE("seeded scans repeat bit for bit") {
        const TwoModeState rho_r = prepare_rho_r(1.0);
        const NoiseModel noise{200, 12345};
        const ScanCurve a = hd_scan(rho_r, grid, 1.0, noise);
        const ScanCurve b = hd_scan(rho_r, grid, 1.0, noise);
        CHECK(a.values == b.values);
        CHECK(a.sigma == b.sigma);
        const ScanCurve c = hd_scan(rho_r, grid, 1.0, NoiseModel{200, 54321});
        CHECK(a.values != c.values);
    }
    SUBCASE("thread count does not change the result") {
        const TwoModeState rho_r = prepare_rho_r(1.0);
        const NoiseModel noise{200, 99};
        const ScanCurve a = hd_scan(rho_r, grid, 1.0, noise, 1);
        const ScanCurve b = hd_scan(rho_r, grid, 1.0, noise, 8);
        CHECK(a.values == b.values);
    }
}

TEST_CASE("resonator photocurrent moments") {
    SUBCASE("vacuum closure") {
        for (double d : linspace(-7.0, 7.0, 29)) {
            const PhotocurrentMoments m = rd_moments(vacuum(), kAnalysis, d, kOog);
            CHECK(std::abs(m.mean_cos) < 1e-14);
            CHECK(std::abs(m.mean_sin) < 1e-14);
            CHECK(m.var_cos == doctest::Approx(2.0).epsilon(1e-13));
            CHECK(m.var_sin == doctest::Approx(2.0).epsilon(1e-13));
            CHECK(std::abs(m.cov_cossin) < 1e-13);
        }
    }
    SUBCASE("far off resonance the displaced pair beats at full strength") {
        const double beta = 1.7;
        const TwoModeState psi1 = prepare_psi1(beta);
        const PhotocurrentMoments m = rd_moments(psi1, kAnalysis, 1e5, kOog);
        CHECK(m.mean_cos == doctest::Approx(4.0 * beta).epsilon(1e-4));
        CHECK(std::abs(m.mean_sin) < 1e-3);
    }
    SUBCASE("displacement angle alternates between the cos and sin channels") {
        const double amp = 2.0;
        for (double theta : linspace(0.0, 2.0 * std::numbers::pi, 9)) {
            const TwoModeState psi1 =
                prepare_psi1(amp * std::exp(std::complex<double>(0.0, theta)));
            const PhotocurrentMoments m = rd_moments(psi1, kAnalysis, 1e5, kOog);
            CHECK(m.mean_cos == doctest::Approx(4.0 * amp * std::cos(theta)).epsilon(1e-3));
            CHECK(m.mean_sin == doctest::Approx(4.0 * amp * std::sin(theta)).epsilon(1e-3));
        }
    }
    SUBCASE("first moments are the linear forms of the coefficient vectors") {
        RngStream rng(21);
        for (int i = 0; i < 10; ++i) {
            const TwoModeState s = random_physical_state(rng);
            const double d = -5.0 + 10.0 * rng.uniform();
            const SidebandResponse resp = sideband_response(kAnalysis, d, kOog);
            const auto [u, v] = rd_coefficient_vectors(resp);
            const PhotocurrentMoments m = rd_moments(s, kAnalysis, d, kOog);
            CHECK(m.mean_cos == doctest::Approx(u.dot(s.mean)).epsilon(1e-12));
            CHECK(m.mean_sin == doctest::Approx(v.dot(s.mean)).epsilon(1e-12));
        }
    }
}

TEST_CASE("resonator noise power") {
    SUBCASE("vacuum is flat over the scan") {
        const ScanCurve curve = rd_scan(vacuum(), kAnalysis, linspace(-8.0, 8.0, 200), kOog);
        for (double v : curve.values) CHECK(std::abs(v - 1.0) < 1e-13);
    }
    SUBCASE("far-detuning limit matches direct detection of the + mode pair") {
        // With both sidebands fully reflected the scheme measures the phi = 0
        // homodyne combination, (Var p_+ + Var q_-)/2 = a/2.
        RngStream rng(13);
        for (int i = 0; i < 10; ++i) {
            const TwoModeState s = random_physical_state(rng);
            const HDCoefficients c = hd_coefficients(s);
            CHECK(s_rd(s, kAnalysis, 1e6, kOog) == doctest::Approx(c.a / 2.0).epsilon(1e-5));
            CHECK(s_rd(s, kAnalysis, 1e6, kOog) ==
                  doctest::Approx(s_hd(s, 0.0)).epsilon(1e-5));
        }
    }
    SUBCASE("four-coefficient expansion matches the moment route") {
        RngStream rng(29);
        for (int i = 0; i < 10; ++i) {
            const TwoModeState s = random_physical_state(rng);
            const EnergySummary e = energy_summary(s);
            const HDCoefficients c = hd_coefficients(s);
            const Eigen::Vector4d coeffs(e.sum, e.imbalance, c.a - c.b, c.c);
            for (double d : linspace(-6.0, 6.0, 31)) {
                const SidebandResponse resp = sideband_response(kAnalysis, d, kOog);
                const double model = 1.0 + rd_basis_weights(resp).dot(coeffs);
                CHECK(s_rd(s, kAnalysis, d, kOog) == doctest::Approx(model).epsilon(1e-10));
            }
        }
    }
    SUBCASE("imbalance separates the benchmark state from its mimic") {
        const TwoModeState rho = prepare_rho({0.0, 10.0 / 19.0, 2.0});
        const TwoModeState mimic = canonical_hd_state(hd_coefficients(rho));
        const std::vector<double> grid = linspace(-6.0, 6.0, 241);
        const ScanCurve a = rd_scan(rho, kAnalysis, grid, kOog);
        const ScanCurve b = rd_scan(mimic, kAnalysis, grid, kOog);
        double best = 0.0;
        double best_delta = 0.0;
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            const double diff = std::abs(a.values[k] - b.values[k]);
            if (diff > best) {
                best = diff;
                best_delta = a.abscissa[k];
            }
        }
        CHECK(best > 0.1);
        CHECK(std::abs(std::abs(best_delta) - kOog) < 0.3);
    }
    SUBCASE("seeded detuning scan reproducible") {
        const TwoModeState rho = prepare_rho({0.0, 0.5, 1.0});
        const NoiseModel noise{100, 7};
        const ScanCurve a = rd_scan(rho, kAnalysis, linspace(-5.0, 5.0, 51), kOog, noise);
        const ScanCurve b = rd_scan(rho, kAnalysis, linspace(-5.0, 5.0, 51), kOog, noise, 4);
        CHECK(a.values == b.values);
    }
}

TEST_CASE("locked scan") {
    const std::vector<double> grid = linspace(-8.0, 8.0, 41);
    SUBCASE("noiseless moments match the pointwise forward model") {
        const TwoModeState rho = prepare_rho({0.0, 0.5, 1.0});
        const auto samples = rd_locked_scan(rho, kAnalysis, grid, kOog);
        REQUIRE(samples.size() == grid.size());
        for (const LockedSample& s : samples) {
            const PhotocurrentMoments m = rd_moments(rho, kAnalysis, s.delta, kOog);
            CHECK(s.moments.var_cos == doctest::Approx(m.var_cos).epsilon(1e-14));
            CHECK(s.sigma.var_cos == 0.0);
        }
    }
    SUBCASE("noisy locked scan is seeded and thread independent") {
        const TwoModeState rho = prepare_rho({0.0, 0.5, 1.0});
        const NoiseModel noise{200, 31};
        const auto a = rd_locked_scan(rho, kAnalysis, grid, kOog, noise, 1);
        const auto b = rd_locked_scan(rho, kAnalysis, grid, kOog, noise, 8);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].moments.var_cos == b[i].moments.var_cos);
            CHECK(a[i].moments.mean_sin == b[i].moments.mean_sin);
            CHECK(a[i].sigma.cov_cossin == b[i].sigma.cov_cossin);
        }
    }
}

TEST_CASE("estimation noise model") {
    SUBCASE("sigma shrinks with the sample count") {
        RngStream rng(1);
        auto [noisy201, sigma201] = add_estimation_noise(1.0, 201, rng);
        CHECK(sigma201 == doctest::Approx(0.1).epsilon(1e-12));
        auto [noisy_big, sigma_big] = add_estimation_noise(1.0, 2000001, rng);
        CHECK(sigma_big == doctest::Approx(1e-3).epsilon(1e-12));
        CHECK(noisy_big == doctest::Approx(1.0).epsilon(1e-2));
    }
    SUBCASE("seeded draws repeat") {
        RngStream a(9);
        RngStream b(9);
        for (int i = 0; i < 5; ++i) {
            CHECK(add_estimation_noise(2.0, 50, a) == add_estimation_noise(2.0, 50, b));
        }
    }
    SUBCASE("invalid inputs rejected") {
        RngStream rng(2);
        CHECK_THROWS_AS(add_estimation_noise(1.0, 1, rng), std::invalid_argument);
        CHECK_THROWS_AS(add_estimation_noise(-1.0, 10, rng), std::invalid_argument);
    }
}
