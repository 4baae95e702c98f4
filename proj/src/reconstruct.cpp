#include "sideband/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sideband {

namespace {

constexpr double kRankTolerance = 1e-10;  // singular values below tol*largest are zero

Eigen::VectorXd quad_form_row(const Eigen::Vector4d& u, const Eigen::Vector4d& v) {
    const auto& order = cov_param_order();
    Eigen::VectorXd row(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto [i, j] = order[k];
        row[k] = (i == j) ? u[i] * v[i] : u[i] * v[j] + u[j] * v[i];
    }
    return row;
}

// Linear part of s_hd over the 10 covariance entries at one phase.
Eigen::VectorXd hd_design_row(double phi) {
    const Eigen::Matrix4d t = plus_minus_transform();
    const auto& order = cov_param_order();
    Eigen::VectorXd row(order.size());
    const double c2 = 0.5 * std::cos(phi) * std::cos(phi);
    const double s2 = 0.5 * std::sin(phi) * std::sin(phi);
    const double cs = 0.5 * std::sin(2.0 * phi);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto [i, j] = order[k];
        Eigen::Matrix4d e = Eigen::Matrix4d::Zero();
        e(i, j) = e(j, i) = 1.0;
        const Eigen::Matrix4d w = t * e * t.transpose();
        const double a = w(0, 0) + w(3, 3);
        const double b = w(2, 2) + w(1, 1);
        const double c = w(0, 1) - w(2, 3);
        row[k] = c2 * a + s2 * b + cs * c;
    }
    return row;
}

std::string format_directions(const Eigen::MatrixXd& null_space) {
    std::ostringstream os;
    const auto& order = cov_param_order();
    for (int c = 0; c < null_space.cols(); ++c) {
        os << "\n  direction " << c << ":";
        for (int k = 0; k < null_space.rows(); ++k) {
            if (std::abs(null_space(k, c)) > 1e-6) {
                os << " " << null_space(k, c) << "*cov(" << order[k].first << ","
                   << order[k].second << ")";
            }
        }
    }
    return os.str();
}

}  // namespace

const std::vector<std::pair<int, int>>& cov_param_order() {
    static const std::vector<std::pair<int, int>> order = {
        {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}};
    return order;
}

Eigen::VectorXd cov_to_params(const Eigen::Matrix4d& cov) {
    const auto& order = cov_param_order();
    Eigen::VectorXd p(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        p[k] = cov(order[k].first, order[k].second);
    }
    return p;
}

Eigen::Matrix4d params_to_cov(const Eigen::VectorXd& params) {
    const auto& order = cov_param_order();
    Eigen::Matrix4d cov;
    for (std::size_t k = 0; k < order.size(); ++k) {
        cov(order[k].first, order[k].second) = params[k];
        cov(order[k].second, order[k].first) = params[k];
    }
    return cov;
}

FitReport linear_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& sigma,
                               const std::vector<std::string>& names) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (y.size() != n || (sigma.size() != 0 && sigma.size() != n)) {
        throw std::invalid_argument("linear_least_squares: size mismatch");
    }
    const bool weighted = sigma.size() == n && sigma.maxCoeff() > 0.0;
    Eigen::MatrixXd xw = design;
    Eigen::VectorXd yw = y;
    if (weighted) {
        if (sigma.minCoeff() <= 0.0) {
            throw std::invalid_argument(
                "linear_least_squares: mixed zero and nonzero uncertainties");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            xw.row(i) /= sigma[i];
            yw[i] /= sigma[i];
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(xw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = kRankTolerance * sv[0];
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv[k] > cutoff) ++rank;
    }
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (int k = 0; k < rank; ++k) inv[k] = 1.0 / sv[k];

    FitReport report;
    report.names = names;
    report.coefficients =
        svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * yw;
    report.design_rank = rank;
    report.condition_number =
        (rank > 0) ? sv[0] / sv[rank - 1] : std::numeric_limits<double>::infinity();

    const Eigen::VectorXd residual = design * report.coefficients - y;
    report.residual_rms = std::sqrt(residual.squaredNorm() / n);

    // (X^T W X)^+ from the SVD factors; for the unweighted case scale by the
    // residual variance estimate.
    Eigen::MatrixXd cov = svd.matrixV() * inv.cwiseProduct(inv).asDiagonal() *
                          svd.matrixV().transpose();
    if (!weighted) {
        const Eigen::Index dof = n - rank;
        const double s2 = (dof > 0) ? residual.squaredNorm() / dof : 0.0;
        cov *= s2;
    }
    report.coeff_covariance = cov;
    return report;
}

FitReport fit_hd_curve(const ScanCurve& curve) {
    if (curve.kind != ScanKind::HomodynePhase) {
        throw std::invalid_argument("fit_hd_curve: curve is not a homodyne phase scan");
    }
    const std::size_t n = curve.abscissa.size();
    if (n < 4) {
        throw std::invalid_argument("fit_hd_curve: need at least 4 points");
    }
    const auto [lo, hi] =
        std::minmax_element(curve.abscissa.begin(), curve.abscissa.end());
    if (*hi - *lo <= std::numbers::pi / 2.0) {
        throw std::domain_error("fit_hd_curve: phase grid spans <= pi/2");
    }
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd y(n);
    Eigen::VectorXd sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = curve.abscissa[i];
        design(i, 0) = 1.0;
        design(i, 1) = std::cos(2.0 * phi);
        design(i, 2) = std::sin(2.0 * phi);
        y[i] = curve.values[i];
        sigma[i] = curve.sigma[i];
    }
    FitReport base = linear_least_squares(design, y, sigma, {"c0", "c1", "c2"});
    if (base.design_rank < 3) {
        throw std::domain_error("fit_hd_curve: rank-deficient phase grid");
    }
    // S = (a+b)/4 + (a-b)/4 cos 2phi + c/2 sin 2phi  =>  invert to (a, b, c).
    Eigen::Matrix3d j;
    j << 2.0, 2.0, 0.0,
         2.0, -2.0, 0.0,
         0.0, 0.0, 2.0;
    FitReport report = base;
    report.names = {"A", "B", "C"};
    report.coefficients = j * base.coefficients;
    report.coeff_covariance = j * base.coeff_covariance * j.transpose();
    return report;
}

FitReport fit_rd_power_curve(const ScanCurve& curve, const CavityParams& cavity,
                             double omega_over_gamma) {
    if (curve.kind != ScanKind::ResonatorDetuning) {
        throw std::invalid_argument("fit_rd_power_curve: curve is not a detuning scan");
    }
    const std::size_t n = curve.abscissa.size();
    if (n < 4) {
        throw std::invalid_argument("fit_rd_power_curve: need at least 4 points");
    }
    Eigen::MatrixXd design(n, 4);
    Eigen::VectorXd y(n);
    Eigen::VectorXd sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SidebandResponse resp =
            sideband_response(cavity, curve.abscissa[i], omega_over_gamma);
        design.row(i) = rd_basis_weights(resp).transpose();
        y[i] = curve.values[i] - 1.0;
        sigma[i] = curve.sigma[i];
    }
    return linear_least_squares(design, y, sigma,
                                {"energy_sum", "energy_imbalance", "a_minus_b", "c"});
}

ReconstructionResult reconstruct_covariance(const std::vector<LockedSample>& locked,
                                            const CavityParams& cavity,
                                            double omega_over_gamma,
                                            bool project_physical) {
    if (locked.size() < 4) {
        throw std::invalid_argument("reconstruct_covariance: need at least 4 grid points");
    }
    const std::size_t n = locked.size();
    Eigen::MatrixXd cov_design(3 * n, 10);
    Eigen::VectorXd cov_y(3 * n);
    Eigen::VectorXd cov_sigma(3 * n);
    Eigen::MatrixXd mean_design(2 * n, 4);
    Eigen::VectorXd mean_y(2 * n);
    Eigen::VectorXd mean_sigma(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const SidebandResponse resp =
            sideband_response(cavity, locked[i].delta, omega_over_gamma);
        const auto [u, v] = rd_coefficient_vectors(resp);
        const double closure = 2.0 - resp.g_plus;
        const PhotocurrentMoments& m = locked[i].moments;
        const PhotocurrentMoments& s = locked[i].sigma;
        cov_design.row(3 * i + 0) = quad_form_row(u, u).transpose();
        cov_design.row(3 * i + 1) = quad_form_row(v, v).transpose();
        cov_design.row(3 * i + 2) = quad_form_row(u, v).transpose();
        cov_y[3 * i + 0] = m.var_cos - closure;
        cov_y[3 * i + 1] = m.var_sin - closure;
        cov_y[3 * i + 2] = m.cov_cossin;
        cov_sigma[3 * i + 0] = s.var_cos;
        cov_sigma[3 * i + 1] = s.var_sin;
        cov_sigma[3 * i + 2] = s.cov_cossin;
        mean_design.row(2 * i + 0) = u.transpose();
        mean_design.row(2 * i + 1) = v.transpose();
        mean_y[2 * i + 0] = m.mean_cos;
        mean_y[2 * i + 1] = m.mean_sin;
        mean_sigma[2 * i + 0] = s.mean_cos;
        mean_sigma[2 * i + 1] = s.mean_sin;
    }
    std::vector<std::string> names;
    for (const auto& [i, j] : cov_param_order()) {
        names.push_back("cov_" + std::to_string(i) + std::to_string(j));
    }
    FitReport report = linear_least_squares(cov_design, cov_y, cov_sigma, names);
    if (report.design_rank < 10) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(cov_design, Eigen::ComputeFullV);
        const Eigen::MatrixXd null_space =
            svd.matrixV().rightCols(10 - report.design_rank);
        throw std::domain_error(
            "reconstruct_covariance: under-determined scan (rank " +
            std::to_string(report.design_rank) + " of 10); unresolved directions:" +
            format_directions(null_space));
    }
    const FitReport mean_report =
        linear_least_squares(mean_design, mean_y, mean_sigma,
                             {"mean_pu", "mean_qu", "mean_pl", "mean_ql"});

    ReconstructionResult result;
    result.state.mean = mean_report.coefficients;
    result.state.cov = params_to_cov(report.coefficients);
    result.report = report;

    if (project_physical) {
        const Eigen::Matrix4d raw = result.state.cov;
        const std::complex<double> im(0.0, 1.0);
        const Eigen::Matrix4cd sigma_c =
            im * symplectic_form().cast<std::complex<double>>();
        for (int iter = 0; iter < 200; ++iter) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(
                result.state.cov.cast<std::complex<double>>() + sigma_c);
            if (solver.eigenvalues().minCoeff() >= -1e-9) break;
            Eigen::Vector4cd clipped =
                solver.eigenvalues().cwiseMax(0.0).cast<std::complex<double>>();
            const Eigen::Matrix4cd h = solver.eigenvectors() * clipped.asDiagonal() *
                                       solver.eigenvectors().adjoint();
            const Eigen::Matrix4d real_part = (h - sigma_c).real();
            result.state.cov = 0.5 * (real_part + real_part.transpose());
        }
        result.projection_distance = (result.state.cov - raw).norm();
    }

    result.energies = energy_summary(result.state);
    const double det = result.state.cov.determinant();
    result.purity =
        (det > 0.0) ? 1.0 / std::sqrt(det) : std::numeric_limits<double>::quiet_NaN();
    return result;
}

IdentifiabilityReport identifiability_report(Technique technique,
                                             const std::vector<double>& grid,
                                             const CavityParams& cavity,
                                             double omega_over_gamma) {
    if (grid.empty()) {
        throw std::invalid_argument("identifiability_report: empty grid");
    }
    std::vector<Eigen::VectorXd> rows;
    for (double x : grid) {
        if (technique == Technique::HD) {
            rows.push_back(hd_design_row(x));
            continue;
        }
        if (!carrier_alive(cavity, x)) continue;
        const SidebandResponse resp = sideband_response(cavity, x, omega_over_gamma);
        const auto [u, v] = rd_coefficient_vectors(resp);
        if (technique == Technique::RDPower) {
            rows.push_back((quad_form_row(u, u) + quad_form_row(v, v)) / 4.0);
        } else {
            rows.push_back(quad_form_row(u, u));
            rows.push_back(quad_form_row(v, v));
            rows.push_back(quad_form_row(u, v));
        }
    }
    Eigen::MatrixXd design(rows.size(), 10);
    for (std::size_t i = 0; i < rows.size(); ++i) design.row(i) = rows[i].transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv[k] > kRankTolerance * sv[0]) ++rank;
    }
    IdentifiabilityReport report;
    report.rank = rank;
    report.null_space = svd.matrixV().rightCols(10 - rank);
    return report;
}

Comparison compare_states(const ScanCurve& a, const ScanCurve& b) {
    if (a.kind != b.kind || a.abscissa.size() != b.abscissa.size()) {
        throw std::invalid_argument("compare_states: mismatched curves");
    }
    for (std::size_t i = 0; i < a.abscissa.size(); ++i) {
        if (std::abs(a.abscissa[i] - b.abscissa[i]) > 1e-12) {
            throw std::invalid_argument("compare_states: mismatched grids");
        }
    }
    Comparison cmp;
    cmp.dof = static_cast<int>(a.abscissa.size());
    for (std::size_t i = 0; i < a.abscissa.size(); ++i) {
        const double diff = a.values[i] - b.values[i];
        const double denom = a.sigma[i] * a.sigma[i] + b.sigma[i] * b.sigma[i];
        if (denom > 0.0) {
            cmp.chi_square += diff * diff / denom;
        } else if (diff != 0.0) {
            cmp.chi_square = std::numeric_limits<double>::infinity();
            break;
        }
    }
    const double per_dof = cmp.chi_square / cmp.dof;
    if (per_dof < 1.5) {
        cmp.verdict = "indistinguishable";
    } else if (per_dof > 4.0) {
        cmp.verdict = "distinguishable";
    } else {
        cmp.verdict = "inconclusive";
    }
    return cmp;
}

}  // namespace sideband
