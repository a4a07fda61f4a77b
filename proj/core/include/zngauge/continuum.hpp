#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zngauge {

/// Weighted linear least-squares result. The covariance is (A^T W A)^{-1}
/// scaled by max(1, chi2 / dof), so a poor fit never shrinks the errors.
struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance;
    std::vector<double> residuals;  ///< data - model
    std::vector<double> pulls;      ///< residual / sigma
    double chi2 = 0.0;
    int dof = 0;

    double value(const std::string &name) const;
    double error(const std::string &name) const;
};

/// Linear model y = sum_j c_j f_j(x_i) with per-point sigma. Needs more points
/// than coefficients; throws on rank deficiency.
FitResult weighted_least_squares(const Eigen::MatrixXd &design, std::span<const double> y, std::span<const double> sigma,
                                 std::vector<std::string> names);

struct CriticalPoint {
    double t = 0.0;
    double m_c = 0.0;
    double sigma = 0.025;
};

/// m_c(t) = m0 + alpha sqrt(t) + beta t; coefficients named m0, alpha, beta.
FitResult fit_critical_line(std::span<const CriticalPoint> points);
std::vector<CriticalPoint> read_critical_line_csv(std::istream &is);

enum class Parity { odd, even };

struct AlphaPoint {
    int n = 0;
    double alpha = 0.0;
    double sigma = 0.0;
};

struct LargeNFit {
    FitResult fit;         ///< coefficients b (unless fixed) and d
    double b = 0.0;
    double b_err = 0.0;
    double d = 0.0;
    double d_err = 0.0;
    double m_c = 0.0;      ///< d / sqrt(2 pi)
    double m_c_err = 0.0;
    bool b_fixed = false;
};

/// alpha_n = b + d / sqrt(n) over points of one parity; needs three points.
/// With `fixed_b` the intercept is held at that value.
LargeNFit extrapolate_large_n(std::span<const AlphaPoint> alphas, Parity parity, std::optional<double> fixed_b = std::nullopt);

/// t -> 0 critical mass: -pi/n for odd n, 0 for even n.
double analytic_t0_mass(int n);

}  // namespace zngauge
