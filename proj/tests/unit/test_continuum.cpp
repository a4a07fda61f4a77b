#include "zngauge/continuum.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace zngauge;

namespace {

std::vector<CriticalPoint> fixture(int n) {
    std::ifstream f(std::string(ZNGAUGE_DATA_DIR) + "/fixtures/critical_line_n" + std::to_string(n) + ".csv");
    if(!f) throw std::runtime_error("missing fixture");
    return read_critical_line_csv(f);
}

}  // namespace

TEST(Continuum, ExactSquareRootLine) {
    std::vector<CriticalPoint> pts;
    for(double t : {0.0, 0.5, 1.0, 2.0, 4.0, 9.0}) pts.push_back({t, 1.0 + 2.0 * std::sqrt(t), 0.025});
    const auto fit = fit_critical_line(pts);
    EXPECT_NEAR(fit.value("m0"), 1.0, 1e-12);
    EXPECT_NEAR(fit.value("alpha"), 2.0, 1e-12);
    EXPECT_NEAR(fit.value("beta"), 0.0, 1e-12);
    EXPECT_EQ(fit.dof, 3);
    EXPECT_NEAR(fit.chi2, 0.0, 1e-18);
}

TEST(Continuum, ScaleCovariance) {
    std::vector<CriticalPoint> a, b;
    const double s = 1.7;
    for(double t : {0.0, 0.3, 1.1, 2.0, 5.0, 8.0}) {
        const double m = -0.4 + 0.8 * std::sqrt(t) - 0.05 * t + 0.01 * std::sin(7 * t);
        a.push_back({t, m, 0.025});
        b.push_back({t * s * s, m, 0.025});
    }
    const auto fa = fit_critical_line(a);
    const auto fb = fit_critical_line(b);
    EXPECT_NEAR(fb.value("m0"), fa.value("m0"), 1e-12);
    // t -> s^2 t rescales the basis, so alpha -> alpha / s and beta -> beta / s^2
    EXPECT_NEAR(fb.value("alpha") * s, fa.value("alpha"), 1e-12);
    EXPECT_NEAR(fb.value("beta") * s * s, fa.value("beta"), 1e-12);
}

TEST(Continuum, CovarianceIsSymmetricPositive) {
    const auto fit = fit_critical_line(fixture(4));
    EXPECT_TRUE(fit.covariance.isApprox(fit.covariance.transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.covariance);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_GE(fit.dof, 1);
}

TEST(Continuum, RejectsDegenerateInput) {
    std::vector<CriticalPoint> same(5, CriticalPoint{1.0, 0.3, 0.025});
    EXPECT_THROW(fit_critical_line(same), std::invalid_argument);
    std::vector<CriticalPoint> three{{0, 0, 0.025}, {1, 1, 0.025}, {2, 2, 0.025}};
    EXPECT_THROW(fit_critical_line(three), std::invalid_argument);
    std::vector<CriticalPoint> zero_sigma{{0, 0, 0.0}, {1, 1, 0.025}, {2, 2, 0.025}, {3, 2, 0.025}};
    EXPECT_THROW(fit_critical_line(zero_sigma), std::invalid_argument);
}

TEST(Continuum, EvenInterceptsMatchAnalyticMass) {
    for(int n : {2, 4, 6, 8}) {
        const auto fit = fit_critical_line(fixture(n));
        EXPECT_LT(std::abs(fit.value("m0") - analytic_t0_mass(n)), 3.0 * fit.error("m0")) << "n=" << n;
    }
}

TEST(Continuum, AnalyticMass) {
    EXPECT_NEAR(analytic_t0_mass(3), -1.0472, 1e-4);
    EXPECT_EQ(analytic_t0_mass(4), 0.0);
    EXPECT_NEAR(analytic_t0_mass(7), -0.4488, 1e-4);
    EXPECT_THROW(analytic_t0_mass(1), std::invalid_argument);
}

TEST(Continuum, LargeNExtrapolation) {
    const std::vector<AlphaPoint> odd{{3, -0.603, 0.001}, {5, -0.494, 0.004}, {7, -0.435, 0.003}};
    const auto fo = extrapolate_large_n(odd, Parity::odd);
    EXPECT_NEAR(fo.d, -0.83, 0.10);
    EXPECT_NEAR(fo.m_c, fo.d / std::sqrt(2 * std::numbers::pi), 1e-15);
    const std::vector<AlphaPoint> even{{4, 0.626, 0.005}, {6, 0.543, 0.005}, {8, 0.503, 0.004}};
    EXPECT_NEAR(extrapolate_large_n(even, Parity::even).d, 0.84, 0.17);
    EXPECT_THROW(extrapolate_large_n(even, Parity::odd), std::invalid_argument);
    const auto fixed = extrapolate_large_n(odd, Parity::odd, 0.0);
    EXPECT_TRUE(fixed.b_fixed);
    EXPECT_EQ(fixed.b, 0.0);
    EXPECT_EQ(fixed.fit.coefficients.size(), 1);
}

TEST(Continuum, ExactLargeNInputs) {
    std::vector<AlphaPoint> pts;
    for(int n : {3, 5, 7, 9}) pts.push_back({n, 0.1 - 0.8 / std::sqrt(n), 0.01});
    const auto f = extrapolate_large_n(pts, Parity::odd);
    EXPECT_NEAR(f.b, 0.1, 1e-12);
    EXPECT_NEAR(f.d, -0.8, 1e-12);
}

TEST(Continuum, CsvRejectsBadRows) {
    std::stringstream bad("t,m_c,sigma\n0.1,abc,0.025\n");
    EXPECT_THROW(read_critical_line_csv(bad), std::runtime_error);
    std::stringstream header("x,y\n");
    EXPECT_THROW(read_critical_line_csv(header), std::runtime_error);
}
