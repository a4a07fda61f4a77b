#include "zngauge/link_algebra.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace zngauge;

namespace {

Eigen::MatrixXcd power(const Eigen::MatrixXcd &m, int k) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    for(int i = 0; i < k; ++i) out = out * m;
    return out;
}

}  // namespace

TEST(LinkAlgebra, EigenvaluesOfZ3) {
    const auto e = electric_eigenvalues(3, 0.0);
    ASSERT_EQ(e.size(), 3U);
    EXPECT_NEAR(e[0], -1.4472, 1e-4);
    EXPECT_NEAR(e[1], 0.0, 1e-15);
    EXPECT_NEAR(e[2], 1.4472, 1e-4);
}

TEST(LinkAlgebra, EigenvaluesOfZ2) {
    const auto e = electric_eigenvalues(2, 0.0);
    EXPECT_NEAR(e[0], -std::sqrt(std::numbers::pi) / 2, 1e-12);
    EXPECT_NEAR(e[1], std::sqrt(std::numbers::pi) / 2, 1e-12);
}

TEST(LinkAlgebra, EigenvaluesWithBackgroundField) {
    const auto e = electric_eigenvalues(3, 1.0 / 3.0);
    // hand evaluation: sqrt(2 pi / 3) * {-2/3, 1/3, 4/3}
    const double q = std::sqrt(2.0 * std::numbers::pi / 3.0);
    EXPECT_NEAR(e[0], -2.0 / 3.0 * q, 1e-12);
    EXPECT_NEAR(e[1], 1.0 / 3.0 * q, 1e-12);
    EXPECT_NEAR(e[2], 4.0 / 3.0 * q, 1e-12);
    EXPECT_NEAR(e[0], -0.9648, 1e-4);
    EXPECT_NEAR(e[2], 1.9297, 1e-4);
}

TEST(LinkAlgebra, RejectsTrivialGroup) {
    EXPECT_THROW(electric_eigenvalues(1, 0.0), std::invalid_argument);
    EXPECT_THROW(weyl_pair(1), std::invalid_argument);
    EXPECT_THROW(electric_quantum(0), std::invalid_argument);
}

TEST(LinkAlgebra, TildeTableSymmetricAtZeroField) {
    for(int n = 2; n <= 16; ++n) {
        const auto alg = make_link_algebra(n, 0.0);
        double smallest = 1e9;
        for(int k = 0; k < n; ++k) {
            EXPECT_NEAR(alg.tilde_eigenvalues[k], -alg.tilde_eigenvalues[n - 1 - k], 1e-14);
            EXPECT_NEAR(alg.eigenvalues[k], electric_quantum(n) * alg.tilde_eigenvalues[k], 1e-14);
            smallest = std::min(smallest, std::abs(alg.tilde_eigenvalues[k]));
        }
        EXPECT_NEAR(smallest, n % 2 == 1 ? 0.0 : 0.5, 1e-14) << n;
    }
}

TEST(LinkAlgebra, EquallySpaced) {
    for(int n = 2; n <= 16; ++n) {
        const auto e = electric_eigenvalues(n, 0.25);
        for(int k = 0; k + 1 < n; ++k) EXPECT_NEAR(e[k + 1] - e[k], electric_quantum(n), 1e-12);
    }
}

TEST(LinkAlgebra, LabelsWrapModN) {
    EXPECT_EQ(wrap_label(-1, 3), 2);
    EXPECT_EQ(wrap_label(7, 3), 1);
    EXPECT_DOUBLE_EQ(tilde_field(3, 0.0, 5), tilde_field(3, 0.0, 2));
}

TEST(WeylPair, Z2Matrices) {
    const auto w = weyl_pair(2);
    Eigen::MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    EXPECT_TRUE(w.U.isApprox(x));
    EXPECT_EQ(w.V(0, 0), std::complex<double>(1, 0));
    EXPECT_EQ(w.V(1, 1), std::complex<double>(-1, 0));
}

TEST(WeylPair, CommutationRelation) {
    for(int n = 2; n <= 16; ++n) {
        const auto w = weyl_pair(n);
        for(int l = 0; l < n; ++l)
            for(int k = 0; k < n; ++k) {
                const std::complex<double> phase = std::polar(1.0, 2.0 * std::numbers::pi * k * l / n);
                const Eigen::MatrixXcd lhs = power(w.U, l) * power(w.V, k);
                const Eigen::MatrixXcd rhs = phase * power(w.V, k) * power(w.U, l);
                EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12) << n << ' ' << l << ' ' << k;
            }
    }
}

TEST(WeylPair, UnitaryOfOrderN) {
    for(int n = 2; n <= 16; ++n) {
        const auto w  = weyl_pair(n);
        const auto id = Eigen::MatrixXcd::Identity(n, n);
        EXPECT_LT((w.U.adjoint() * w.U - id).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((w.V.adjoint() * w.V - id).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((power(w.U, n) - id).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((power(w.V, n) - id).cwiseAbs().maxCoeff(), 1e-12);
    }
}
