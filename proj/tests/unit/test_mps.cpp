#include "zngauge/mps.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace zngauge;

namespace {

Occupation dirac_sea(int pairs) {
    Occupation occ = 0;
    for(int j = 0; j < pairs; ++j) occ |= Occupation{1} << (2 * j + 1);
    return occ;
}

}  // namespace

TEST(Mps, ProductStateHasOneNonzeroAmplitude) {
    const int n = 3, k0 = 1, L = 3;
    const auto psi   = MpsState::product(n, k0, dirac_sea(L), L);
    const auto basis = build_basis(ChainGeometry{L}, n, k0, true);
    const auto v     = psi.expand(basis);
    EXPECT_NEAR(v.norm(), 1.0, 1e-14);
    EXPECT_EQ((v.array().abs() > 1e-12).count(), 1);
    EXPECT_NEAR(psi.amplitude(GaugeState{dirac_sea(L), k0}), 1.0, 1e-14);
    psi.check_structure();
}

TEST(Mps, RandomStateIsRightCanonicalAndInSector) {
    for(int n : {2, 3, 4}) {
        const int L = 4;
        auto psi    = MpsState::random(n, 0, L, 3, 42 + static_cast<std::uint64_t>(n));
        psi.right_canonicalize();
        psi.check_structure();
        EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
        for(int j = 1; j < L; ++j) EXPECT_TRUE(psi.right_orthonormal(j)) << "cell " << j;
        // the dense expansion carries the full norm, so nothing leaks outside the sector
        const auto basis = build_basis(ChainGeometry{L}, n, 0, true);
        EXPECT_NEAR(psi.expand(basis).norm(), 1.0, 1e-12);
        for(int b = 0; b <= L; ++b)
            for(const auto &[q, d] : psi.bond(b)) EXPECT_TRUE(psi.feasible(b, q)) << "bond " << b << " flux " << q;
    }
}

TEST(Mps, OverlapMatchesDenseInnerProduct) {
    const int n = 3, L = 3;
    auto a = MpsState::random(n, 2, L, 2, 1);
    auto b = MpsState::random(n, 2, L, 3, 2);
    a.right_canonicalize();
    b.right_canonicalize();
    const auto basis = build_basis(ChainGeometry{L}, n, 2, true);
    EXPECT_NEAR(overlap(a, b), a.expand(basis).dot(b.expand(basis)), 1e-12);
    EXPECT_NEAR(overlap(a, a), 1.0, 1e-12);
}

TEST(Mps, MeasurementOfProductState) {
    const int n = 3, L = 3;
    const auto psi = MpsState::product(n, 1, dirac_sea(L), L);
    const auto m   = measure(psi, 0.0);
    ASSERT_EQ(m.density.size(), 6u);
    ASSERT_EQ(m.field_tilde.size(), 5u);
    ASSERT_EQ(m.entropy.size(), 7u);
    for(int x = 0; x < 6; ++x) EXPECT_NEAR(m.density[static_cast<std::size_t>(x)], x % 2, 1e-14);
    // Dirac sea keeps every link at the boundary label
    for(double e : m.field_tilde) EXPECT_NEAR(e, 0.0, 1e-14);
    for(double s : m.entropy) EXPECT_NEAR(s, 0.0, 1e-12);
}

TEST(Mps, EntropyOfRandomStateMatchesDenseSchmidtDecomposition) {
    const int n = 2, L = 3;
    auto psi = MpsState::random(n, 0, L, 3, 9);
    psi.right_canonicalize();
    const auto basis = build_basis(ChainGeometry{L}, n, 0, true);
    const auto v     = psi.expand(basis);
    const auto m     = measure(psi, 0.0);
    const int N      = 2 * L;
    for(int cut = 1; cut < N; ++cut) {
        // Gauss law makes the left occupations fix the link labels, so the
        // occupation pattern alone labels the Schmidt sectors
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(1 << cut, 1 << (N - cut));
        for(std::size_t i = 0; i < basis.size(); ++i) {
            const auto occ = basis[i].occupation;
            M(static_cast<Eigen::Index>(occ & ((Occupation{1} << cut) - 1)), static_cast<Eigen::Index>(occ >> cut)) = v[static_cast<Eigen::Index>(i)];
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        const Eigen::VectorXd s = svd.singularValues();
        EXPECT_NEAR(m.entropy[static_cast<std::size_t>(cut)], schmidt_entropy({s.data(), static_cast<std::size_t>(s.size())}), 1e-10) << "cut " << cut;
    }
}

TEST(Mps, CheckpointRoundTripIsExact) {
    ModelParams p;
    p.n        = 4;
    p.t        = 1.25;
    p.m        = -0.3;
    p.phi      = 0.1;
    p.geometry = ChainGeometry{3};
    p.k0       = 2;
    auto psi   = MpsState::random(4, 2, 3, 3, 77);
    psi.right_canonicalize();
    psi.history.push_back({1, -1.5, 1e-9, 12, 0.25});
    std::stringstream ss;
    save_checkpoint(ss, psi, p);
    ModelParams q;
    const auto back = load_checkpoint(ss, &q);
    EXPECT_EQ(q.n, 4);
    EXPECT_EQ(q.t, 1.25);
    EXPECT_EQ(q.m, -0.3);
    EXPECT_EQ(q.phi, 0.1);
    EXPECT_EQ(q.k0, 2);
    EXPECT_EQ(q.geometry.pairs, 3);
    ASSERT_EQ(back.history.size(), 1u);
    EXPECT_EQ(back.history[0].energy, -1.5);
    const auto basis = build_basis(ChainGeometry{3}, 4, 2, true);
    EXPECT_EQ((psi.expand(basis) - back.expand(basis)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mps, CheckpointRejectsGarbage) {
    std::stringstream ss("not a checkpoint\n");
    EXPECT_THROW(load_checkpoint(ss), std::runtime_error);
}

TEST(Mps, SchmidtEntropyInBits) {
    const double s[] = {std::sqrt(0.5), std::sqrt(0.5)};
    EXPECT_NEAR(schmidt_entropy(s), 1.0, 1e-14);
    const double one[] = {1.0};
    EXPECT_EQ(schmidt_entropy(one), 0.0);
}
