#include "zngauge/hamiltonian.hpp"
#include "zngauge/link_algebra.hpp"

#include "full_space_oracle.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace zngauge;

namespace {

ModelParams params(int n, double t, double m, int pairs, double phi = 0.0) {
    ModelParams p;
    p.n        = n;
    p.t        = t;
    p.m        = m;
    p.phi      = phi;
    p.geometry = ChainGeometry{pairs};
    p.k0       = zero_charge_sector_candidates(n, phi).front();
    return p;
}

Occupation dirac_sea(int pairs) {
    Occupation occ = 0;
    for(int j = 0; j < pairs; ++j) occ |= Occupation{1} << (2 * j + 1);
    return occ;
}

}  // namespace

TEST(Hamiltonian, Coefficients) {
    const auto p = params(3, 2 * std::numbers::pi / 3, 1.5, 2);
    EXPECT_NEAR(p.hop_coeff(), 1.0, 1e-15);
    EXPECT_NEAR(p.mass_coeff(), 1.5 * 3 / (2 * std::numbers::pi), 1e-15);
    EXPECT_EQ(ModelParams::electric_coeff, 1.0);
}

TEST(Hamiltonian, Validation) {
    auto p = params(3, 1.0, 0.0, 2);
    p.t    = -1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p   = params(3, 1.0, 0.0, 2);
    p.k0 = 3;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Hamiltonian, SectorCandidates) {
    EXPECT_EQ(zero_charge_sector_candidates(3, 0.0), std::vector<int>{1});
    EXPECT_EQ(zero_charge_sector_candidates(4, 0.0), (std::vector<int>{1, 2}));
    EXPECT_EQ(zero_charge_sector_candidates(3, 1.0 / 3.0), std::vector<int>{1});
    EXPECT_EQ(zero_charge_sector_candidates(3, 0.5), (std::vector<int>{0, 1}));
}

TEST(Hamiltonian, MatchesFullSpaceOracle) {
    for(int n : {2, 3, 4})
        for(double phi : {0.0, 1.0 / 3.0}) {
            const auto p     = params(n, 0.9, -0.7, 2, phi);
            const auto basis = build_all_sectors(p.geometry, n, false);
            // the oracle only distinguishes link labels, so compare one sector at a time
            for(int k0 = 0; k0 < n; ++k0) {
                auto q             = p;
                q.k0               = k0;
                const auto sector  = build_basis(q.geometry, n, k0, false);
                const auto H       = build_sparse(q, sector).to_dense();
                const auto ref     = oracle::restricted(q, sector);
                EXPECT_LT((H - ref).cwiseAbs().maxCoeff(), 1e-12) << n << ' ' << phi << ' ' << k0;
            }
            EXPECT_EQ(basis.size(), 16U * n);
        }
}

TEST(Hamiltonian, HopSignOnFourSites) {
    // |0110> -> |1010> by psi^dag_0 psi_1: no fermion to the left, sign +1
    const auto p     = params(3, 2 * std::numbers::pi / 3, 0.0, 2);
    const auto basis = build_basis(p.geometry, 3, p.k0, true);
    const auto H     = build_sparse(p, basis).to_dense();
    auto find        = [&](const char *bits) {
        for(std::size_t i = 0; i < basis.size(); ++i)
            if(basis[i].occupation == parse_occupation(bits)) return static_cast<Eigen::Index>(i);
        return Eigen::Index{-1};
    };
    EXPECT_DOUBLE_EQ(H(find("0110"), find("1010")), -1.0);
    EXPECT_DOUBLE_EQ(H(find("0101"), find("0110")), -1.0);
    EXPECT_DOUBLE_EQ(H(find("0101"), find("1010")), 0.0);
}

TEST(Hamiltonian, DiracSeaDiagonal) {
    for(double m : {-2.0, 0.3, 1.7}) {
        const auto p = params(3, 2 * std::numbers::pi / 3, m, 4);
        const GaugeState sea{dirac_sea(4), p.k0};
        EXPECT_NEAR(diagonal_energy(p, sea) / 4, -3.0 / (2 * std::numbers::pi) * m, 1e-13);
    }
}

TEST(Hamiltonian, Hermitian) {
    const auto p     = params(3, 1.3, -0.4, 3);
    const auto basis = build_all_sectors(p.geometry, 3, false);
    const auto H     = build_sparse(p, basis);
    EXPECT_TRUE(H.is_symmetric(0.0));
}

TEST(Hamiltonian, NoCouplingBetweenSectorsOrFillings) {
    const auto p     = params(3, 1.3, -0.4, 2);
    const auto basis = build_all_sectors(p.geometry, 3, false);
    for(const auto &e : build_sparse(p, basis).entries()) {
        EXPECT_EQ(basis[e.row].k0, basis[e.col].k0);
        EXPECT_EQ(filling(basis[e.row].occupation), filling(basis[e.col].occupation));
    }
}

TEST(Hamiltonian, RejectsMismatchedBasis) {
    const auto p = params(3, 1.0, 0.0, 2);
    auto basis   = build_basis(ChainGeometry{3}, 3, p.k0, true);
    EXPECT_THROW(build_sparse(p, basis), std::invalid_argument);
    auto partial = build_basis(p.geometry, 3, p.k0, true);
    partial.pop_back();
    EXPECT_THROW(build_sparse(p, partial), std::invalid_argument);
}

TEST(Hamiltonian, DiagonalAtZeroHopping) {
    const auto p     = params(3, 0.0, 0.5, 3);
    const auto basis = build_basis(p.geometry, 3, p.k0, true);
    const auto H     = build_sparse(p, basis);
    EXPECT_EQ(H.nonzeros(), basis.size());
}

TEST(Hamiltonian, ZeroHoppingCrossingForZ3) {
    const auto p      = params(3, 0.0, 0.0, 4);
    const auto basis  = build_basis(p.geometry, 3, p.k0, true);
    const auto cross  = diagonal_level_crossings(p, basis);
    ASSERT_EQ(cross.size(), 1U);
    EXPECT_NEAR(cross[0], -std::numbers::pi / 3, 1e-10);
}

TEST(Hamiltonian, Z2ElectricTermIsConstant) {
    for(double phi : {0.0}) {
        const auto p     = params(2, 0.0, 0.0, 3, phi);
        const auto basis = build_all_sectors(p.geometry, 2, false);
        const auto H     = build_sparse(p, basis);
        const auto d     = H.diagonal();
        for(Eigen::Index i = 0; i < d.size(); ++i) EXPECT_DOUBLE_EQ(d[i], 5.0 / 4.0);
    }
}

TEST(Hamiltonian, ChargeParityCovariance) {
    for(int n : {2, 3, 4, 5}) {
        const auto p     = params(n, 1.1, -0.8, 3);
        const auto basis = build_basis(p.geometry, n, p.k0, true);
        const auto H     = build_sparse(p, basis).to_dense();
        const auto d     = static_cast<Eigen::Index>(basis.size());
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d, d);
        for(Eigen::Index i = 0; i < d; ++i) {
            const auto image = apply_cp(basis[i], p.geometry, n);
            const auto it    = std::find(basis.begin(), basis.end(), image.state);
            ASSERT_NE(it, basis.end());
            P(it - basis.begin(), i) = image.sign;
        }
        EXPECT_LT((P * H * P.transpose() - H).cwiseAbs().maxCoeff(), 1e-12) << n;
    }
}

TEST(Hamiltonian, BackgroundShiftEqualsRelabel) {
    const auto p     = params(3, 0.0, 0.4, 3, 0.2);
    auto shifted     = p;
    shifted.phi      = p.phi + 1.0;
    auto relabelled  = p;
    relabelled.k0    = wrap_label(p.k0 + 1, 3);
    const auto base  = build_basis(p.geometry, 3, p.k0, true);
    const auto moved = build_basis(p.geometry, 3, relabelled.k0, true);
    for(std::size_t i = 0; i < base.size(); ++i) {
        // labels wrap mod n, so the shift only agrees when no label crosses n-1 -> 0
        const auto a = reconstruct_fields(base[i].occupation, 6, p.k0, 3);
        bool wraps   = false;
        for(int k : a) wraps = wraps || k == 2;
        if(wraps) continue;
        EXPECT_NEAR(diagonal_energy(shifted, base[i]), diagonal_energy(relabelled, moved[i]), 1e-12);
    }
}

TEST(Mpo, ContractsToSparseMatrix) {
    for(int n : {2, 3})
        for(double t : {0.0, 2 * std::numbers::pi / 3}) {
            const auto p     = params(n, t, -0.6, 2, 0.1);
            const auto cells = pair_cell_basis(n);
            const auto mpo   = build_mpo(p, cells);
            const auto basis = build_all_sectors(p.geometry, n, false);
            const auto via_mpo = mpo_matrix(mpo, cells, basis, p.geometry);
            const auto sparse  = build_sparse(p, basis).to_dense();
            EXPECT_LT((via_mpo - sparse).cwiseAbs().maxCoeff(), 1e-12) << n << ' ' << t;
        }
}

TEST(Mpo, DiagonalWithoutHopping) {
    const auto p   = params(3, 0.0, 1.0, 4);
    const auto mpo = build_mpo(p, pair_cell_basis(3));
    for(const auto &site : mpo.sites)
        for(const auto &e : site) EXPECT_TRUE(e.op.is_diagonal());
}

TEST(Mpo, LowestLevelAgreesWithSparse) {
    const auto p     = params(3, 2 * std::numbers::pi / 3, 0.0, 2);
    const auto cells = pair_cell_basis(3);
    const auto basis = build_all_sectors(p.geometry, 3, false);
    const auto a     = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mpo_matrix(build_mpo(p, cells), cells, basis, p.geometry)).eigenvalues()[0];
    const auto b     = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(build_sparse(p, basis).to_dense()).eigenvalues()[0];
    EXPECT_NEAR(a, b, 1e-10);
}

TEST(Mpo, RejectsWrongCellOrder) {
    EXPECT_THROW(build_mpo(params(3, 1.0, 0.0, 2), pair_cell_basis(4)), std::invalid_argument);
}

TEST(SparseOperator, CoordinateDump) {
    SparseOperator op(2, {{0, 0, 1.5}, {1, 0, -1.0}, {0, 1, -1.0}});
    std::ostringstream os;
    op.write_coordinates(os);
    EXPECT_EQ(os.str(), "0 0 1.5\n0 1 -1\n1 0 -1\n");
    Eigen::VectorXd x(2);
    x << 1, 2;
    const Eigen::VectorXd y = op * x;
    EXPECT_DOUBLE_EQ(y[0], -0.5);
    EXPECT_DOUBLE_EQ(y[1], -1.0);
}
