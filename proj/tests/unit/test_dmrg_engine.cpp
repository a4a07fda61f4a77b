#include "zngauge/dmrg_engine.hpp"
#include "zngauge/ed_engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

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

SpectrumResult exact(const ModelParams &p, int k) { return lowest_eigenpairs(build_sparse(p, build_basis(p.geometry, p.n, p.k0, true)), k); }

SweepPolicy tight() {
    SweepPolicy s;
    s.chi        = 256;
    s.cutoff     = 1e-14;
    s.energy_tol = 1e-12;
    s.local_tol  = 1e-12;
    return s;
}

}  // namespace

TEST(Dmrg, GroundEnergyMatchesExactDiagonalization) {
    for(int n : {2, 3, 4})
        for(int L : {2, 3, 4})
            for(double m : {-1.2, 0.3}) {
                const auto p   = params(n, 2 * std::numbers::pi / n, m, L);
                const auto res = ground_state(p, tight());
                const auto ed  = exact(p, 1);
                EXPECT_NEAR(res.spectrum.eigenvalues[0], ed.eigenvalues[0], 1e-9) << "n=" << n << " L=" << L << " m=" << m;
                EXPECT_TRUE(res.spectrum.converged);
                EXPECT_FALSE(res.chi_exhausted);
            }
}

TEST(Dmrg, GroundStateVectorMatchesExact) {
    const auto p     = params(3, 1.5, -0.4, 4, 0.2);
    const auto basis = build_basis(p.geometry, p.n, p.k0, true);
    const auto res   = ground_state(p, tight());
    const auto ed    = exact(p, 2);
    ASSERT_GT(ed.eigenvalues[1] - ed.eigenvalues[0], 1e-6);
    const auto v = res.states[0].expand(basis);
    EXPECT_NEAR(v.norm(), 1.0, 1e-10);
    EXPECT_NEAR(std::abs(v.dot(ed.eigenvectors[0])), 1.0, 1e-8);
    EXPECT_NEAR(energy_expectation(p, res.states[0]), ed.eigenvalues[0], 1e-9);
}

TEST(Dmrg, ExcitedStatesMatchExact) {
    for(int n : {2, 3}) {
        const auto p   = params(n, 1.0, 0.2, 4);
        const auto res = lowest_states(p, 3, tight());
        const auto ed  = exact(p, 3);
        for(int i = 0; i < 3; ++i) EXPECT_NEAR(res.spectrum.eigenvalues[static_cast<std::size_t>(i)], ed.eigenvalues[static_cast<std::size_t>(i)], 1e-8) << "n=" << n << " level " << i;
        EXPECT_LT(res.leakage, 1e-6);
        EXPECT_TRUE(res.spectrum.converged);
    }
}

TEST(Dmrg, SeedFollowsDiagonalEnergy) {
    const auto heavy = params(3, 1.0, 2.0, 3);
    const auto light = params(3, 1.0, -2.0, 3);
    EXPECT_EQ(seed_occupation(heavy, SeedPattern::automatic), seed_occupation(heavy, SeedPattern::dirac_sea));
    EXPECT_EQ(seed_occupation(light, SeedPattern::automatic), seed_occupation(light, SeedPattern::meson));
}

TEST(Dmrg, EnergyIsVariationalInBondDimension) {
    const auto p = params(3, 2 * std::numbers::pi / 3, -1.9, 6);
    double previous = INFINITY;
    const double exact_e0 = exact(p, 1).eigenvalues[0];
    for(int chi : {8, 10, 14, 64}) {
        SweepPolicy s = tight();
        s.chi         = chi;
        const auto r  = ground_state(p, s);
        EXPECT_GE(r.spectrum.eigenvalues[0], exact_e0 - 1e-9) << "chi " << chi;
        EXPECT_LE(r.spectrum.eigenvalues[0], previous + 1e-9) << "chi " << chi;
        EXPECT_LE(r.states[0].max_bond_dimension(), chi);
        previous = r.spectrum.eigenvalues[0];
    }
    SweepPolicy small = tight();
    small.chi         = 8;
    small.truncation_ceiling = 1e-12;
    EXPECT_TRUE(ground_state(p, small).chi_exhausted);
}

TEST(Dmrg, StatesStayGaugeInvariant) {
    const auto p     = params(4, 1.0, 0.1, 4, 0.3);
    const auto res   = ground_state(p, tight());
    const auto &psi  = res.states[0];
    psi.check_structure();
    for(int b = 0; b <= psi.num_cells(); ++b)
        for(const auto &[q, d] : psi.bond(b)) EXPECT_TRUE(psi.feasible(b, q));
    // everything lives in the sector basis
    const auto basis = build_basis(p.geometry, p.n, p.k0, true);
    EXPECT_NEAR(psi.expand(basis).norm(), 1.0, 1e-10);
    EXPECT_FALSE(psi.history.empty());
}

TEST(Dmrg, RejectsBadInput) {
    EXPECT_THROW(ground_state(params(3, 1.0, 0.0, 1), SweepPolicy{}), std::invalid_argument);
    SweepPolicy narrow;
    narrow.chi = 4;
    EXPECT_THROW(ground_state(params(3, 1.0, 0.0, 3), narrow), std::invalid_argument);
}
