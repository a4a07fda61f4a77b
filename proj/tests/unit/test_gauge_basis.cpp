#include "zngauge/gauge_basis.hpp"
#include "zngauge/link_algebra.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace zngauge;

namespace {

int zero_field_label(int n) { return (n - 1) / 2; }

Occupation dirac_sea(int pairs) {
    Occupation occ = 0;
    for(int j = 0; j < pairs; ++j) occ |= Occupation{1} << (2 * j + 1);
    return occ;
}

Occupation meson(int pairs) {
    Occupation occ = 0;
    for(int j = 0; j < pairs; ++j) occ |= Occupation{1} << (2 * j);
    return occ;
}

}  // namespace

TEST(GaugeBasis, CountsAllFillings) {
    for(int pairs : {1, 2, 3})
        for(int n : {2, 3, 5}) {
            const ChainGeometry g{pairs};
            EXPECT_EQ(build_basis(g, n, 0, false).size(), std::size_t{1} << g.sites());
            EXPECT_EQ(build_all_sectors(g, n, false).size(), (std::size_t{1} << g.sites()) * static_cast<std::size_t>(n));
        }
}

TEST(GaugeBasis, CountsHalfFilling) {
    EXPECT_EQ(build_basis(ChainGeometry{2}, 3, 1, true).size(), 6U);
    EXPECT_EQ(build_basis(ChainGeometry{5}, 3, 1, true).size(), 252U);
}

TEST(GaugeBasis, TwoSiteZ2Sector) {
    // the only half-filled patterns of one pair: particle on the even site or on the odd site
    const auto basis = build_basis(ChainGeometry{1}, 2, 0, true);
    ASSERT_EQ(basis.size(), 2U);
    EXPECT_EQ(occupation_string(basis[0].occupation, 2), "01");
    EXPECT_EQ(occupation_string(basis[1].occupation, 2), "10");
    EXPECT_EQ(reconstruct_fields(basis[0].occupation, 2, 0, 2), std::vector<int>{0});
    EXPECT_EQ(reconstruct_fields(basis[1].occupation, 2, 0, 2), std::vector<int>{1});
}

TEST(GaugeBasis, LexicographicOrder) {
    const auto basis = build_basis(ChainGeometry{2}, 3, 0, false);
    for(std::size_t i = 1; i < basis.size(); ++i)
        EXPECT_LT(occupation_string(basis[i - 1].occupation, 4), occupation_string(basis[i].occupation, 4));
}

TEST(GaugeBasis, RejectsBadSector) {
    EXPECT_THROW(build_basis(ChainGeometry{2}, 3, 3, true), std::invalid_argument);
    EXPECT_THROW(build_basis(ChainGeometry{2}, 3, -1, true), std::invalid_argument);
}

TEST(GaugeBasis, GaussLawHoldsEverywhere) {
    for(int pairs : {1, 2, 3})
        for(int n : {2, 3, 5})
            for(const auto &s : build_all_sectors(ChainGeometry{pairs}, n, false)) {
                const int num_sites = 2 * pairs;
                const auto labels   = reconstruct_fields(s.occupation, num_sites, s.k0, n);
                const auto flux     = reconstruct_flux(s.occupation, num_sites, s.k0);
                const int k_right   = wrap_label(flux.back(), n);
                for(int x = 0; x < num_sites; ++x)
                    EXPECT_EQ(gauss_residual(s.occupation, num_sites, s.k0, k_right, labels, x, n), 0);
            }
}

TEST(GaugeBasis, DiracSeaAndMesonFields) {
    const int n = 3, k0 = zero_field_label(3), pairs = 4;
    for(int label : reconstruct_fields(dirac_sea(pairs), 2 * pairs, k0, n)) EXPECT_DOUBLE_EQ(tilde_field(n, 0.0, label), 0.0);
    const auto labels = reconstruct_fields(meson(pairs), 2 * pairs, k0, n);
    for(std::size_t x = 0; x < labels.size(); ++x) EXPECT_DOUBLE_EQ(tilde_field(n, 0.0, labels[x]), x % 2 == 0 ? 1.0 : 0.0);
}

TEST(GaugeBasis, Z2FieldsAreHalfIntegers) {
    for(const auto &s : build_all_sectors(ChainGeometry{3}, 2, false))
        for(int label : reconstruct_fields(s.occupation, 6, s.k0, 2)) EXPECT_DOUBLE_EQ(std::pow(tilde_field(2, 0.0, label), 2), 0.25);
}

TEST(PairCells, Sizes) {
    EXPECT_EQ(pair_cell_basis(3).size(), 12);
    EXPECT_EQ(pair_cell_basis(2).size(), 8);
    EXPECT_THROW(pair_cell_basis(1), std::invalid_argument);
}

TEST(PairCells, MatchesBruteForceEnumeration) {
    for(int n : {2, 3, 5, 7}) {
        const auto cells = pair_cell_basis(n);
        std::set<std::tuple<int, int, int>> seen;
        for(const auto &c : cells.states()) {
            seen.insert({c.k_left, c.occ_even, c.occ_odd});
            EXPECT_EQ(c.k_mid, wrap_label(c.k_left + c.occ_even, n));
            EXPECT_EQ(c.k_right, wrap_label(c.k_mid - (1 - c.occ_odd), n));
        }
        EXPECT_EQ(seen.size(), static_cast<std::size_t>(4 * n));
        // grouped by (k_left, k_right)
        for(int i = 1; i < cells.size(); ++i) {
            const auto &a = cells[i - 1];
            const auto &b = cells[i];
            EXPECT_LE(std::make_pair(a.k_left, a.k_right), std::make_pair(b.k_left, b.k_right));
        }
    }
}

TEST(PairCells, ChainingIsABijection) {
    for(int n : {2, 3}) {
        const ChainGeometry g{2};
        const auto cells = pair_cell_basis(n);
        std::set<std::pair<Occupation, int>> from_chain;
        for(const auto &s : build_all_sectors(g, n, false)) {
            const auto idx = to_cells(s, g, cells);
            const auto back = from_cells(idx, cells);
            ASSERT_TRUE(back.has_value());
            EXPECT_EQ(*back, s);
            from_chain.insert({s.occupation, s.k0});
        }
        std::set<std::pair<Occupation, int>> from_products;
        for(int a = 0; a < cells.size(); ++a)
            for(int b = 0; b < cells.size(); ++b) {
                const std::vector<int> idx{a, b};
                if(auto s = from_cells(idx, cells)) from_products.insert({s->occupation, s->k0});
            }
        EXPECT_EQ(from_chain, from_products);
        EXPECT_EQ(from_products.size(), 16U * n);
    }
}

TEST(ChargeParity, DiracSeaIsInvariant) {
    for(int n : {2, 3, 5}) {
        const ChainGeometry g{3};
        const GaugeState sea{dirac_sea(3), zero_field_label(n)};
        const auto image = apply_cp(sea, g, n);
        EXPECT_EQ(image.state, sea);
    }
}

TEST(ChargeParity, MesonMapsToItsMirrorImage) {
    const ChainGeometry g{3};
    const GaugeState m{meson(3), 1};
    const auto image = apply_cp(m, g, 3);
    EXPECT_EQ(image.state, m);
    // mirrored link labels
    const auto before = reconstruct_fields(m.occupation, 6, m.k0, 3);
    const auto after  = reconstruct_fields(image.state.occupation, 6, image.state.k0, 3);
    for(std::size_t x = 0; x < before.size(); ++x) EXPECT_EQ(after[x], before[before.size() - 1 - x]);
}

TEST(ChargeParity, MirrorsLinkLabelsOfEveryState) {
    for(int n : {2, 3, 4}) {
        const ChainGeometry g{3};
        for(const auto &s : build_all_sectors(g, n, true)) {
            const auto image  = apply_cp(s, g, n);
            const auto before = reconstruct_fields(s.occupation, 6, s.k0, n);
            const auto after  = reconstruct_fields(image.state.occupation, 6, image.state.k0, n);
            for(std::size_t x = 0; x < before.size(); ++x) EXPECT_EQ(after[x], before[before.size() - 1 - x]);
            EXPECT_EQ(filling(image.state.occupation), 3);
        }
    }
}

TEST(ChargeParity, Involution) {
    std::mt19937_64 rng(7);
    const ChainGeometry g{5};
    const auto basis = build_all_sectors(g, 3, false);
    std::uniform_int_distribution<std::size_t> pick(0, basis.size() - 1);
    for(int trial = 0; trial < 200; ++trial) {
        const auto &s    = basis[pick(rng)];
        const auto once  = apply_cp(s, g, 3);
        const auto twice = apply_cp(once.state, g, 3);
        EXPECT_EQ(twice.state, s);
        EXPECT_EQ(std::abs(once.sign * twice.sign), 1);
    }
}

TEST(GaugeBasis, DumpFormat) {
    std::ostringstream os;
    const auto basis = build_basis(ChainGeometry{1}, 3, 1, true);
    write_basis_dump(os, basis, ChainGeometry{1}, 3);
    EXPECT_EQ(os.str(), "01 1 1\n10 1 2\n");
}

TEST(GaugeBasis, OccupationStringRoundTrip) {
    EXPECT_EQ(occupation_string(parse_occupation("0110"), 4), "0110");
    EXPECT_THROW(parse_occupation("01x"), std::invalid_argument);
}
