#include "zngauge/criticality.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace zngauge;

namespace {

// Sigma = N^{-1/8} lambda(N (m - m_c)) with a smooth, monotone lambda
ScanTable manufactured(double m_c, double shift = 0.0, double spacing = 0.05) {
    ScanTable table;
    for(int L : {12, 16, 20, 24}) {
        const double N = 2.0 * L;
        for(int i = 0; i < 15; ++i) {
            ScanRow r;
            r.n         = 3;
            r.t         = 2.0;
            r.L         = L;
            r.chi       = 64;
            r.m         = -2.35 + spacing * i + shift;
            const double x = N * (r.m - shift - m_c);
            r.sigma     = std::pow(N, -0.125) * 0.5 * (1.0 - std::tanh(0.15 * x));
            r.delta     = 2.0 / (N * N);
            r.gamma     = 3.0 / (N * N);
            r.converged = true;
            table.upsert(r);
        }
    }
    return table;
}

}  // namespace

TEST(ScanTable, CsvRoundTripIsExact) {
    ScanTable t = manufactured(-1.948);
    ScanRow extra;
    extra.n     = 2;
    extra.t     = 0.1 + 0.2;
    extra.m     = std::nextafter(1.0, 2.0);
    extra.delta = std::numeric_limits<double>::quiet_NaN();
    extra.engine     = "dmrg";
    extra.provenance = "abc123";
    t.upsert(extra);
    std::stringstream ss;
    t.write_csv(ss);
    const auto back = ScanTable::read_csv(ss);
    ASSERT_EQ(back.size(), t.size());
    for(std::size_t i = 0; i < t.size(); ++i) {
        const auto &a = t.rows()[i];
        const auto &b = back.rows()[i];
        EXPECT_TRUE(a.same_key(b));
        EXPECT_EQ(a.sigma, b.sigma);
        EXPECT_EQ(a.engine, b.engine);
        EXPECT_EQ(a.provenance, b.provenance);
        EXPECT_EQ(std::isnan(a.delta), std::isnan(b.delta));
    }
}

TEST(ScanTable, UpsertKeepsKeysUnique) {
    ScanTable t;
    ScanRow r;
    r.L     = 4;
    r.sigma = 1.0;
    t.upsert(r);
    r.sigma = 2.0;
    t.upsert(r);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.rows()[0].sigma, 2.0);
    r.chi = 8;
    t.upsert(r);
    EXPECT_EQ(t.size(), 2u);
}

TEST(ScanTable, MalformedCsvNamesTheLine) {
    std::stringstream ss(std::string(ScanTable::header) + "\n3,1,0,4,8,0.5,0.1\n");
    try {
        ScanTable::read_csv(ss);
        FAIL();
    } catch(const std::runtime_error &e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Collapse, RecoversManufacturedCriticalMass) {
    const auto res = collapse_fit(manufactured(-1.948));
    EXPECT_NEAR(res.m_c, -1.948, 0.05);
    EXPECT_GT(res.uncertainty, 0.0);
    EXPECT_GE(res.uncertainty, 0.025 - 1e-15);
    EXPECT_GE(res.objective, 0.0);
    EXPECT_EQ(res.curves.size(), 4u);
}

TEST(Collapse, ShiftEquivariance) {
    const auto a = collapse_fit(manufactured(-1.948));
    const auto b = collapse_fit(manufactured(-1.948, 0.37));
    EXPECT_NEAR(b.m_c - a.m_c, 0.37, 1e-7);
}

TEST(Collapse, ObjectiveIsLowestNearTheTrueMass) {
    const auto t  = manufactured(-1.948);
    const auto r  = collapse_fit(t);
    const double f0 = collapse_objective(t, -1.948, 0.125, 1.0, r.window);
    EXPECT_LT(f0, collapse_objective(t, -1.748, 0.125, 1.0, r.window));
    EXPECT_LT(f0, collapse_objective(t, -2.148, 0.125, 1.0, r.window));
}

TEST(Collapse, RejectsThinGrids) {
    ScanTable two;
    for(const auto &r : manufactured(-1.9).rows())
        if(r.L != 24 && r.L != 20) two.upsert(r);
    EXPECT_THROW(collapse_fit(two), std::invalid_argument);
    ScanTable sparse;
    for(const auto &r : manufactured(-1.9).rows())
        if(static_cast<int>(std::lround((r.m + 2.35) / 0.05)) % 3 == 0) sparse.upsert(r);
    EXPECT_THROW(collapse_fit(sparse), std::invalid_argument);
}

TEST(Collapse, RejectsDisjointRanges) {
    ScanTable t;
    for(auto r : manufactured(-1.9).rows()) {
        if(r.L == 24) r.m += 5.0;
        t.upsert(r);
    }
    EXPECT_THROW(collapse_fit(t), std::invalid_argument);
}

TEST(CentralCharge, ManufacturedIsingLine) {
    std::vector<EntropyPoint> pts;
    for(double L : {12.0, 16.0, 20.0, 24.0, 32.0}) pts.push_back({L, std::log2(L) / 12.0 + 0.3});
    const auto fit = central_charge_fit(pts);
    EXPECT_NEAR(fit.c, 0.5, 1e-12);
    EXPECT_NEAR(fit.s0, 0.3, 1e-12);
    EXPECT_NEAR(fit.c_err, 0.0, 1e-10);
    pts.resize(3);
    EXPECT_THROW(central_charge_fit(pts), std::invalid_argument);
}

TEST(GapScaling, ExactInputs) {
    const double v = 1.56;
    std::vector<GapPoint> pts;
    for(int N : {16, 24, 32, 40}) pts.push_back({N, 2 * std::numbers::pi * v / (N * N), 3 * std::numbers::pi * v / (N * N)});
    const auto fit = gap_scaling_fit(pts);
    EXPECT_NEAR(fit.x_s, 2.0, 1e-12);
    EXPECT_NEAR(fit.v_s, v, 1e-12);
    EXPECT_NEAR(fit.ratio, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(fit.scaled_spread, 0.0, 1e-12);
    EXPECT_FALSE(fit.ratio_flagged);
    pts[0].gamma = pts[0].delta / 2;
    EXPECT_TRUE(gap_scaling_fit(pts).ratio_flagged);
}

TEST(Crossover, CriticalControlIsNotFlagged) {
    const auto rep = crossover_diagnostics(manufactured(-1.948), {});
    EXPECT_FALSE(rep.crossover);
    ASSERT_TRUE(rep.collapse.has_value());
    ASSERT_TRUE(rep.m_star.has_value() || rep.crossings.empty());
}

TEST(Crossover, GappedScanIsFlaggedAndCrossingFound) {
    ScanTable t;
    for(int L : {12, 16, 20}) {
        for(int i = 0; i < 9; ++i) {
            ScanRow r;
            r.n = 3;
            r.t = 2.0;
            r.phi = 1.0 / 3;
            r.L = L;
            r.m = -0.7 + 0.1 * i;
            r.sigma = -std::tanh(3.0 * (r.m + 0.325));
            // raw gap bounded away from zero, with its minimum at the crossing
            r.delta = (0.4 + std::abs(r.m + 0.3)) / r.sites();
            r.converged = true;
            t.upsert(r);
        }
    }
    const std::vector<EntropyProfile> prof{{20, -0.3, std::vector<double>(41, 0.8)}};
    const auto rep = crossover_diagnostics(t, prof, {});
    EXPECT_TRUE(rep.gap_non_closing);
    EXPECT_TRUE(rep.crossover);
    ASSERT_TRUE(rep.m_star.has_value());
    EXPECT_NEAR(*rep.m_star, -0.325, 0.01);
    ASSERT_EQ(rep.flatness.size(), 1u);
    EXPECT_EQ(rep.flatness[0].spread, 0.0);
}

TEST(Crossover, FlatnessIgnoresEdges) {
    std::vector<double> p(25, 1.0);
    p.front() = p.back() = 0.0;
    p[2] = p[22] = 0.5;
    EXPECT_EQ(entropy_flatness(p), 0.0);
    p[12] = 1.3;
    EXPECT_NEAR(entropy_flatness(p), 0.3, 1e-15);
}

TEST(Crossover, FlatnessReadsCellBoundariesOnly) {
    // staggered profile: low inside cells, flat on cell boundaries
    std::vector<double> p(41);
    for(std::size_t c = 0; c < p.size(); ++c) p[c] = c % 2 ? 0.4 : 0.9;
    EXPECT_EQ(entropy_flatness(p), 0.0);
    p[20] = 1.0;
    EXPECT_NEAR(entropy_flatness(p), 0.1, 1e-15);
    EXPECT_NEAR(entropy_flatness(p, 7), 0.1, 1e-15);
}
