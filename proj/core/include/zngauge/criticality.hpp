#pragma once

#include "zngauge/scan_table.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zngauge {

struct CollapseOptions {
    double window = 0.0;           ///< |N^{1/nu}(m - m_c)| cap; 0 picks one keeping min_window_points per size
    int min_window_points = 5;
    int samples = 64;              ///< scaling-variable samples per objective evaluation
    int coarse_steps = 400;
};

struct CollapseCurve {
    int L = 0;
    std::vector<double> x;  ///< N^{1/nu}(m - m_c)
    std::vector<double> y;  ///< N^{beta/nu} Sigma
};

struct CollapseResult {
    double m_c = 0.0;
    double uncertainty = 0.0;
    double grid_floor = 0.0;       ///< half the m spacing
    double curvature_error = 0.0;  ///< shift that doubles the objective
    double beta = 0.125;
    double nu = 1.0;
    double objective = 0.0;
    double window = 0.0;
    std::vector<CollapseCurve> curves;
};

/// Finds m_c by minimizing the spread of N^{beta/nu} Sigma between sizes as a
/// function of N^{1/nu}(m - m_c), with N = 2L and monotone cubic interpolation
/// of Sigma(m) per size. The table must hold one (n, t, phi) group with at
/// least three sizes of at least seven converged masses each.
CollapseResult collapse_fit(const ScanTable &table, double beta = 0.125, double nu = 1.0, const CollapseOptions &options = {});

/// Spread objective at a trial m_c; +inf when the size windows do not overlap.
double collapse_objective(const ScanTable &table, double m_c, double beta, double nu, double window, int samples = 64);

struct LineFit {
    double slope = 0.0;
    double slope_err = 0.0;
    double intercept = 0.0;
    double intercept_err = 0.0;
};

struct CentralChargeFit {
    double c = 0.0;
    double c_err = 0.0;
    double s0 = 0.0;
    double s0_err = 0.0;
};

struct EntropyPoint {
    double size = 0.0;
    double entropy = 0.0;  ///< bits
};

/// S = (c/6) log2(size) + s0 by ordinary least squares; needs four sizes.
CentralChargeFit central_charge_fit(std::span<const EntropyPoint> points);

struct GapPoint {
    int N = 0;
    double delta = 0.0;
    double gamma = 0.0;
};

struct GapScalingFit {
    double x_s = 0.0;
    double x_s_err = 0.0;
    double v_s = 0.0;
    double v_s_err = 0.0;
    double ratio = 0.0;            ///< mean Delta / Gamma
    double ratio_err = 0.0;
    std::vector<double> ratios;
    std::vector<double> scaled_delta;  ///< Delta N^2 per size
    double scaled_spread = 0.0;        ///< (max - min) / mean of Delta N^2
    bool ratio_flagged = false;        ///< some ratio outside (0, 1)
};

/// x_s from Delta/Gamma = x_s/(x_s + 1) averaged over sizes, then v_s as the
/// mean of Delta N^2 / (pi x_s). Needs three sizes.
GapScalingFit gap_scaling_fit(std::span<const GapPoint> points);

struct CrossoverOptions {
    std::optional<double> baseline_objective;  ///< collapse objective of the phi = 0 scan
    int edge_margin = 0;                       ///< cuts ignored at each end; 0 means max(2, N/6)
    double gap_tolerance = 1e-6;               ///< relative slack in the non-closing test
};

struct CrossoverReport {
    std::optional<CollapseResult> collapse;
    std::string collapse_error;
    std::optional<double> objective_ratio;  ///< objective / baseline

    struct GapMinimum {
        int L = 0;
        double m = 0.0;
        double raw_gap = 0.0;  ///< E1 - E0
    };
    std::vector<GapMinimum> gap_minima;
    bool gap_non_closing = false;

    struct Flatness {
        int L = 0;
        double m = 0.0;
        double spread = 0.0;  ///< max - min entropy over cell boundaries away from the edges (bits)
    };
    std::vector<Flatness> flatness;

    struct Crossing {
        int L = 0;
        double m_star = 0.0;
    };
    std::vector<Crossing> crossings;
    std::optional<double> m_star;  ///< crossing of the largest size

    bool crossover = false;  ///< minimal gap does not close with size
};

/// Background-field diagnostics over one (n, t, phi) scan with two or more sizes.
CrossoverReport crossover_diagnostics(const ScanTable &table, std::span<const EntropyProfile> profiles, const CrossoverOptions &options = {});

/// Spread of one profile over the cell-boundary (even) cuts away from the edges.
double entropy_flatness(std::span<const double> profile, int edge_margin = 0);

}  // namespace zngauge
