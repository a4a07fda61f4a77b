#include "zngauge/criticality.hpp"

#include <cmath>
// the Boost 1.74 pchip header calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace zngauge {

namespace {

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

struct SizeCurve {
    int L;
    double N;
    std::vector<double> m;
    std::vector<double> sigma;
};

std::vector<SizeCurve> curves_of(const ScanTable &table) {
    if(table.empty()) throw std::invalid_argument("collapse: empty table");
    const auto &first = table.rows().front();
    for(const auto &r : table.rows())
        if(r.n != first.n || r.t != first.t || r.phi != first.phi)
            throw std::invalid_argument("collapse: table mixes several (n, t, phi) groups");
    std::vector<SizeCurve> out;
    for(int L : table.sizes()) {
        SizeCurve c{L, 2.0 * L, {}, {}};
        for(const auto &r : table.at_size(L)) {
            if(!r.converged) continue;
            if(!c.m.empty() && r.m == c.m.back()) throw std::invalid_argument("collapse: duplicate mass at one size (several chi?)");
            c.m.push_back(r.m);
            c.sigma.push_back(r.sigma);
        }
        out.push_back(std::move(c));
    }
    return out;
}

void require_grid(const std::vector<SizeCurve> &curves) {
    if(curves.size() < 3) throw std::invalid_argument("collapse: need at least three sizes");
    for(const auto &c : curves)
        if(c.m.size() < 7) throw std::invalid_argument("collapse: size " + std::to_string(c.L) + " has fewer than seven converged masses");
}

class Objective {
public:
    Objective(std::vector<SizeCurve> curves, double beta, double nu, int samples) : curves_(std::move(curves)), beta_(beta), nu_(nu), samples_(samples) {
        for(const auto &c : curves_) {
            std::vector<double> y(c.sigma.size());
            const double scale = std::pow(c.N, beta_ / nu_);
            for(std::size_t i = 0; i < y.size(); ++i) y[i] = scale * c.sigma[i];
            interp_.emplace_back(std::vector<double>(c.m), std::move(y));
        }
    }

    double operator()(double m_c, double window) const {
        double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
        for(const auto &c : curves_) {
            const double s = std::pow(c.N, 1.0 / nu_);
            lo             = std::max(lo, s * (c.m.front() - m_c));
            hi             = std::min(hi, s * (c.m.back() - m_c));
        }
        if(window > 0.0) {
            lo = std::max(lo, -window);
            hi = std::min(hi, window);
        }
        if(!(hi > lo)) return std::numeric_limits<double>::infinity();
        double total = 0.0;
        for(int k = 0; k < samples_; ++k) {
            const double x = lo + (hi - lo) * (k + 0.5) / samples_;
            double sum = 0.0, sum2 = 0.0;
            for(std::size_t i = 0; i < curves_.size(); ++i) {
                const double m = m_c + x / std::pow(curves_[i].N, 1.0 / nu_);
                const double y = interp_[i](std::clamp(m, curves_[i].m.front(), curves_[i].m.back()));
                sum += y;
                sum2 += y * y;
            }
            const double n = static_cast<double>(curves_.size());
            total += std::max(0.0, sum2 / n - (sum / n) * (sum / n));
        }
        return total / samples_;
    }

    // smallest cap keeping `points` grid masses of every size inside the window
    double window_for(double m_c, int points) const {
        double w = 0.0;
        for(const auto &c : curves_) {
            std::vector<double> d;
            for(double m : c.m) d.push_back(std::abs(std::pow(c.N, 1.0 / nu_) * (m - m_c)));
            std::sort(d.begin(), d.end());
            w = std::max(w, d[static_cast<std::size_t>(std::min<int>(points, static_cast<int>(d.size())) - 1)]);
        }
        return w * (1.0 + 1e-12);
    }

    const std::vector<SizeCurve> &curves() const { return curves_; }

private:
    std::vector<SizeCurve> curves_;
    std::vector<Pchip> interp_;
    double beta_, nu_;
    int samples_;
};

// coarse scan followed by Brent around the best coarse point
std::pair<double, double> minimize(const Objective &f, double lo, double hi, double window, int steps) {
    double best = lo, best_value = std::numeric_limits<double>::infinity();
    const double h = (hi - lo) / steps;
    for(int i = 0; i <= steps; ++i) {
        const double m = lo + h * i;
        const double v = f(m, window);
        if(v < best_value) {
            best_value = v;
            best       = m;
        }
    }
    if(!std::isfinite(best_value)) throw std::invalid_argument("collapse: scaling windows of the sizes do not overlap");
    const auto r = boost::math::tools::brent_find_minima([&](double m) { return f(m, window); }, std::max(lo, best - h), std::min(hi, best + h), 52);
    return r.second <= best_value ? r : std::pair{best, best_value};
}

double median_spacing(const std::vector<SizeCurve> &curves) {
    std::vector<double> d;
    for(const auto &c : curves)
        for(std::size_t i = 1; i < c.m.size(); ++i) d.push_back(c.m[i] - c.m[i - 1]);
    std::sort(d.begin(), d.end());
    return d[d.size() / 2];
}

LineFit ordinary_line(std::span<const double> x, std::span<const double> y) {
    const auto n  = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for(std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if(!(sxx > 0.0)) throw std::invalid_argument("line fit: all abscissae coincide");
    LineFit f;
    f.slope     = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss  = 0.0;
    for(std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
    }
    const double s2  = x.size() > 2 ? rss / (n - 2.0) : 0.0;
    f.slope_err      = std::sqrt(s2 / sxx);
    f.intercept_err  = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    return f;
}

}  // namespace

double collapse_objective(const ScanTable &table, double m_c, double beta, double nu, double window, int samples) {
    auto curves = curves_of(table);
    for(const auto &c : curves)
        if(c.m.size() < 4) throw std::invalid_argument("collapse: need four masses per size to interpolate");
    return Objective(std::move(curves), beta, nu, samples)(m_c, window);
}

CollapseResult collapse_fit(const ScanTable &table, double beta, double nu, const CollapseOptions &options) {
    if(!(nu > 0.0)) throw std::invalid_argument("collapse: nu must be positive");
    auto curves = curves_of(table);
    require_grid(curves);
    const Objective f(std::move(curves), beta, nu, options.samples);

    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for(const auto &c : f.curves()) {
        lo = std::max(lo, c.m.front());
        hi = std::min(hi, c.m.back());
    }
    if(!(hi > lo)) throw std::invalid_argument("collapse: mass ranges of the sizes do not overlap");

    // stage 1 over the full common range, stage 2 inside the scaling window
    auto [m1, v1]       = minimize(f, lo, hi, options.window, options.coarse_steps);
    const double window = options.window > 0.0 ? options.window : f.window_for(m1, options.min_window_points);
    const double step   = median_spacing(f.curves());
    auto [m2, v2]       = minimize(f, std::max(lo, m1 - 3 * step), std::min(hi, m1 + 3 * step), window, std::max(40, options.coarse_steps / 4));

    CollapseResult out;
    out.m_c        = m2;
    out.objective  = v2;
    out.window     = window;
    out.beta       = beta;
    out.nu         = nu;
    out.grid_floor = 0.5 * step;
    const double h = 0.25 * step;
    const double curvature = (f(m2 + h, window) - 2.0 * v2 + f(m2 - h, window)) / (h * h);
    out.curvature_error    = curvature > 0.0 ? std::sqrt(2.0 * v2 / curvature) : 0.0;
    out.uncertainty        = std::max(out.grid_floor, out.curvature_error);
    for(const auto &c : f.curves()) {
        CollapseCurve cc{c.L, {}, {}};
        for(std::size_t i = 0; i < c.m.size(); ++i) {
            cc.x.push_back(std::pow(c.N, 1.0 / nu) * (c.m[i] - m2));
            cc.y.push_back(std::pow(c.N, beta / nu) * c.sigma[i]);
        }
        out.curves.push_back(std::move(cc));
    }
    return out;
}

CentralChargeFit central_charge_fit(std::span<const EntropyPoint> points) {
    if(points.size() < 4) throw std::invalid_argument("central_charge_fit: need at least four sizes");
    std::vector<double> x, y;
    for(const auto &p : points) {
        if(!(p.size > 0.0)) throw std::invalid_argument("central_charge_fit: sizes must be positive");
        x.push_back(std::log2(p.size));
        y.push_back(p.entropy);
    }
    const auto line = ordinary_line(x, y);
    return {6.0 * line.slope, 6.0 * line.slope_err, line.intercept, line.intercept_err};
}

GapScalingFit gap_scaling_fit(std::span<const GapPoint> points) {
    if(points.size() < 3) throw std::invalid_argument("gap_scaling_fit: need at least three sizes");
    GapScalingFit out;
    for(const auto &p : points) {
        if(p.N < 1) throw std::invalid_argument("gap_scaling_fit: bad chain length");
        const double r = p.delta / p.gamma;
        if(!(r > 0.0 && r < 1.0)) out.ratio_flagged = true;
        out.ratios.push_back(r);
    }
    const double k = static_cast<double>(points.size());
    out.ratio      = std::accumulate(out.ratios.begin(), out.ratios.end(), 0.0) / k;
    double var     = 0.0;
    for(double r : out.ratios) var += (r - out.ratio) * (r - out.ratio);
    out.ratio_err = std::sqrt(var / (k - 1.0) / k);
    out.x_s       = out.ratio / (1.0 - out.ratio);
    out.x_s_err   = out.ratio_err / ((1.0 - out.ratio) * (1.0 - out.ratio));

    std::vector<double> v;
    for(const auto &p : points) {
        const double scaled = p.delta * p.N * p.N;
        out.scaled_delta.push_back(scaled);
        v.push_back(scaled / (std::numbers::pi * out.x_s));
    }
    out.v_s      = std::accumulate(v.begin(), v.end(), 0.0) / k;
    double var_v = 0.0;
    for(double x : v) var_v += (x - out.v_s) * (x - out.v_s);
    // spread between sizes plus the propagated x_s error
    out.v_s_err = std::hypot(std::sqrt(var_v / (k - 1.0) / k), out.v_s * out.x_s_err / out.x_s);
    const auto [mn, mx] = std::minmax_element(out.scaled_delta.begin(), out.scaled_delta.end());
    const double mean   = std::accumulate(out.scaled_delta.begin(), out.scaled_delta.end(), 0.0) / k;
    out.scaled_spread   = (*mx - *mn) / mean;
    return out;
}

double entropy_flatness(std::span<const double> profile, int edge_margin) {
    const int N = static_cast<int>(profile.size()) - 1;
    if(N < 2) throw std::invalid_argument("entropy_flatness: profile too short");
    const int margin = edge_margin > 0 ? edge_margin : std::max(2, N / 6);
    if(2 * margin > N) throw std::invalid_argument("entropy_flatness: edge margin leaves no cuts");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    // cell boundaries only: cuts inside a cell carry a different, staggered entropy
    for(int c = margin + (margin & 1); c <= N - margin; c += 2) {
        lo = std::min(lo, profile[static_cast<std::size_t>(c)]);
        hi = std::max(hi, profile[static_cast<std::size_t>(c)]);
    }
    return hi - lo;
}

CrossoverReport crossover_diagnostics(const ScanTable &table, std::span<const EntropyProfile> profiles, const CrossoverOptions &options) {
    const auto sizes = table.sizes();
    if(sizes.size() < 2) throw std::invalid_argument("crossover_diagnostics: need at least two sizes");
    CrossoverReport rep;
    try {
        rep.collapse = collapse_fit(table);
        if(options.baseline_objective && *options.baseline_objective > 0.0) rep.objective_ratio = rep.collapse->objective / *options.baseline_objective;
    } catch(const std::invalid_argument &e) {
        rep.collapse_error = e.what();
    }

    for(int L : sizes) {
        const auto rows = table.at_size(L);
        CrossoverReport::GapMinimum g{L, 0.0, std::numeric_limits<double>::infinity()};
        for(const auto &r : rows)
            if(r.converged && std::isfinite(r.delta) && r.delta * r.sites() < g.raw_gap) g = {L, r.m, r.delta * r.sites()};
        if(std::isfinite(g.raw_gap)) rep.gap_minima.push_back(g);
        for(std::size_t i = 1; i < rows.size(); ++i) {
            const double a = rows[i - 1].sigma, b = rows[i].sigma;
            if((a < 0.0) != (b < 0.0)) {
                rep.crossings.push_back({L, rows[i - 1].m + (rows[i].m - rows[i - 1].m) * a / (a - b)});
                break;
            }
        }
    }
    rep.gap_non_closing = rep.gap_minima.size() >= 2;
    for(std::size_t i = 1; i < rep.gap_minima.size(); ++i)
        if(rep.gap_minima[i].raw_gap < rep.gap_minima[i - 1].raw_gap * (1.0 - options.gap_tolerance)) rep.gap_non_closing = false;
    if(!rep.crossings.empty() && rep.crossings.back().L == sizes.back()) rep.m_star = rep.crossings.back().m_star;
    for(const auto &p : profiles) rep.flatness.push_back({p.L, p.m, entropy_flatness(p.entropy, options.edge_margin)});
    rep.crossover = rep.gap_non_closing;
    return rep;
}

}  // namespace zngauge
