#include "zngauge/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace zngauge {

namespace {

std::size_t index_of(const std::vector<std::string> &names, const std::string &name) {
    auto it = std::find(names.begin(), names.end(), name);
    if(it == names.end()) throw std::out_of_range("fit has no coefficient '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

double FitResult::value(const std::string &name) const { return coefficients[static_cast<Eigen::Index>(index_of(names, name))]; }

double FitResult::error(const std::string &name) const {
    const auto i = static_cast<Eigen::Index>(index_of(names, name));
    return std::sqrt(covariance(i, i));
}

FitResult weighted_least_squares(const Eigen::MatrixXd &design, std::span<const double> y, std::span<const double> sigma,
                                 std::vector<std::string> names) {
    const Eigen::Index rows = design.rows(), cols = design.cols();
    if(static_cast<Eigen::Index>(y.size()) != rows || static_cast<Eigen::Index>(sigma.size()) != rows || static_cast<Eigen::Index>(names.size()) != cols)
        throw std::invalid_argument("least squares: inconsistent sizes");
    if(rows <= cols) throw std::invalid_argument("least squares: need more points than coefficients");
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    for(Eigen::Index i = 0; i < rows; ++i) {
        const double s = sigma[static_cast<std::size_t>(i)];
        if(!(s > 0.0)) throw std::invalid_argument("least squares: every sigma must be positive");
        A.row(i) = design.row(i) / s;
        b[i]     = y[static_cast<std::size_t>(i)] / s;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if(qr.rank() < cols) throw std::invalid_argument("least squares: design matrix is rank deficient");

    FitResult out;
    out.names        = std::move(names);
    out.coefficients = qr.solve(b);
    const Eigen::MatrixXd normal = A.transpose() * A;
    out.covariance   = normal.inverse();
    out.dof          = static_cast<int>(rows - cols);
    const Eigen::VectorXd model = design * out.coefficients;
    for(Eigen::Index i = 0; i < rows; ++i) {
        const double r = y[static_cast<std::size_t>(i)] - model[i];
        out.residuals.push_back(r);
        out.pulls.push_back(r / sigma[static_cast<std::size_t>(i)]);
        out.chi2 += out.pulls.back() * out.pulls.back();
    }
    out.covariance *= std::max(1.0, out.chi2 / out.dof);
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

FitResult fit_critical_line(std::span<const CriticalPoint> points) {
    if(points.size() < 4) throw std::invalid_argument("fit_critical_line: need at least four points");
    Eigen::MatrixXd design(static_cast<Eigen::Index>(points.size()), 3);
    std::vector<double> y, s;
    for(std::size_t i = 0; i < points.size(); ++i) {
        if(points[i].t < 0.0) throw std::invalid_argument("fit_critical_line: negative t");
        const auto r = static_cast<Eigen::Index>(i);
        design(r, 0) = 1.0;
        design(r, 1) = std::sqrt(points[i].t);
        design(r, 2) = points[i].t;
        y.push_back(points[i].m_c);
        s.push_back(points[i].sigma);
    }
    return weighted_least_squares(design, y, s, {"m0", "alpha", "beta"});
}

std::vector<CriticalPoint> read_critical_line_csv(std::istream &is) {
    std::string line;
    if(!std::getline(is, line)) throw std::runtime_error("critical line csv: empty input");
    while(!line.empty() && line.back() == '\r') line.pop_back();
    if(line != "t,m_c,sigma") throw std::runtime_error("critical line csv: expected header t,m_c,sigma");
    std::vector<CriticalPoint> out;
    std::size_t number = 1;
    while(std::getline(is, line)) {
        ++number;
        if(line.empty() || line == "\r") continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        CriticalPoint p;
        if(!(ss >> p.t >> p.m_c >> p.sigma)) throw std::runtime_error("critical line csv line " + std::to_string(number) + ": expected three numbers");
        out.push_back(p);
    }
    return out;
}

LargeNFit extrapolate_large_n(std::span<const AlphaPoint> alphas, Parity parity, std::optional<double> fixed_b) {
    if(alphas.size() < 3) throw std::invalid_argument("extrapolate_large_n: need at least three values");
    const int want = parity == Parity::odd ? 1 : 0;
    for(const auto &a : alphas)
        if(a.n < 2 || a.n % 2 != want) throw std::invalid_argument("extrapolate_large_n: n = " + std::to_string(a.n) + " has the wrong parity");
    const auto rows = static_cast<Eigen::Index>(alphas.size());
    const Eigen::Index cols = fixed_b ? 1 : 2;
    Eigen::MatrixXd design(rows, cols);
    std::vector<double> y, s;
    for(Eigen::Index i = 0; i < rows; ++i) {
        const auto &a = alphas[static_cast<std::size_t>(i)];
        if(fixed_b) design(i, 0) = 1.0 / std::sqrt(a.n);
        else {
            design(i, 0) = 1.0;
            design(i, 1) = 1.0 / std::sqrt(a.n);
        }
        y.push_back(a.alpha - fixed_b.value_or(0.0));
        s.push_back(a.sigma);
    }
    LargeNFit out;
    out.b_fixed = fixed_b.has_value();
    out.fit     = weighted_least_squares(design, y, s, fixed_b ? std::vector<std::string>{"d"} : std::vector<std::string>{"b", "d"});
    out.b       = fixed_b ? *fixed_b : out.fit.value("b");
    out.b_err   = fixed_b ? 0.0 : out.fit.error("b");
    out.d       = out.fit.value("d");
    out.d_err   = out.fit.error("d");
    out.m_c     = out.d / std::sqrt(2.0 * std::numbers::pi);
    out.m_c_err = out.d_err / std::sqrt(2.0 * std::numbers::pi);
    return out;
}

double analytic_t0_mass(int n) {
    if(n < 2) throw std::invalid_argument("analytic_t0_mass: n must be at least 2");
    return n % 2 == 1 ? -std::numbers::pi / n : 0.0;
}

}  // namespace zngauge
