#include "zngauge/observables.hpp"

#include "zngauge/link_algebra.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace zngauge {

namespace {

void require_normalized(const Eigen::VectorXd &psi, std::span<const GaugeState> basis) {
    if(psi.size() != static_cast<Eigen::Index>(basis.size())) throw std::invalid_argument("observables: state and basis differ in size");
    if(std::abs(psi.norm() - 1.0) > 1e-8) throw std::invalid_argument("observables: state is not normalized");
}

void require_sites(int sites) {
    if(sites < 2 || sites > 64 || sites % 2 != 0) throw std::invalid_argument("observables: chain needs an even number of sites in [2, 64]");
}

}  // namespace

OrderParameter order_parameter(std::span<const double> field_tilde, int n, int sites) {
    require_sites(sites);
    if(static_cast<int>(field_tilde.size()) != sites - 1) throw std::invalid_argument("order_parameter: need one field value per internal link");
    const double quantum = electric_quantum(n);
    OrderParameter out;
    double sum = 0.0;
    for(double e : field_tilde) {
        sum += e;
        out.field_profile.push_back(quantum * e);
    }
    out.sigma_tilde = sum / sites;
    out.sigma       = quantum * out.sigma_tilde;
    return out;
}

OrderParameter order_parameter(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, const ModelParams &params) {
    require_normalized(psi, basis);
    const int N = params.geometry.sites();
    std::vector<double> field(static_cast<std::size_t>(N - 1), 0.0);
    for(std::size_t i = 0; i < basis.size(); ++i) {
        const double w = psi[static_cast<Eigen::Index>(i)] * psi[static_cast<Eigen::Index>(i)];
        if(w == 0.0) continue;
        const auto labels = reconstruct_fields(basis[i].occupation, N, basis[i].k0, params.n);
        for(int x = 0; x + 1 < N; ++x) field[static_cast<std::size_t>(x)] += w * tilde_field(params.n, params.phi, labels[static_cast<std::size_t>(x)]);
    }
    return order_parameter(field, params.n, N);
}

std::vector<double> density_profile(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, int sites) {
    require_normalized(psi, basis);
    require_sites(sites);
    std::vector<double> out(static_cast<std::size_t>(sites), 0.0);
    for(std::size_t i = 0; i < basis.size(); ++i) {
        const double w = psi[static_cast<Eigen::Index>(i)] * psi[static_cast<Eigen::Index>(i)];
        for(int x = 0; x < sites; ++x)
            if(occupied(basis[i].occupation, x)) out[static_cast<std::size_t>(x)] += w;
    }
    return out;
}

std::vector<double> mean_flux(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, int sites) {
    require_normalized(psi, basis);
    require_sites(sites);
    std::vector<double> out(static_cast<std::size_t>(sites) + 1, 0.0);
    for(std::size_t i = 0; i < basis.size(); ++i) {
        const double w    = psi[static_cast<Eigen::Index>(i)] * psi[static_cast<Eigen::Index>(i)];
        const auto fluxes = reconstruct_flux(basis[i].occupation, sites, basis[i].k0);
        for(std::size_t x = 0; x < out.size(); ++x) out[x] += w * static_cast<double>(fluxes[x]);
    }
    return out;
}

std::vector<double> flux_from_density(std::span<const double> density, int k0) {
    std::vector<double> out{static_cast<double>(k0)};
    for(std::size_t y = 0; y < density.size(); ++y) out.push_back(out.back() + density[y] - static_cast<double>(y % 2));
    return out;
}

double entanglement_entropy(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, int sites, int cut) {
    require_normalized(psi, basis);
    require_sites(sites);
    if(cut < 0 || cut > sites) throw std::out_of_range("entanglement_entropy: cut outside [0, N]");
    if(cut == 0 || cut == sites) return 0.0;

    // one block per (left filling, k0); rows are left patterns, columns right patterns
    struct Block {
        std::unordered_map<Occupation, Eigen::Index> rows, cols;
        std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
    };
    std::map<std::pair<int, int>, Block> blocks;
    const Occupation mask = (Occupation{1} << cut) - 1;
    for(std::size_t i = 0; i < basis.size(); ++i) {
        const double a = psi[static_cast<Eigen::Index>(i)];
        if(a == 0.0) continue;
        const Occupation left  = basis[i].occupation & mask;
        const Occupation right = basis[i].occupation >> cut;
        auto &b                = blocks[{filling(left), basis[i].k0}];
        const auto r           = b.rows.emplace(left, static_cast<Eigen::Index>(b.rows.size())).first->second;
        const auto c           = b.cols.emplace(right, static_cast<Eigen::Index>(b.cols.size())).first->second;
        b.entries.emplace_back(r, c, a);
    }
    std::vector<double> values;
    for(const auto &[key, b] : blocks) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b.rows.size()), static_cast<Eigen::Index>(b.cols.size()));
        for(const auto &[r, c, a] : b.entries) m(r, c) = a;
        const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
        values.insert(values.end(), s.data(), s.data() + s.size());
    }
    return schmidt_entropy(values);
}

std::vector<double> entropy_profile(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, int sites) {
    std::vector<double> out;
    for(int cut = 0; cut <= sites; ++cut) out.push_back(entanglement_entropy(psi, basis, sites, cut));
    return out;
}

OrderParameter order_parameter(const MpsState &psi, const ModelParams &params) {
    if(std::abs(psi.norm() - 1.0) > 1e-8) throw std::invalid_argument("observables: state is not normalized");
    const auto m = measure(psi, params.phi);
    return order_parameter(m.field_tilde, params.n, 2 * psi.num_cells());
}

double entanglement_entropy(const MpsState &psi, int cut) {
    const int N = 2 * psi.num_cells();
    if(cut < 0 || cut > N) throw std::out_of_range("entanglement_entropy: cut outside [0, N]");
    return measure(psi, 0.0).entropy[static_cast<std::size_t>(cut)];
}

GapPair gaps(const SpectrumResult &spectrum, int sites) {
    if(spectrum.eigenvalues.size() < 3) throw std::invalid_argument("gaps: need three levels");
    if(!spectrum.converged) throw std::invalid_argument("gaps: levels are not converged");
    if(sites < 1) throw std::invalid_argument("gaps: bad chain length");
    std::vector<double> e(spectrum.eigenvalues.begin(), spectrum.eigenvalues.begin() + 3);
    std::sort(e.begin(), e.end());
    GapPair out;
    out.raw_delta = e[1] - e[0];
    out.raw_gamma = e[2] - e[0];
    out.delta     = out.raw_delta / sites;
    out.gamma     = out.raw_gamma / sites;
    return out;
}

ObservableSet measure_ed(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, const ModelParams &params) {
    const int N          = params.geometry.sites();
    const auto op        = order_parameter(psi, basis, params);
    ObservableSet out;
    out.sigma            = op.sigma;
    out.sigma_tilde      = op.sigma_tilde;
    out.field_profile    = op.field_profile;
    out.density_profile  = density_profile(psi, basis, N);
    out.entropy_profile  = entropy_profile(psi, basis, N);
    return out;
}

ObservableSet measure_mps(const MpsState &psi, const ModelParams &params) {
    if(std::abs(psi.norm() - 1.0) > 1e-8) throw std::invalid_argument("observables: state is not normalized");
    const auto m  = measure(psi, params.phi);
    const int N   = 2 * psi.num_cells();
    const auto op = order_parameter(m.field_tilde, params.n, N);
    ObservableSet out;
    out.sigma           = op.sigma;
    out.sigma_tilde     = op.sigma_tilde;
    out.field_profile   = op.field_profile;
    out.density_profile = m.density;
    out.entropy_profile = m.entropy;
    return out;
}

}  // namespace zngauge
