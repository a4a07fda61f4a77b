#include "zngauge/hamiltonian.hpp"

#include "zngauge/link_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace zngauge {

double ModelParams::hop_coeff() const { return t * n / (2.0 * std::numbers::pi); }
double ModelParams::mass_coeff() const { return m * n / (2.0 * std::numbers::pi); }

void ModelParams::validate() const {
    if(n < 2) throw std::invalid_argument("model: n must be >= 2");
    if(!(t >= 0.0)) throw std::invalid_argument("model: t must be >= 0");
    if(!std::isfinite(m) || !std::isfinite(phi)) throw std::invalid_argument("model: m and phi must be finite");
    if(geometry.pairs < 1) throw std::invalid_argument("model: need at least one physical site");
    if(k0 < 0 || k0 >= n) throw std::invalid_argument("model: boundary label k0 outside [0, n)");
}

std::vector<int> zero_charge_sector_candidates(int n, double phi) {
    double best = std::numeric_limits<double>::infinity();
    for(int k = 0; k < n; ++k) best = std::min(best, std::abs(tilde_field(n, phi, k)));
    std::vector<int> out;
    for(int k = 0; k < n; ++k)
        if(std::abs(std::abs(tilde_field(n, phi, k)) - best) < 1e-12) out.push_back(k);
    return out;
}

double diagonal_energy(const ModelParams &params, const GaugeState &state) {
    const int num_sites = params.geometry.sites();
    int staggered       = 0;
    for(int x = 0; x < num_sites; ++x)
        if(occupied(state.occupation, x)) staggered += is_odd_site(x) ? -1 : 1;
    double electric = 0.0;
    for(int label : reconstruct_fields(state.occupation, num_sites, state.k0, params.n)) {
        const double e = tilde_field(params.n, params.phi, label);
        electric += e * e;
    }
    return params.mass_coeff() * staggered + ModelParams::electric_coeff * electric;
}

// ---------------------------------------------------------------------------

SparseOperator::SparseOperator(std::size_t dim, std::vector<Entry> entries) : dim_(dim) {
    std::sort(entries.begin(), entries.end(), [](const Entry &a, const Entry &b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_start_.assign(dim + 1, 0);
    for(const auto &e : entries) {
        if(e.row >= dim || e.col >= dim) throw std::out_of_range("sparse entry outside operator dimension");
        if(!cols_.empty() && row_start_[e.row + 1] > 0 && cols_.back() == e.col && values_.size() > row_start_[e.row]) {
            // merge duplicates within a row
            if(cols_.size() > row_start_[e.row] && cols_.back() == e.col) {
                values_.back() += e.value;
                continue;
            }
        }
        cols_.push_back(e.col);
        values_.push_back(e.value);
        row_start_[e.row + 1] = cols_.size();
    }
    for(std::size_t r = 1; r <= dim; ++r) row_start_[r] = std::max(row_start_[r], row_start_[r - 1]);
}

void SparseOperator::apply(const Eigen::VectorXd &x, Eigen::VectorXd &y, int workers) const {
    if(static_cast<std::size_t>(x.size()) != dim_) throw std::invalid_argument("sparse apply: dimension mismatch");
    y.resize(static_cast<Eigen::Index>(dim_));
    auto rows = [&](std::size_t begin, std::size_t end) {
        for(std::size_t r = begin; r < end; ++r) {
            double acc = 0.0;
            for(std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) acc += values_[k] * x[static_cast<Eigen::Index>(cols_[k])];
            y[static_cast<Eigen::Index>(r)] = acc;
        }
    };
    if(workers <= 1 || dim_ < 4096) {
        rows(0, dim_);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (dim_ + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
    for(std::size_t begin = 0; begin < dim_; begin += chunk) pool.emplace_back(rows, begin, std::min(dim_, begin + chunk));
}

Eigen::VectorXd SparseOperator::operator*(const Eigen::VectorXd &x) const {
    Eigen::VectorXd y;
    apply(x, y);
    return y;
}

Eigen::VectorXd SparseOperator::diagonal() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    for(std::size_t r = 0; r < dim_; ++r)
        for(std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k)
            if(cols_[k] == r) d[static_cast<Eigen::Index>(r)] += values_[k];
    return d;
}

Eigen::MatrixXd SparseOperator::to_dense() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for(std::size_t r = 0; r < dim_; ++r)
        for(std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k)
            h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols_[k])) += values_[k];
    return h;
}

std::vector<SparseOperator::Entry> SparseOperator::entries() const {
    std::vector<Entry> out;
    out.reserve(values_.size());
    for(std::size_t r = 0; r < dim_; ++r)
        for(std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) out.push_back({r, cols_[k], values_[k]});
    return out;
}

bool SparseOperator::is_symmetric(double tol) const {
    std::map<std::pair<std::size_t, std::size_t>, double> lookup;
    for(const auto &e : entries()) lookup[{e.row, e.col}] = e.value;
    for(const auto &[key, value] : lookup) {
        auto it = lookup.find({key.second, key.first});
        if(it == lookup.end() || std::abs(it->second - value) > tol) return false;
    }
    return true;
}

void SparseOperator::write_coordinates(std::ostream &os) const {
    const auto old = os.precision(17);
    for(const auto &e : entries()) os << e.row << ' ' << e.col << ' ' << e.value << '\n';
    os.precision(old);
}

namespace {

std::uint64_t state_key(const GaugeState &s) { return (s.occupation << 8U) | static_cast<std::uint64_t>(s.k0); }

}  // namespace

SparseOperator build_sparse(const ModelParams &params, std::span<const GaugeState> basis) {
    params.validate();
    if(params.n > 255) throw std::invalid_argument("build_sparse: n above 255 is not supported");
    const int num_sites = params.geometry.sites();
    if(num_sites > 56) throw std::invalid_argument("build_sparse: chain too long for an explicit basis");
    const Occupation mask = (Occupation{1} << num_sites) - 1;

    std::unordered_map<std::uint64_t, std::size_t> index;
    index.reserve(basis.size() * 2);
    for(std::size_t i = 0; i < basis.size(); ++i) {
        const auto &s = basis[i];
        if((s.occupation & ~mask) != 0) throw std::invalid_argument("build_sparse: basis state longer than the chain");
        if(s.k0 < 0 || s.k0 >= params.n) throw std::invalid_argument("build_sparse: basis sector label outside [0, n)");
        if(!index.emplace(state_key(s), i).second) throw std::invalid_argument("build_sparse: duplicate basis state");
    }

    const double hop = params.hop_coeff();
    std::vector<SparseOperator::Entry> entries;
    entries.reserve(basis.size() * static_cast<std::size_t>(num_sites));
    for(std::size_t i = 0; i < basis.size(); ++i) {
        const auto &s = basis[i];
        entries.push_back({i, i, diagonal_energy(params, s)});
        if(hop == 0.0) continue;
        for(int x = 0; x + 1 < num_sites; ++x) {
            const bool left  = occupied(s.occupation, x);
            const bool right = occupied(s.occupation, x + 1);
            if(left == right) continue;
            // nearest-neighbour hop: no fermions in between, Jordan-Wigner sign is +1;
            // the link label follows from Gauss' law of the target pattern
            GaugeState target{s.occupation ^ ((Occupation{3}) << x), s.k0};
            auto it = index.find(state_key(target));
            if(it == index.end()) throw std::invalid_argument("build_sparse: basis is not closed under hopping");
            entries.push_back({i, it->second, -hop});
        }
    }
    return SparseOperator(basis.size(), std::move(entries));
}

// ---------------------------------------------------------------------------

void CellOperator::add(int from, int to, double value) {
    if(value == 0.0) return;
    auto &list = from_.at(static_cast<std::size_t>(from));
    for(auto &tr : list)
        if(tr.to == to) {
            tr.value += value;
            return;
        }
    list.push_back({to, value});
}

bool CellOperator::empty() const {
    return std::all_of(from_.begin(), from_.end(), [](const auto &l) { return l.empty(); });
}

bool CellOperator::is_diagonal() const {
    for(int s = 0; s < dim(); ++s)
        for(const auto &tr : from(s))
            if(tr.to != s) return false;
    return true;
}

Eigen::MatrixXd CellOperator::to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
    for(int s = 0; s < dim(); ++s)
        for(const auto &tr : from(s)) m(tr.to, s) += tr.value;
    return m;
}

Mpo build_mpo(const ModelParams &params, const PairCellBasis &cells) {
    params.validate();
    if(cells.order() != params.n) throw std::invalid_argument("build_mpo: cell basis order differs from n");
    const int dim   = cells.size();
    const int pairs = params.geometry.pairs;
    const double hop = params.hop_coeff();
    const double mu  = params.mass_coeff();

    Mpo mpo;
    mpo.n = params.n;
    mpo.sites.resize(static_cast<std::size_t>(pairs));
    for(int j = 0; j < pairs; ++j) {
        const bool first = j == 0;
        const bool last  = j == pairs - 1;

        CellOperator identity(dim), local(dim), raise_odd(dim), lower_odd(dim), lower_even(dim), raise_even(dim);
        for(int s = 0; s < dim; ++s) {
            const auto &c = cells[s];
            identity.add(s, s, 1.0);

            const double e_mid = tilde_field(params.n, params.phi, c.k_mid);
            double diag        = mu * (c.occ_even - c.occ_odd) + ModelParams::electric_coeff * e_mid * e_mid;
            if(!last) {
                const double e_right = tilde_field(params.n, params.phi, c.k_right);
                diag += ModelParams::electric_coeff * e_right * e_right;
            }
            local.add(s, s, diag);

            // intra-cell hop between the even and odd site shifts the middle label only
            if(c.occ_even == 0 && c.occ_odd == 1) {
                const int to = cells.index_of(c.k_left, 1, 0);
                local.add(s, to, -hop);
                local.add(to, s, -hop);
            }
            if(c.occ_odd == 0) raise_odd.add(s, cells.index_of(c.k_left, c.occ_even, 1), 1.0);
            if(c.occ_odd == 1) lower_odd.add(s, cells.index_of(c.k_left, c.occ_even, 0), 1.0);
            // annihilating the even site of the next cell raises its incoming label
            if(c.occ_even == 1) lower_even.add(s, cells.index_of(wrap_label(c.k_left + 1, params.n), 0, c.occ_odd), 1.0);
            if(c.occ_even == 0) raise_even.add(s, cells.index_of(wrap_label(c.k_left - 1, params.n), 1, c.occ_odd), 1.0);
        }

        auto scaled = [](CellOperator op, double f) {
            CellOperator out(op.dim());
            for(int s = 0; s < op.dim(); ++s)
                for(const auto &tr : op.from(s)) out.add(s, tr.to, f * tr.value);
            return out;
        };

        auto &w = mpo.sites[static_cast<std::size_t>(j)];
        w.push_back({0, 0, identity});
        if(!last && hop != 0.0) {
            // psi^dag_{odd,j} psi_{even,j+1} and its conjugate
            w.push_back({0, 1, scaled(raise_odd, -hop)});
            w.push_back({0, 2, scaled(lower_odd, -hop)});
        }
        w.push_back({0, 3, local});
        if(!first && hop != 0.0) {
            w.push_back({1, 3, lower_even});
            w.push_back({2, 3, raise_even});
        }
        w.push_back({3, 3, identity});
    }
    return mpo;
}

Eigen::MatrixXd mpo_matrix(const Mpo &mpo, const PairCellBasis &cells, std::span<const GaugeState> basis, ChainGeometry geometry) {
    const auto dim = static_cast<Eigen::Index>(basis.size());
    std::vector<std::vector<int>> labels;
    labels.reserve(basis.size());
    for(const auto &s : basis) labels.push_back(to_cells(s, geometry, cells));

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for(Eigen::Index col = 0; col < dim; ++col) {
        for(Eigen::Index row = 0; row < dim; ++row) {
            std::array<double, Mpo::channels> acc{};
            acc[Mpo::start] = 1.0;
            for(std::size_t j = 0; j < mpo.sites.size(); ++j) {
                std::array<double, Mpo::channels> next{};
                const int from = labels[static_cast<std::size_t>(col)][j];
                const int to   = labels[static_cast<std::size_t>(row)][j];
                for(const auto &entry : mpo.sites[j]) {
                    if(acc[static_cast<std::size_t>(entry.left)] == 0.0) continue;
                    for(const auto &tr : entry.op.from(from))
                        if(tr.to == to) next[static_cast<std::size_t>(entry.right)] += acc[static_cast<std::size_t>(entry.left)] * tr.value;
                }
                acc = next;
            }
            h(row, col) = acc[Mpo::finish];
        }
    }
    return h;
}

std::vector<double> diagonal_level_crossings(const ModelParams &params, std::span<const GaugeState> basis) {
    // slope per unit m is an integer multiple of n / (2 pi)
    std::map<int, double> lowest_offset;  // staggered occupation -> min electric energy
    const int num_sites = params.geometry.sites();
    for(const auto &s : basis) {
        int staggered = 0;
        for(int x = 0; x < num_sites; ++x)
            if(occupied(s.occupation, x)) staggered += is_odd_site(x) ? -1 : 1;
        ModelParams massless = params;
        massless.m           = 0.0;
        const double offset  = diagonal_energy(massless, s);
        auto [it, inserted]  = lowest_offset.emplace(staggered, offset);
        if(!inserted) it->second = std::min(it->second, offset);
    }
    const double unit = params.n / (2.0 * std::numbers::pi);

    struct Line {
        double slope, offset;
    };
    std::vector<Line> lines;
    for(auto it = lowest_offset.rbegin(); it != lowest_offset.rend(); ++it) lines.push_back({unit * it->first, it->second});

    // lower envelope, slopes strictly decreasing
    auto meet = [](const Line &a, const Line &b) { return (b.offset - a.offset) / (a.slope - b.slope); };
    std::vector<Line> hull;
    for(const auto &l : lines) {
        while(hull.size() >= 2 && meet(hull[hull.size() - 2], l) <= meet(hull[hull.size() - 2], hull.back()) + 1e-13) hull.pop_back();
        hull.push_back(l);
    }
    std::vector<double> crossings;
    for(std::size_t i = 1; i < hull.size(); ++i) crossings.push_back(meet(hull[i - 1], hull[i]));
    return crossings;
}

}  // namespace zngauge
