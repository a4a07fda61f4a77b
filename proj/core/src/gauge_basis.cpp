#include "zngauge/gauge_basis.hpp"

#include "zngauge/link_algebra.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <stdexcept>

namespace zngauge {

namespace {

void check_geometry(ChainGeometry geometry) {
    if(geometry.pairs < 1) throw std::invalid_argument("chain needs at least one physical site");
    if(geometry.sites() > 62) throw std::invalid_argument("occupation patterns are limited to 62 staggered sites");
}

void check_label(int k0, int n) {
    if(n < 2) throw std::invalid_argument("cyclic group order must be >= 2");
    if(k0 < 0 || k0 >= n) throw std::invalid_argument("boundary label k0 out of range [0, n)");
}

// key whose integer order equals the lexicographic order of n_0 n_1 ... n_{N-1}
Occupation lex_key(Occupation occ, int num_sites) {
    Occupation key = 0;
    for(int x = 0; x < num_sites; ++x)
        if(occupied(occ, x)) key |= Occupation{1} << (num_sites - 1 - x);
    return key;
}

}  // namespace

int filling(Occupation occ) { return std::popcount(occ); }

bool is_odd_site(int x) { return (x & 1) != 0; }

std::string occupation_string(Occupation occ, int num_sites) {
    std::string s(static_cast<std::size_t>(num_sites), '0');
    for(int x = 0; x < num_sites; ++x)
        if(occupied(occ, x)) s[static_cast<std::size_t>(x)] = '1';
    return s;
}

Occupation parse_occupation(const std::string &bits) {
    Occupation occ = 0;
    for(std::size_t x = 0; x < bits.size(); ++x) {
        if(bits[x] == '1') occ |= Occupation{1} << x;
        else if(bits[x] != '0') throw std::invalid_argument("occupation string may only contain 0 and 1: " + bits);
    }
    return occ;
}

std::vector<long> reconstruct_flux(Occupation occ, int num_sites, int k0) {
    std::vector<long> flux(static_cast<std::size_t>(num_sites) + 1);
    long q   = k0;
    flux[0]  = q;
    for(int x = 0; x < num_sites; ++x) {
        q += (occupied(occ, x) ? 1 : 0) - (is_odd_site(x) ? 1 : 0);
        flux[static_cast<std::size_t>(x) + 1] = q;
    }
    return flux;
}

std::vector<int> reconstruct_fields(Occupation occ, int num_sites, int k0, int n) {
    if(num_sites < 2) throw std::invalid_argument("need at least two staggered sites");
    const auto flux = reconstruct_flux(occ, num_sites, k0);
    std::vector<int> labels(static_cast<std::size_t>(num_sites) - 1);
    for(int x = 0; x + 1 < num_sites; ++x) labels[static_cast<std::size_t>(x)] = wrap_label(flux[static_cast<std::size_t>(x) + 1], n);
    return labels;
}

int gauss_residual(Occupation occ, int num_sites, int k0, int k_right, std::span<const int> labels, int x, int n) {
    const int left  = x == 0 ? k0 : labels[static_cast<std::size_t>(x) - 1];
    const int right = x == num_sites - 1 ? k_right : labels[static_cast<std::size_t>(x)];
    const long residual = (occupied(occ, x) ? 1 : 0) - (is_odd_site(x) ? 1 : 0) - (right - left);
    return wrap_label(residual, n);
}

std::vector<GaugeState> build_basis(ChainGeometry geometry, int n, int k0, bool fixed_filling) {
    check_geometry(geometry);
    check_label(k0, n);
    const int num_sites = geometry.sites();
    if(num_sites > 40) throw std::invalid_argument("explicit basis construction is limited to 40 staggered sites");

    std::vector<Occupation> patterns;
    const Occupation limit = Occupation{1} << num_sites;
    if(fixed_filling) {
        // Gosper's hack over all patterns of popcount L
        Occupation v = (Occupation{1} << geometry.pairs) - 1;
        while(v < limit) {
            patterns.push_back(v);
            const Occupation c = v & (~v + 1);
            const Occupation r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    } else {
        patterns.reserve(static_cast<std::size_t>(limit));
        for(Occupation v = 0; v < limit; ++v) patterns.push_back(v);
    }
    std::sort(patterns.begin(), patterns.end(),
              [num_sites](Occupation a, Occupation b) { return lex_key(a, num_sites) < lex_key(b, num_sites); });

    std::vector<GaugeState> basis;
    basis.reserve(patterns.size());
    for(Occupation p : patterns) basis.push_back(GaugeState{p, k0});
    return basis;
}

std::vector<GaugeState> build_all_sectors(ChainGeometry geometry, int n, bool fixed_filling) {
    std::vector<GaugeState> all;
    for(int k0 = 0; k0 < n; ++k0) {
        auto sector = build_basis(geometry, n, k0, fixed_filling);
        all.insert(all.end(), sector.begin(), sector.end());
    }
    return all;
}

PairCellBasis::PairCellBasis(int n) : n_(n) {
    if(n < 2) throw std::invalid_argument("cyclic group order must be >= 2");
    for(int k = 0; k < n; ++k)
        for(int e = 0; e < 2; ++e)
            for(int o = 0; o < 2; ++o) {
                CellState s;
                s.k_left   = k;
                s.occ_even = e;
                s.occ_odd  = o;
                s.k_mid    = wrap_label(k + e, n);
                s.k_right  = wrap_label(k + e + o - 1, n);
                states_.push_back(s);
            }
    std::stable_sort(states_.begin(), states_.end(), [](const CellState &a, const CellState &b) {
        if(a.k_left != b.k_left) return a.k_left < b.k_left;
        return a.k_right < b.k_right;
    });
    lookup_.assign(static_cast<std::size_t>(4 * n), -1);
    for(int i = 0; i < size(); ++i) {
        const auto &s = states_[static_cast<std::size_t>(i)];
        lookup_[static_cast<std::size_t>(4 * s.k_left + 2 * s.occ_even + s.occ_odd)] = i;
    }
}

int PairCellBasis::index_of(int k_left, int occ_even, int occ_odd) const {
    if(k_left < 0 || k_left >= n_ || occ_even < 0 || occ_even > 1 || occ_odd < 0 || occ_odd > 1)
        throw std::out_of_range("cell label out of range");
    return lookup_[static_cast<std::size_t>(4 * k_left + 2 * occ_even + occ_odd)];
}

PairCellBasis pair_cell_basis(int n) { return PairCellBasis(n); }

std::vector<int> to_cells(const GaugeState &state, ChainGeometry geometry, const PairCellBasis &cells) {
    const int n    = cells.order();
    const auto flux = reconstruct_flux(state.occupation, geometry.sites(), state.k0);
    std::vector<int> out(static_cast<std::size_t>(geometry.pairs));
    for(int j = 0; j < geometry.pairs; ++j) {
        const int k_left = wrap_label(flux[static_cast<std::size_t>(2 * j)], n);
        out[static_cast<std::size_t>(j)] =
            cells.index_of(k_left, occupied(state.occupation, 2 * j) ? 1 : 0, occupied(state.occupation, 2 * j + 1) ? 1 : 0);
    }
    return out;
}

std::optional<GaugeState> from_cells(std::span<const int> cell_indices, const PairCellBasis &cells) {
    if(cell_indices.empty()) return std::nullopt;
    GaugeState state;
    state.k0 = cells[cell_indices.front()].k_left;
    int previous_right = state.k0;
    for(std::size_t j = 0; j < cell_indices.size(); ++j) {
        const auto &c = cells[cell_indices[j]];
        if(c.k_left != previous_right) return std::nullopt;
        if(c.occ_even != 0) state.occupation |= Occupation{1} << (2 * j);
        if(c.occ_odd != 0) state.occupation |= Occupation{1} << (2 * j + 1);
        previous_right = c.k_right;
    }
    return state;
}

CpImage apply_cp(const GaugeState &state, ChainGeometry geometry, int n) {
    check_geometry(geometry);
    check_label(state.k0, n);
    const int num_sites = geometry.sites();

    // psi^dag_x -> (-1)^{x+1} psi_{N-1-x}; the vacuum maps to the filled chain.
    // Apply the image operators right to left on the filled pattern and track
    // the Jordan-Wigner signs.
    Occupation image = (Occupation{1} << num_sites) - 1;
    int sign         = 1;
    for(int x = num_sites - 1; x >= 0; --x) {
        if(!occupied(state.occupation, x)) continue;
        const int y = num_sites - 1 - x;
        if(is_odd_site(x + 1)) sign = -sign;
        const Occupation below = image & ((Occupation{1} << y) - 1);
        if(std::popcount(below) % 2 != 0) sign = -sign;
        image &= ~(Occupation{1} << y);
    }
    // the left virtual link of the image is the mirrored right virtual link
    const auto flux = reconstruct_flux(state.occupation, num_sites, state.k0);
    CpImage out;
    out.state = GaugeState{image, wrap_label(flux.back(), n)};
    out.sign  = sign;
    return out;
}

void write_basis_dump(std::ostream &os, std::span<const GaugeState> basis, ChainGeometry geometry, int n) {
    for(const auto &s : basis) {
        os << occupation_string(s.occupation, geometry.sites()) << ' ' << s.k0;
        for(int label : reconstruct_fields(s.occupation, geometry.sites(), s.k0, n)) os << ' ' << label;
        os << '\n';
    }
}

}  // namespace zngauge
