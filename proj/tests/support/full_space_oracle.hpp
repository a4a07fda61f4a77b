#pragma once

// Independent reference: the lattice Hamiltonian on the unconstrained
// fermion x link tensor space, built from explicit Jordan-Wigner and Weyl
// matrices. Only usable for a handful of sites.

#include "zngauge/gauge_basis.hpp"
#include "zngauge/hamiltonian.hpp"
#include "zngauge/link_algebra.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// tensor factor order: fermion 0, link (0,1), fermion 1, link (1,2), ..., fermion N-1
struct FullSpace {
    int num_sites;
    int n;
    std::vector<int> dims;

    long size() const {
        long d = 1;
        for(int x : dims) d *= x;
        return d;
    }
    int fermion_factor(int x) const { return 2 * x; }
    int link_factor(int x) const { return 2 * x + 1; }

    long index(const std::vector<int> &digits) const {
        long i = 0;
        for(std::size_t f = 0; f < dims.size(); ++f) i = i * dims[f] + digits[f];
        return i;
    }
};

inline FullSpace full_space(int num_sites, int n) {
    FullSpace s{num_sites, n, {}};
    for(int x = 0; x < num_sites; ++x) {
        s.dims.push_back(2);
        if(x + 1 < num_sites) s.dims.push_back(n);
    }
    return s;
}

using Sparse = Eigen::SparseMatrix<std::complex<double>>;

inline Sparse embed(const FullSpace &space, const std::vector<std::pair<int, Eigen::MatrixXcd>> &factors) {
    Sparse out(1, 1);
    out.insert(0, 0) = 1.0;
    for(std::size_t f = 0; f < space.dims.size(); ++f) {
        Eigen::MatrixXcd local = Eigen::MatrixXcd::Identity(space.dims[f], space.dims[f]);
        for(const auto &[which, m] : factors)
            if(which == static_cast<int>(f)) local = m;
        const Sparse s = local.sparseView();
        Sparse next    = Eigen::kroneckerProduct(out, s);
        out            = next;
    }
    return out;
}

// annihilation operator with the Jordan-Wigner string on the fermions to its left
inline Sparse annihilate(const FullSpace &space, int x) {
    Eigen::MatrixXcd a(2, 2), z(2, 2);
    a << 0, 1, 0, 0;
    z << 1, 0, 0, -1;
    std::vector<std::pair<int, Eigen::MatrixXcd>> factors;
    for(int y = 0; y < x; ++y) factors.push_back({space.fermion_factor(y), z});
    factors.push_back({space.fermion_factor(x), a});
    return embed(space, factors);
}

inline Sparse hamiltonian(const zngauge::ModelParams &p) {
    const int N      = p.geometry.sites();
    const auto space = full_space(N, p.n);
    const auto weyl  = zngauge::weyl_pair(p.n);
    const double w   = p.t * p.n / (2 * std::numbers::pi);
    const double mu  = p.m * p.n / (2 * std::numbers::pi);
    Eigen::MatrixXcd etilde2 = Eigen::MatrixXcd::Zero(p.n, p.n);
    for(int k = 0; k < p.n; ++k) {
        const double e = k - 0.5 * (p.n - 1) + p.phi;
        etilde2(k, k)  = e * e;
    }
    const long dim     = space.size();
    Sparse H(dim, dim);
    for(int x = 0; x < N; ++x) {
        const Sparse c  = annihilate(space, x);
        const Sparse cd = c.adjoint();
        H += std::complex<double>(mu * ((x % 2 == 0) ? 1.0 : -1.0)) * Sparse(cd * c);
        if(x + 1 < N) {
            const Sparse cn  = annihilate(space, x + 1);
            const Sparse U   = embed(space, {{space.link_factor(x), weyl.U}});
            const Sparse hop = cd * U * cn;
            const Sparse hop_dag = hop.adjoint();
            H -= std::complex<double>(w) * Sparse(hop + hop_dag);
            H += embed(space, {{space.link_factor(x), etilde2}});
        }
    }
    return H;
}

// tensor-space index of a gauge-invariant basis state
inline long embed_state(const zngauge::GaugeState &s, int num_sites, int n) {
    const auto space  = full_space(num_sites, n);
    const auto labels = zngauge::reconstruct_fields(s.occupation, num_sites, s.k0, n);
    std::vector<int> digits;
    for(int x = 0; x < num_sites; ++x) {
        digits.push_back(zngauge::occupied(s.occupation, x) ? 1 : 0);
        if(x + 1 < num_sites) digits.push_back(labels[x]);
    }
    return space.index(digits);
}

// restriction to the span of the given basis states
inline Eigen::MatrixXd restricted(const zngauge::ModelParams &p, const std::vector<zngauge::GaugeState> &basis) {
    const Eigen::MatrixXcd H = Eigen::MatrixXcd(hamiltonian(p));
    const auto d             = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd out(d, d);
    std::vector<long> idx;
    for(const auto &s : basis) idx.push_back(embed_state(s, p.geometry.sites(), p.n));
    for(Eigen::Index i = 0; i < d; ++i)
        for(Eigen::Index j = 0; j < d; ++j) out(i, j) = H(idx[i], idx[j]).real();
    return out;
}

}  // namespace oracle
