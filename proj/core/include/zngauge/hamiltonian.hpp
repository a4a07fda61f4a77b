#pragma once

#include "zngauge/gauge_basis.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace zngauge {

/// One instance of the bracketed lattice Hamiltonian
///
///   H = -w sum_x (psi^dag_x U psi_{x+1} + h.c.) + mu sum_x (-1)^x n_x + sum_links Etilde^2
///
/// with w = t n / (2 pi) and mu = m n / (2 pi) (units g^2 a^2 = g^2 a / 2 = 1).
struct ModelParams {
    int n = 3;
    double t = 0.0;
    double m = 0.0;
    double phi = 0.0;
    ChainGeometry geometry{};
    int k0 = 0;

    static constexpr double electric_coeff = 1.0;

    double hop_coeff() const;
    double mass_coeff() const;
    /// Throws std::invalid_argument on n < 2, t < 0, k0 outside [0, n).
    void validate() const;
};

/// Labels whose |Etilde| is minimal; two of them for even n at phi = 0.
std::vector<int> zero_charge_sector_candidates(int n, double phi);

/// Diagonal matrix element: mass and electric parts for one basis state.
double diagonal_energy(const ModelParams &params, const GaugeState &state);

/// Real symmetric operator in compressed-row storage (both triangles stored).
class SparseOperator {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseOperator() = default;
    SparseOperator(std::size_t dim, std::vector<Entry> entries);

    std::size_t dim() const { return dim_; }
    std::size_t nonzeros() const { return values_.size(); }

    /// y = H x. Row ranges are split across `workers` threads when > 1.
    void apply(const Eigen::VectorXd &x, Eigen::VectorXd &y, int workers = 1) const;
    Eigen::VectorXd operator*(const Eigen::VectorXd &x) const;

    Eigen::VectorXd diagonal() const;
    Eigen::MatrixXd to_dense() const;
    std::vector<Entry> entries() const;
    bool is_symmetric(double tol = 0.0) const;

    /// Coordinate dump "row col value", one nonzero per line.
    void write_coordinates(std::ostream &os) const;

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_start_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

/// Sparse Hamiltonian over an explicit gauge-invariant basis. The basis may
/// span several boundary sectors and fillings, but must be closed under
/// hopping. Throws std::invalid_argument on a basis/params mismatch.
SparseOperator build_sparse(const ModelParams &params, std::span<const GaugeState> basis);

/// Operator on the 4n-dimensional cell space, stored by source state.
class CellOperator {
public:
    struct Transition {
        int to;
        double value;
    };

    explicit CellOperator(int dim = 0) : from_(static_cast<std::size_t>(dim)) {}

    void add(int from, int to, double value);
    int dim() const { return static_cast<int>(from_.size()); }
    const std::vector<Transition> &from(int state) const { return from_[static_cast<std::size_t>(state)]; }
    bool empty() const;
    bool is_diagonal() const;
    Eigen::MatrixXd to_dense() const;

private:
    std::vector<std::vector<Transition>> from_;
};

/// Lower-triangular matrix-product operator over pair cells.
///
/// Channels: 0 = nothing applied yet, 1 = an odd-site creation is waiting for
/// the matching annihilation in the next cell, 2 = its conjugate, 3 = done.
/// Channel charge is the change of the bond flux between bra and ket.
struct MpoEntry {
    int left;
    int right;
    CellOperator op;
};

struct Mpo {
    static constexpr int channels = 4;
    static constexpr int start = 0;
    static constexpr int finish = 3;
    static constexpr std::array<int, channels> channel_charge{0, 1, -1, 0};

    int n = 0;
    std::vector<std::vector<MpoEntry>> sites;  ///< one entry list per cell
};

/// Throws std::invalid_argument when the cell basis order differs from params.n.
Mpo build_mpo(const ModelParams &params, const PairCellBasis &cells);

/// Exhaustive contraction of the MPO between chain basis states (testing aid).
Eigen::MatrixXd mpo_matrix(const Mpo &mpo, const PairCellBasis &cells, std::span<const GaugeState> basis, ChainGeometry geometry);

/// Locations of the breakpoints of the t = 0 ground energy as a function of m:
/// the lower envelope of the lines E_s(m) = slope_s m + offset_s over the basis.
std::vector<double> diagonal_level_crossings(const ModelParams &params, std::span<const GaugeState> basis);

}  // namespace zngauge
