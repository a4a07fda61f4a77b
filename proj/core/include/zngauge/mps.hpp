#pragma once

#include "zngauge/gauge_basis.hpp"
#include "zngauge/hamiltonian.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace zngauge {

/// Physical index of a pair cell, p = 2 occ_even + occ_odd.
inline constexpr int cell_physical_dim = 4;
constexpr int cell_occ_even(int p) { return p >> 1; }
constexpr int cell_occ_odd(int p) { return p & 1; }
/// Change of the unwrapped flux across a cell.
constexpr int cell_charge(int p) { return cell_occ_even(p) + cell_occ_odd(p) - 1; }

/// Bond grading: unwrapped flux Q -> number of states carrying it. Q fixes
/// both the Z_n link label (Q mod n) and the filling to the left of the bond.
using BondSectors = std::map<long, int>;

/// Cell tensor keyed by the left flux Q. Block p has shape
/// dim(Q) x dim(Q + cell_charge(p)); blocks with no partner sector are empty.
struct CellTensor {
    std::map<long, std::array<Eigen::MatrixXd, cell_physical_dim>> blocks;
};

struct SweepRecord {
    int sweep = 0;
    double energy = 0.0;
    double max_truncation = 0.0;
    int max_bond = 0;
    double seconds = 0.0;
};

/// Matrix-product state over pair cells with flux-graded bonds. Bond 0 and
/// bond L carry the single sector {k0}, so every state has half filling and
/// boundary label k0.
class MpsState {
public:
    MpsState() = default;
    MpsState(int n, int k0, int cells);

    int order() const { return n_; }
    int k0() const { return k0_; }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    /// Cells left of the centre are left-orthonormal, right of it right-orthonormal.
    int center() const { return center_; }
    void set_center(int j) { center_ = j; }

    const BondSectors &bond(int b) const { return bonds_[static_cast<std::size_t>(b)]; }
    BondSectors &bond(int b) { return bonds_[static_cast<std::size_t>(b)]; }
    const CellTensor &cell(int j) const { return cells_[static_cast<std::size_t>(j)]; }
    CellTensor &cell(int j) { return cells_[static_cast<std::size_t>(j)]; }

    int bond_dimension(int b) const;
    int max_bond_dimension() const;

    /// Fluxes a bond can carry and still reach k0 at both chain ends.
    bool feasible(int b, long q) const;

    static MpsState product(int n, int k0, Occupation occupation, int cells);
    static MpsState random(int n, int k0, int cells, int sector_dim, std::uint64_t seed);

    /// Brings the centre to cell 0 by exact (rank-revealing) decompositions
    /// and normalizes. Empty sectors are dropped from the bonds.
    void right_canonicalize();
    double norm() const;
    bool left_orthonormal(int j, double tol = 1e-10) const;
    bool right_orthonormal(int j, double tol = 1e-10) const;
    /// Throws std::logic_error when a block shape disagrees with its bonds.
    void check_structure() const;

    /// Coefficient of one chain basis state (zero outside the sector).
    double amplitude(const GaugeState &state) const;
    Eigen::VectorXd expand(std::span<const GaugeState> basis) const;

    std::vector<SweepRecord> history;

private:
    int n_ = 0;
    int k0_ = 0;
    int center_ = 0;
    std::vector<BondSectors> bonds_;
    std::vector<CellTensor> cells_;
};

/// <a|b>; both states must share n, k0 and length.
double overlap(const MpsState &a, const MpsState &b);

/// Local expectations and Schmidt entropies. Entries: density per staggered
/// site, dimensionless field per internal link, entropy (bits) per cut
/// 0..N where cut l separates sites < l from the rest.
struct MpsMeasurement {
    std::vector<double> density;
    std::vector<double> field_tilde;
    std::vector<double> entropy;
};

MpsMeasurement measure(const MpsState &state, double phi);

/// Portable text checkpoint; all reals in hexadecimal floating point so a
/// load reproduces the state bit for bit.
void save_checkpoint(std::ostream &os, const MpsState &state, const ModelParams &params);
MpsState load_checkpoint(std::istream &is, ModelParams *params = nullptr);

/// Shannon entropy in bits of the squared, normalized Schmidt values.
double schmidt_entropy(std::span<const double> singular_values);

}  // namespace zngauge
