#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zngauge {

/// Open chain of `pairs` physical sites, i.e. 2*pairs staggered sites 0..N-1.
struct ChainGeometry {
    int pairs = 1;

    constexpr int sites() const { return 2 * pairs; }
    constexpr int internal_links() const { return sites() - 1; }
};

/// Bit x is set when staggered site x is occupied.
using Occupation = std::uint64_t;

/// Gauge-invariant basis element. Link fields are not stored: they follow from
/// Gauss' law solved forward from the label k0 of the virtual link entering site 0.
struct GaugeState {
    Occupation occupation = 0;
    int k0 = 0;

    friend bool operator==(const GaugeState &, const GaugeState &) = default;
};

constexpr bool occupied(Occupation occ, int x) { return ((occ >> x) & 1U) != 0U; }
int filling(Occupation occ);
bool is_odd_site(int x);

/// "0101..." with site 0 first.
std::string occupation_string(Occupation occ, int num_sites);
Occupation parse_occupation(const std::string &bits);

/// Unwrapped flux Q_{x,x+1} = k0 + sum_{y<=x}(n_y - [y odd]) for x = -1..N-1.
/// Entry 0 is the left virtual link, entry N the right virtual link.
std::vector<long> reconstruct_flux(Occupation occ, int num_sites, int k0);

/// Z_n labels of the N-1 internal links, each satisfying Gauss' law.
std::vector<int> reconstruct_fields(Occupation occ, int num_sites, int k0, int n);

/// Gauss residual at site x (mod n) for an explicit set of internal labels;
/// the left virtual link carries k0 and the right one carries `k_right`.
int gauss_residual(Occupation occ, int num_sites, int k0, int k_right, std::span<const int> labels, int x, int n);

/// All states of one boundary sector, lexicographically ordered by the
/// occupation string n_0 n_1 ... n_{N-1}.
std::vector<GaugeState> build_basis(ChainGeometry geometry, int n, int k0, bool fixed_filling);

/// Union of build_basis over all n sectors, sector-major.
std::vector<GaugeState> build_all_sectors(ChainGeometry geometry, int n, bool fixed_filling);

/// One gauge-invariant state of an (even, odd) site pair.
struct CellState {
    int k_left = 0;
    int occ_even = 0;
    int occ_odd = 0;
    int k_mid = 0;
    int k_right = 0;
};

/// The 4n-state local space used by the DMRG engine.
class PairCellBasis {
public:
    explicit PairCellBasis(int n);

    int order() const { return n_; }
    int size() const { return static_cast<int>(states_.size()); }
    const std::vector<CellState> &states() const { return states_; }
    const CellState &operator[](int index) const { return states_[static_cast<std::size_t>(index)]; }
    int index_of(int k_left, int occ_even, int occ_odd) const;

private:
    int n_;
    std::vector<CellState> states_;
    std::vector<int> lookup_;
};

PairCellBasis pair_cell_basis(int n);

/// Cell indices of a chain state, one per physical site.
std::vector<int> to_cells(const GaugeState &state, ChainGeometry geometry, const PairCellBasis &cells);

/// Inverse of to_cells; empty when neighbouring labels do not match.
std::optional<GaugeState> from_cells(std::span<const int> cell_indices, const PairCellBasis &cells);

struct CpImage {
    GaugeState state;
    int sign = 1;
};

/// Open-chain image of CP: site reflection x -> N-1-x combined with the
/// staggered particle-hole map, each link label carried to the mirrored link.
/// Returns the image together with its fermionic reordering sign.
CpImage apply_cp(const GaugeState &state, ChainGeometry geometry, int n);

/// Plain-text diagnostic dump, one line per state: "bits k0 labels...".
void write_basis_dump(std::ostream &os, std::span<const GaugeState> basis, ChainGeometry geometry, int n);

}  // namespace zngauge
