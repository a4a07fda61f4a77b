#pragma once

#include "zngauge/gauge_basis.hpp"
#include "zngauge/hamiltonian.hpp"
#include "zngauge/mps.hpp"
#include "zngauge/spectrum.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace zngauge {

/// Sigma = (1/N) sum over the N-1 internal links of <E>, in physical units.
struct OrderParameter {
    double sigma = 0.0;
    double sigma_tilde = 0.0;          ///< same average of the dimensionless field
    std::vector<double> field_profile; ///< physical <E> per internal link
};

/// Energy-density gaps (raw level differences divided by N) and the raw ones.
struct GapPair {
    double delta = 0.0;
    double gamma = 0.0;
    double raw_delta = 0.0;
    double raw_gamma = 0.0;
};

struct ObservableSet {
    double sigma = 0.0;
    double sigma_tilde = 0.0;
    std::vector<double> field_profile;
    std::vector<double> density_profile;
    std::vector<double> entropy_profile;  ///< bits, cuts 0..N
    GapPair gaps;                         ///< zero unless set from a spectrum
};

/// Averages a dimensionless field profile over the chain of `sites` sites.
OrderParameter order_parameter(std::span<const double> field_tilde, int n, int sites);

/// Exact-diagonalization path. The state must be normalized to 1e-8.
OrderParameter order_parameter(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, const ModelParams &params);
std::vector<double> density_profile(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, int sites);
/// <Q> per link, x = -1..N-1, from the unwrapped flux (linear in the densities).
std::vector<double> mean_flux(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, int sites);
/// Gauss' law applied to expectation values: k0 + running sum of <n_y> - [y odd].
std::vector<double> flux_from_density(std::span<const double> density, int k0);

/// Entropy (bits) between sites < cut and the rest. Gauss' law fixes the
/// links from the occupations, so the occupation patterns label the Schmidt
/// blocks; different left fillings never mix.
double entanglement_entropy(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, int sites, int cut);
std::vector<double> entropy_profile(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, int sites);

/// Cell boundary nearest the middle of the chain, 2 floor(L/2). Cuts inside a
/// cell carry a staggered entropy, so half-chain values use this cut.
constexpr int half_chain_cut(int sites) { return 2 * (sites / 4); }

/// MPS path: same quantities from the bond Schmidt spectra.
OrderParameter order_parameter(const MpsState &psi, const ModelParams &params);
double entanglement_entropy(const MpsState &psi, int cut);

/// Needs three converged levels. Levels are sorted first, so Gamma >= Delta >= 0.
GapPair gaps(const SpectrumResult &spectrum, int sites);

ObservableSet measure_ed(const Eigen::VectorXd &psi, std::span<const GaugeState> basis, const ModelParams &params);
ObservableSet measure_mps(const MpsState &psi, const ModelParams &params);

}  // namespace zngauge
