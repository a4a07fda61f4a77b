#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace zngauge {

/// Lowest levels of one sector, ascending, from either engine.
struct SpectrumResult {
    std::vector<double> eigenvalues;
    std::vector<Eigen::VectorXd> eigenvectors;  ///< basis-ordered; empty for DMRG
    std::vector<double> residuals;
    std::vector<long> iterations;               ///< matvecs (ED) or sweeps (DMRG) per level
    std::vector<bool> degenerate;               ///< level within the degeneracy tolerance of a neighbour
    bool converged = true;
    std::string engine;

    std::size_t size() const { return eigenvalues.size(); }
};

/// Marks levels closer than `tol` to a neighbour.
void flag_degeneracies(SpectrumResult &spectrum, double tol);

}  // namespace zngauge
