#pragma once

#include "zngauge/hamiltonian.hpp"
#include "zngauge/spectrum.hpp"

#include <cstdint>

namespace zngauge {

struct EdOptions {
    double tol = 1e-10;             ///< residual norm per reported pair
    double degeneracy_tol = 1e-8;
    std::uint64_t seed = 0x5eed2024;
    std::size_t dense_threshold = 4096;
    int krylov_size = 60;
    long max_matvecs = 50000;       ///< per level
    int workers = 1;
};

/// k lowest eigenpairs. Levels are found one at a time, each deflated against
/// the ones already converged, so degenerate multiplets are resolved. Dense
/// diagonalization below `dense_threshold`. Throws std::invalid_argument when
/// k is not in [1, dim]; non-convergence is reported through `converged`.
SpectrumResult lowest_eigenpairs(const SparseOperator &H, int k, const EdOptions &options = {});

}  // namespace zngauge
