#pragma once

#include "zngauge/hamiltonian.hpp"
#include "zngauge/mps.hpp"
#include "zngauge/spectrum.hpp"

#include <cstdint>
#include <vector>

namespace zngauge {

struct SweepPolicy {
    int chi = 512;                     ///< bond dimension cap
    double cutoff = 1e-10;             ///< discarded weight per truncation
    int max_sweeps = 40;
    int min_sweeps = 2;
    double energy_tol = 1e-9;          ///< energy change between sweeps
    double truncation_ceiling = 1e-6;  ///< larger discarded weight flags chi exhaustion
    double leakage_tol = 1e-6;         ///< overlap with lower states
    int krylov_size = 24;
    long local_matvecs = 400;
    double local_tol = 1e-10;
    std::uint64_t seed = 0x5eed2024;
};

enum class SeedPattern { automatic, dirac_sea, meson };

/// Levels ascending; states[i] belongs to spectrum.eigenvalues[i].
struct DmrgResult {
    SpectrumResult spectrum;
    std::vector<MpsState> states;
    double max_truncation = 0.0;
    double leakage = 0.0;       ///< largest |<lower|higher>| among the states
    bool chi_exhausted = false;
};

/// Two-site DMRG in the boundary sector params.k0. The automatic seed picks
/// whichever of the Dirac sea and the meson pattern has the lower diagonal
/// energy. Needs at least two cells.
DmrgResult ground_state(const ModelParams &params, const SweepPolicy &policy, SeedPattern seed = SeedPattern::automatic);

/// Extends `lower` by `count` further levels, each optimized in the orthogonal
/// complement of the states already found (projector method).
DmrgResult excited_states(const ModelParams &params, const DmrgResult &lower, int count, const SweepPolicy &policy);

/// Ground state followed by `levels - 1` excited states.
DmrgResult lowest_states(const ModelParams &params, int levels, const SweepPolicy &policy);

/// Occupation of the seed pattern chosen for `seed`.
Occupation seed_occupation(const ModelParams &params, SeedPattern seed);

/// <psi|H|psi> by direct MPO contraction (diagnostic).
double energy_expectation(const ModelParams &params, const MpsState &state);

}  // namespace zngauge
