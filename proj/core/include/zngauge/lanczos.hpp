#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>

namespace zngauge {

/// y = A x for a real symmetric operator given only through its action.
using LinearMap = std::function<void(const Eigen::VectorXd &, Eigen::VectorXd &)>;

struct KrylovOptions {
    int krylov_size = 60;       ///< basis size before a thick restart
    int keep = 4;               ///< Ritz vectors retained across a restart
    long max_matvecs = 20000;
    double tol = 1e-10;         ///< on the residual norm of the target pair
};

struct EigenPair {
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;
    long matvecs = 0;
    bool converged = false;
};

/// Lowest eigenpair of A restricted to the orthogonal complement of
/// `deflation` (vectors need not be orthonormal). Lanczos with full
/// reorthogonalization and thick restarts. A zero or fully deflated start
/// vector is replaced by a random one drawn from `seed`.
EigenPair lowest_eigenpair(const LinearMap &apply, Eigen::VectorXd start, std::span<const Eigen::VectorXd> deflation,
                           const KrylovOptions &options, std::uint64_t seed = 1);

/// Orthonormal basis of span(vectors); near-dependent directions are dropped.
std::vector<Eigen::VectorXd> orthonormalize(std::span<const Eigen::VectorXd> vectors, double drop_tol = 1e-10);

}  // namespace zngauge
