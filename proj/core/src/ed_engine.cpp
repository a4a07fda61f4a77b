#include "zngauge/ed_engine.hpp"

#include "zngauge/lanczos.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zngauge {

void flag_degeneracies(SpectrumResult &spectrum, double tol) {
    const std::size_t k = spectrum.eigenvalues.size();
    spectrum.degenerate.assign(k, false);
    for(std::size_t i = 0; i + 1 < k; ++i)
        if(std::abs(spectrum.eigenvalues[i + 1] - spectrum.eigenvalues[i]) < tol)
            spectrum.degenerate[i] = spectrum.degenerate[i + 1] = true;
}

namespace {

double true_residual(const SparseOperator &H, const Eigen::VectorXd &v, double value, int workers) {
    Eigen::VectorXd hv;
    H.apply(v, hv, workers);
    return (hv - value * v).norm();
}

SpectrumResult dense_path(const SparseOperator &H, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H.to_dense());
    if(eig.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    SpectrumResult out;
    out.engine = "ed-dense";
    for(int i = 0; i < k; ++i) {
        out.eigenvalues.push_back(eig.eigenvalues()[i]);
        out.eigenvectors.emplace_back(eig.eigenvectors().col(i));
        out.iterations.push_back(0);
    }
    return out;
}

}  // namespace

SpectrumResult lowest_eigenpairs(const SparseOperator &H, int k, const EdOptions &options) {
    const auto dim = static_cast<long>(H.dim());
    if(k < 1 || k > dim) throw std::invalid_argument("lowest_eigenpairs: k must lie in [1, dim]");
    if(!(options.tol > 0.0)) throw std::invalid_argument("lowest_eigenpairs: tol must be positive");

    SpectrumResult out;
    if(H.dim() <= options.dense_threshold) {
        out = dense_path(H, k);
    } else {
        out.engine = "ed-lanczos";
        const LinearMap apply = [&](const Eigen::VectorXd &x, Eigen::VectorXd &y) { H.apply(x, y, options.workers); };
        KrylovOptions krylov;
        krylov.krylov_size = options.krylov_size;
        krylov.keep        = 4;
        krylov.max_matvecs = options.max_matvecs;
        krylov.tol         = options.tol;
        for(int level = 0; level < k; ++level) {
            // fresh random start per level so degenerate partners are reachable
            const EigenPair pair = lowest_eigenpair(apply, Eigen::VectorXd::Zero(dim), out.eigenvectors, krylov,
                                                    options.seed + static_cast<std::uint64_t>(level));
            out.eigenvalues.push_back(pair.value);
            out.eigenvectors.push_back(pair.vector);
            out.iterations.push_back(pair.matvecs);
        }
        // sequential deflation can return levels slightly out of order inside a multiplet
        std::vector<int> order(static_cast<std::size_t>(k));
        for(int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return out.eigenvalues[static_cast<std::size_t>(a)] < out.eigenvalues[static_cast<std::size_t>(b)]; });
        SpectrumResult sorted;
        sorted.engine = out.engine;
        for(int i : order) {
            sorted.eigenvalues.push_back(out.eigenvalues[static_cast<std::size_t>(i)]);
            sorted.eigenvectors.push_back(out.eigenvectors[static_cast<std::size_t>(i)]);
            sorted.iterations.push_back(out.iterations[static_cast<std::size_t>(i)]);
        }
        out = std::move(sorted);
    }

    out.converged = true;
    for(int i = 0; i < k; ++i) {
        const double r = true_residual(H, out.eigenvectors[static_cast<std::size_t>(i)], out.eigenvalues[static_cast<std::size_t>(i)], options.workers);
        out.residuals.push_back(r);
        if(!(r <= options.tol * std::max(1.0, std::abs(out.eigenvalues[static_cast<std::size_t>(i)])))) out.converged = false;
    }
    flag_degeneracies(out, options.degeneracy_tol);
    return out;
}

}  // namespace zngauge
