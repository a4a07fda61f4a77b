#include "zngauge/lanczos.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace zngauge {

std::vector<Eigen::VectorXd> orthonormalize(std::span<const Eigen::VectorXd> vectors, double drop_tol) {
    std::vector<Eigen::VectorXd> basis;
    for(const auto &v : vectors) {
        Eigen::VectorXd u    = v;
        const double scale   = u.norm();
        if(scale == 0.0) continue;
        for(int pass = 0; pass < 2; ++pass)
            for(const auto &b : basis) u -= b.dot(u) * b;
        const double norm = u.norm();
        if(norm <= drop_tol * scale) continue;
        basis.push_back(u / norm);
    }
    return basis;
}

namespace {

class Projector {
public:
    explicit Projector(std::vector<Eigen::VectorXd> basis) : basis_(std::move(basis)) {}
    void apply(Eigen::VectorXd &v) const {
        for(int pass = 0; pass < 2; ++pass)
            for(const auto &b : basis_) v -= b.dot(v) * b;
    }
    std::size_t rank() const { return basis_.size(); }

private:
    std::vector<Eigen::VectorXd> basis_;
};

// removes the components along the first `cols` columns of V, twice
void orthogonalize(const Eigen::MatrixXd &V, Eigen::Index cols, Eigen::VectorXd &v) {
    if(cols == 0) return;
    for(int pass = 0; pass < 2; ++pass) v.noalias() -= V.leftCols(cols) * (V.leftCols(cols).transpose() * v);
}

}  // namespace

EigenPair lowest_eigenpair(const LinearMap &apply, Eigen::VectorXd start, std::span<const Eigen::VectorXd> deflation,
                           const KrylovOptions &options, std::uint64_t seed) {
    const Eigen::Index dim = start.size();
    if(dim == 0) throw std::invalid_argument("eigensolver: empty operator");
    for(const auto &d : deflation)
        if(d.size() != dim) throw std::invalid_argument("eigensolver: deflation vector dimension mismatch");

    const Projector project(orthonormalize(deflation));
    const Eigen::Index available = dim - static_cast<Eigen::Index>(project.rank());
    if(available <= 0) throw std::invalid_argument("eigensolver: deflation spans the whole space");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    auto random_vector = [&] {
        Eigen::VectorXd r(dim);
        for(Eigen::Index i = 0; i < dim; ++i) r[i] = gauss(rng);
        return r;
    };

    const Eigen::Index m    = std::max<Eigen::Index>(2, std::min<Eigen::Index>(options.krylov_size, available));
    const Eigen::Index keep = std::clamp<Eigen::Index>(options.keep, 1, m - 1);
    Eigen::MatrixXd V(dim, m), W(dim, m);
    Eigen::Index k = 0;

    // next basis direction: orthonormal to deflation and the current basis
    auto admit = [&](Eigen::VectorXd q) {
        for(int attempt = 0; attempt < 8; ++attempt) {
            const double scale = std::max(q.norm(), 1e-300);
            project.apply(q);
            orthogonalize(V, k, q);
            const double norm = q.norm();
            if(norm > 1e-10 * scale && norm > 1e-200) {
                V.col(k) = q / norm;
                return true;
            }
            q = random_vector();
        }
        return false;
    };

    if(start.norm() == 0.0) start = random_vector();
    if(!admit(start)) throw std::runtime_error("eigensolver: could not build a start vector");

    EigenPair out;
    Eigen::VectorXd w(dim), y(dim), Ay(dim), r(dim);
    while(true) {
        apply(V.col(k), w);
        ++out.matvecs;
        W.col(k) = w;
        ++k;

        Eigen::MatrixXd T = V.leftCols(k).transpose() * W.leftCols(k);
        T                 = 0.5 * (T + T.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
        const Eigen::VectorXd s = eig.eigenvectors().col(0);
        const double theta      = eig.eigenvalues()[0];
        y.noalias()             = V.leftCols(k) * s;
        Ay.noalias()            = W.leftCols(k) * s;
        r                       = Ay - theta * y;
        project.apply(r);
        const double residual = r.norm();

        out.value    = theta;
        out.vector   = y;
        out.residual = residual;
        const bool exhausted = k >= available;
        if(residual <= options.tol || exhausted) {
            out.converged = residual <= options.tol || exhausted;
            break;
        }
        if(out.matvecs >= options.max_matvecs) break;

        if(k == m) {
            // thick restart on the lowest Ritz vectors
            const Eigen::Index kk = std::min(keep, k - 1);
            const Eigen::MatrixXd S = eig.eigenvectors().leftCols(kk);
            Eigen::MatrixXd Vk = V.leftCols(k) * S;
            Eigen::MatrixXd Wk = W.leftCols(k) * S;
            V.leftCols(kk) = Vk;
            W.leftCols(kk) = Wk;
            k              = kk;
        }
        if(!admit(r)) break;
    }
    out.vector.normalize();
    return out;
}

}  // namespace zngauge
