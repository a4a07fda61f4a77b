#include "zngauge/link_algebra.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace zngauge {

namespace {
void require_order(int n) {
    if(n < 2) throw std::invalid_argument("cyclic group order must be >= 2, got " + std::to_string(n));
}
}  // namespace

double electric_quantum(int n) {
    require_order(n);
    return std::sqrt(2.0 * std::numbers::pi / n);
}

int wrap_label(long label, int n) {
    long r = label % n;
    if(r < 0) r += n;
    return static_cast<int>(r);
}

double tilde_field(int n, double phi, long label) {
    return static_cast<double>(wrap_label(label, n)) - 0.5 * static_cast<double>(n - 1) + phi;
}

std::vector<double> electric_eigenvalues(int n, double phi) {
    const double quantum = electric_quantum(n);
    std::vector<double> out(static_cast<std::size_t>(n));
    for(int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = quantum * tilde_field(n, phi, k);
    return out;
}

LinkAlgebra make_link_algebra(int n, double phi) {
    LinkAlgebra alg;
    alg.n           = n;
    alg.phi         = phi;
    alg.eigenvalues = electric_eigenvalues(n, phi);
    alg.tilde_eigenvalues.resize(static_cast<std::size_t>(n));
    for(int k = 0; k < n; ++k) alg.tilde_eigenvalues[static_cast<std::size_t>(k)] = tilde_field(n, phi, k);
    return alg;
}

WeylPair weyl_pair(int n) {
    require_order(n);
    WeylPair pair;
    pair.U = Eigen::MatrixXcd::Zero(n, n);
    pair.V = Eigen::MatrixXcd::Zero(n, n);
    for(int k = 0; k < n; ++k) {
        pair.U((k + 1) % n, k) = 1.0;
        // exact roots of unity for the quarter turns so that n = 2, 4 stay integral
        const double angle = -2.0 * std::numbers::pi * k / n;
        std::complex<double> phase = std::polar(1.0, angle);
        if((4 * k) % n == 0) {
            static constexpr std::complex<double> quarter[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
            phase = quarter[(4 * k / n) % 4];
        }
        pair.V(k, k) = phase;
    }
    return pair;
}

}  // namespace zngauge
