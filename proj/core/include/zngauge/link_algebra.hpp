#pragma once

#include <Eigen/Dense>

#include <vector>

namespace zngauge {

/// Finite Schwinger-Weyl pair and electric spectrum of a single Z_n link.
///
/// Link basis states |v_k> are labelled by k in 0..n-1. The dimensionless
/// field on label k is  k - (n-1)/2 + phi  and the physical field is that
/// value times the quantum sqrt(2 pi / n).
struct LinkAlgebra {
    int n = 0;
    double phi = 0.0;
    std::vector<double> eigenvalues;        ///< e_k, physical units
    std::vector<double> tilde_eigenvalues;  ///< dimensionless field per label
};

struct WeylPair {
    Eigen::MatrixXcd U;  ///< cyclic shift, U|v_k> = |v_{k+1 mod n}>
    Eigen::MatrixXcd V;  ///< diagonal, V|v_k> = exp(-2 pi i k / n)|v_k>
};

/// Spacing sqrt(2 pi / n) between consecutive electric eigenvalues.
double electric_quantum(int n);

/// Dimensionless field of an arbitrary (possibly negative or > n) label,
/// reduced mod n first.
double tilde_field(int n, double phi, long label);

int wrap_label(long label, int n);

std::vector<double> electric_eigenvalues(int n, double phi);

LinkAlgebra make_link_algebra(int n, double phi);

/// Dense matrices of the pair; intended for checks, not for chain operators.
WeylPair weyl_pair(int n);

}  // namespace zngauge
