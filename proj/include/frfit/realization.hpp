#pragma once

#include "frfit/basis.hpp"
#include "frfit/types.hpp"

namespace frfit {

/// Real SISO state-space quadruple (A, B, C, D).
struct StateSpace {
    Mat A;
    Vec B;
    Eigen::RowVectorXd C;
    double D = 0.0;
    // cascade block sizes (1 for real sections, 2 for pairs); lets zero
    // extraction drop unobservable trailing sections without breaking a
    // pair block apart
    std::vector<int> section_sizes;

    int order() const { return static_cast<int>(A.rows()); }
    Cplx transfer(Cplx q) const;  // C (qI - A)^{-1} B + D
};

/// Realization of one cascade section whose output is the section's
/// all-pass factor and whose states are the section's raw basis numerators
/// over the section denominator.
struct SectionRealization {
    Mat a;
    Vec b;
    Eigen::RowVectorXd c;
    double d = 0.0;
};

// Real xi != 0 -> (xi, 1, 1 - xi^2, -xi); xi = 0 -> (0, 1, 1, 0); conjugate
// pairs -> the 2x2 block determined by the pair coefficients.
SectionRealization realize_section(const BasisSection& section);

// Minimal realization of d(q) = coeffs[0] + sum_v coeffs[v] B_v(q) over an
// orthonormal-disk basis: cascade (A, B) with state v equal to
// B_v(q)/sqrt(1-|xi_v|^2), C(v) = coeffs[v] sqrt(1-|xi_v|^2), D = coeffs[0].
StateSpace realize_denominator(const BasisSet& basis, const Vec& coeffs);

// Zeros of the realized scalar function: eig(A - B D^{-1} C) when |D| is
// comfortably nonzero, otherwise the finite generalized eigenvalues of the
// system-matrix pencil. Conjugate-closed; at most order() values.
CVec denominator_zeros(const StateSpace& ss);

}  // namespace frfit
