#pragma once

#include <vector>

#include "frfit/types.hpp"

namespace frfit {

enum class BasisKind { Monomial, Barycentric, OrthonormalDisk };

/// Numerator coefficients of one conjugate-pair slot: the two pair functions
/// carry (beta1*q + mu1) and (beta2*q + mu2) over the pair's quadratic.
struct PairCoefficients {
    double beta1 = 0.0, mu1 = 0.0;
    double beta2 = 0.0, mu2 = 0.0;
};

/// One structural element of an orthonormal-disk basis: a real interpolation
/// point occupying one slot, or a conjugate pair (apex Im > 0) occupying two.
struct BasisSection {
    bool is_pair = false;
    Cplx xi;               // real sections carry Im == 0
    PairCoefficients pc;   // valid when is_pair
};

/// Family of r+1 scalar basis functions; index 0 is always the constant 1.
///
/// Monomial:         B_v(q) = q^v
/// Barycentric:      B_v(q) = 1/(q - lambda_v), points pairwise distinct
/// Orthonormal-disk: running-Blaschke-product construction; the non-constant
///                   functions are orthonormal on the unit circle and the
///                   interpolation points must lie strictly inside the disk.
struct BasisSet {
    BasisKind kind = BasisKind::Monomial;
    int order = 0;                        // r
    CVec points;                          // flat point list, length r
    std::vector<BasisSection> sections;   // orthonormal structure walk

    static BasisSet monomial(int r);
    static BasisSet barycentric(const CVec& points);
    // Points must be conjugate-closed with |xi| <= 1 - 1e-6 (use
    // sanitize_points); pair coefficients are solved during construction.
    static BasisSet orthonormal_disk(const CVec& points);
};

// [1, B_1(point), ..., B_r(point)]. Throws BasisSingularity on a pole hit.
CVec eval_basis(const BasisSet& basis, Cplx point);

// Row i holds eval_basis at points(i).
CMat basis_matrix(const BasisSet& basis, const CVec& points);

// Numerical circle inner products (1/2pi) Int B_a(e^{jt}) conj(B_b(e^{jt})) dt
// by uniform trapezoid; identity for a valid orthonormal-disk basis.
Mat gram_matrix(const BasisSet& basis, int quadrature_points);

// Coefficients making the two pair functions for (xi, conj(xi)) mutually
// orthonormal on the circle: Gram-Schmidt on {q, 1}/(q^2 - 2 Re(xi) q + |xi|^2)
// under the circle inner product, rotated by pi/4 when beta2 degenerates so
// that both beta coefficients are nonzero. Requires Im(xi) > 0, |xi| < 1.
PairCoefficients solve_pair_coefficients(Cplx xi);

// Repair a prospective interpolation point set: reflect points outside the
// unit disk to 1/conj(xi), clamp magnitudes to 1 - 1e-6, enforce conjugate
// symmetry by averaging pairs, and separate duplicates by a relative 1e-8
// perturbation. Idempotent.
CVec sanitize_points(const CVec& points);

}  // namespace frfit
