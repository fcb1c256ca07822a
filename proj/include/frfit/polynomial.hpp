#pragma once

#include "frfit/types.hpp"

namespace frfit {

// Polynomials are coefficient vectors in ascending power order:
// p(x) = c[0] + c[1] x + ... + c[n] x^n.

Cplx eval_poly(const Vec& coeffs, Cplx x);
Cplx eval_poly(const CVec& coeffs, Cplx x);

// Monic expansion Prod_k (x - roots[k]), ascending coefficients.
CVec poly_from_roots(const CVec& roots);

// Monic expansion cast to real coefficients. Requires the root set to be
// conjugate-closed within `tol` relative imaginary residue.
Vec real_poly_from_roots(const CVec& roots, double tol = 1e-8);

// Product of two coefficient vectors.
Vec convolve(const Vec& a, const Vec& b);
CVec convolve(const CVec& a, const CVec& b);

// Roots of a real-coefficient polynomial via a balanced companion matrix.
// Exact zero roots (trailing zero coefficients) are split off first and the
// variable is rescaled so that the companion eigenproblem is well centered.
// Output is conjugate-closed. Throws AllZero when every coefficient is zero.
CVec poly_roots(const Vec& coeffs);

// True when the multiset of complex values is closed under conjugation
// within `tol` (relative to magnitude).
bool conjugate_closed(const CVec& values, double tol = 1e-8);

}  // namespace frfit
