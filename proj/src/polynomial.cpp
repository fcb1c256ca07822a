#include "frfit/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace frfit {

namespace {

template <typename CoeffVec>
Cplx horner(const CoeffVec& coeffs, Cplx x) {
    Cplx acc(0.0, 0.0);
    for (Eigen::Index k = coeffs.size() - 1; k >= 0; --k) {
        acc = acc * x + Cplx(coeffs(k));
    }
    return acc;
}

}  // namespace

Cplx eval_poly(const Vec& coeffs, Cplx x) { return horner(coeffs, x); }
Cplx eval_poly(const CVec& coeffs, Cplx x) { return horner(coeffs, x); }

CVec poly_from_roots(const CVec& roots) {
    CVec coeffs = CVec::Ones(1);
    for (Eigen::Index k = 0; k < roots.size(); ++k) {
        CVec next = CVec::Zero(coeffs.size() + 1);
        next.tail(coeffs.size()) += coeffs;
        next.head(coeffs.size()) -= roots(k) * coeffs;
        coeffs = next;
    }
    return coeffs;
}

Vec real_poly_from_roots(const CVec& roots, double tol) {
    if (!conjugate_closed(roots, tol)) {
        throw BadPoint("root set is not conjugate-closed; cannot form real coefficients");
    }
    CVec c = poly_from_roots(roots);
    return c.real();
}

Vec convolve(const Vec& a, const Vec& b) {
    Vec out = Vec::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
    return out;
}

CVec convolve(const CVec& a, const CVec& b) {
    CVec out = CVec::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
    return out;
}

CVec poly_roots(const Vec& coeffs) {
    const double cmax = coeffs.size() ? coeffs.cwiseAbs().maxCoeff() : 0.0;
    if (cmax == 0.0) throw AllZero("all polynomial coefficients are zero");

    Eigen::Index hi = coeffs.size() - 1;
    while (hi > 0 && coeffs(hi) == 0.0) --hi;
    Eigen::Index lo = 0;
    while (lo < hi && coeffs(lo) == 0.0) ++lo;

    const Eigen::Index zero_roots = lo;
    const Eigen::Index degree = hi - lo;
    CVec roots(degree + zero_roots);
    roots.head(zero_roots).setZero();
    if (degree == 0) return roots;

    Vec a = coeffs.segment(lo, degree + 1);
    if (degree == 1) {
        roots(zero_roots) = Cplx(-a(0) / a(1), 0.0);
        return roots;
    }
    if (degree == 2) {
        // Stable quadratic resolution; exact conjugate pair for disc < 0.
        const double disc = a(1) * a(1) - 4.0 * a(2) * a(0);
        if (disc >= 0.0) {
            const double q = -0.5 * (a(1) + std::copysign(std::sqrt(disc), a(1)));
            double r1, r2;
            if (q != 0.0) {
                r1 = q / a(2);
                r2 = a(0) / q;
            } else {
                r1 = r2 = 0.0;
            }
            roots(zero_roots) = Cplx(r1, 0.0);
            roots(zero_roots + 1) = Cplx(r2, 0.0);
        } else {
            const double re = -a(1) / (2.0 * a(2));
            const double im = std::sqrt(-disc) / (2.0 * a(2));
            roots(zero_roots) = Cplx(re, std::abs(im));
            roots(zero_roots + 1) = Cplx(re, -std::abs(im));
        }
        return roots;
    }

    // Geometric-mean variable scaling centers the root magnitudes at 1,
    // which the unbalanced companion eigensolver needs for wide-range data.
    double sigma = 1.0;
    if (a(0) != 0.0) {
        sigma = std::pow(std::abs(a(0) / a(degree)), 1.0 / static_cast<double>(degree));
        if (!std::isfinite(sigma) || sigma == 0.0) sigma = 1.0;
    }
    Vec b(degree + 1);
    double scale = 1.0;
    for (Eigen::Index k = 0; k <= degree; ++k) {
        b(k) = a(k) * scale;
        scale *= sigma;
    }
    b /= b(degree);  // monic in the scaled variable

    Mat companion = Mat::Zero(degree, degree);
    companion.block(1, 0, degree - 1, degree - 1).setIdentity();
    companion.col(degree - 1) = -b.head(degree);
    Eigen::EigenSolver<Mat> es(companion, /*computeEigenvectors=*/false);
    roots.tail(degree) = sigma * es.eigenvalues().array();
    return roots;
}

bool conjugate_closed(const CVec& values, double tol) {
    const Eigen::Index n = values.size();
    std::vector<bool> used(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (used[i]) continue;
        const Cplx v = values(i);
        const double scale = std::max(1.0, std::abs(v));
        if (std::abs(v.imag()) <= tol * scale) {
            used[i] = true;
            continue;
        }
        bool matched = false;
        for (Eigen::Index k = i + 1; k < n; ++k) {
            if (used[k]) continue;
            if (std::abs(values(k) - std::conj(v)) <= tol * scale) {
                used[i] = used[k] = true;
                matched = true;
                break;
            }
        }
        if (!matched) return false;
    }
    return true;
}

}  // namespace frfit
