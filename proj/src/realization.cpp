#include "frfit/realization.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace frfit {

Cplx StateSpace::transfer(Cplx q) const {
    const int n = order();
    if (n == 0) return Cplx(D, 0.0);
    CMat m = CMat::Identity(n, n) * q - A.cast<Cplx>();
    const CVec x = m.partialPivLu().solve(B.cast<Cplx>());
    return (C.cast<Cplx>() * x)(0) + D;
}

SectionRealization realize_section(const BasisSection& s) {
    SectionRealization r;
    if (!s.is_pair) {
        const double xi = s.xi.real();
        if (std::abs(xi) >= 1.0) throw BadPoint("section point must satisfy |xi| < 1");
        r.a = Mat::Constant(1, 1, xi);
        r.b = Vec::Constant(1, 1.0);
        if (xi != 0.0) {
            r.c = Eigen::RowVectorXd::Constant(1, 1.0 - xi * xi);
            r.d = -xi;
        } else {
            r.c = Eigen::RowVectorXd::Constant(1, 1.0);
            r.d = 0.0;
        }
        return r;
    }

    const double x = s.xi.real();
    const double m2 = std::norm(s.xi);
    if (m2 >= 1.0) throw BadPoint("pair apex must lie inside the unit disk");
    const double b1 = s.pc.beta1, u1 = s.pc.mu1;
    const double b2 = s.pc.beta2, u2 = s.pc.mu2;
    const double det = b1 * u2 - u1 * b2;
    if (b1 == 0.0 || b2 == 0.0 || det == 0.0)
        throw BadPoint("pair coefficients violate the realization preconditions");

    const double ratio = u2 / b2 - u1 / b1;
    Mat a(2, 2);
    a(0, 0) = (m2 + (u1 * u2) / (b1 * b2) + (2.0 * x * u2) / b2) / ratio;
    a(0, 1) = (u1 + 2.0 * b1 * x - b1 * a(0, 0)) / b2;
    a(1, 0) = (u2 + b2 * a(0, 0)) / b1;
    a(1, 1) = 2.0 * x - a(0, 0);

    Eigen::RowVectorXd c(2);
    c(0) = (2.0 * u2 * x * (m2 - 1.0) + (m2 * m2 - 1.0) * b2) / det;
    c(1) = (2.0 * x * (m2 - 1.0) - c(0) * b1) / b2;

    r.a = a;
    r.b = Vec(2);
    r.b << b1, b2;
    r.c = c;
    r.d = m2;
    return r;
}

StateSpace realize_denominator(const BasisSet& basis, const Vec& coeffs) {
    if (basis.kind != BasisKind::OrthonormalDisk)
        throw std::invalid_argument("realize_denominator expects an orthonormal-disk basis");
    if (coeffs.size() != basis.order + 1)
        throw DimensionMismatch("need one coefficient per basis function");

    const int r = basis.order;
    Mat A = Mat::Zero(r, r);
    Vec B = Vec::Zero(r);
    Eigen::RowVectorXd chain_c;  // output map of the cascade built so far
    double chain_d = 1.0;
    int filled = 0;

    for (const BasisSection& s : basis.sections) {
        const SectionRealization sec = realize_section(s);
        const int k = static_cast<int>(sec.a.rows());
        A.block(filled, filled, k, k) = sec.a;
        if (filled > 0) A.block(filled, 0, k, filled) = sec.b * chain_c;
        B.segment(filled, k) = sec.b * chain_d;

        Eigen::RowVectorXd next_c(filled + k);
        if (filled > 0) next_c.head(filled) = sec.d * chain_c;
        next_c.tail(k) = sec.c;
        chain_c = next_c;
        chain_d *= sec.d;
        filled += k;
    }

    StateSpace ss;
    ss.A = A;
    ss.B = B;
    ss.C = Eigen::RowVectorXd::Zero(r);
    ss.D = coeffs(0);
    int v = 0;
    for (const BasisSection& s : basis.sections) {
        const double scale = std::sqrt(1.0 - std::norm(s.xi));
        ss.C(v) = coeffs(v + 1) * scale;
        ++v;
        if (s.is_pair) {
            ss.C(v) = coeffs(v + 1) * scale;
            ++v;
        }
        ss.section_sizes.push_back(s.is_pair ? 2 : 1);
    }
    return ss;
}

CVec denominator_zeros(const StateSpace& ss) {
    const double coeff_scale = std::max(std::abs(ss.D), ss.C.size() ? ss.C.cwiseAbs().maxCoeff() : 0.0);
    if (coeff_scale <= 1e-14) throw DegenerateDenominator("all coefficients are (near) zero");

    // Trailing sections whose coefficients vanish are unobservable in the
    // cascade; keep the realization minimal so pole-zero cancellations do
    // not surface as spurious zeros.
    int r = ss.order();
    std::vector<int> sizes = ss.section_sizes;
    if (sizes.empty()) sizes.assign(ss.order(), 1);
    while (r > 0) {
        const int block = sizes.back();
        const double tail = ss.C.segment(r - block, block).cwiseAbs().maxCoeff();
        if (tail > 1e-14 * coeff_scale) break;
        r -= block;
        sizes.pop_back();
    }
    if (r == 0) return CVec();

    const Mat A = ss.A.topLeftCorner(r, r);
    const Vec B = ss.B.head(r);
    const Eigen::RowVectorXd C = ss.C.head(r);

    if (std::abs(ss.D) >= 1e-12) {
        const Mat closed = A - B * (C / ss.D);
        Eigen::EigenSolver<Mat> es(closed, /*computeEigenvectors=*/false);
        return es.eigenvalues();
    }

    // D ~ 0: finite generalized eigenvalues of ([A B; C D], diag(I, 0)).
    Mat M(r + 1, r + 1), N = Mat::Zero(r + 1, r + 1);
    M.topLeftCorner(r, r) = A;
    M.topRightCorner(r, 1) = B;
    M.bottomLeftCorner(1, r) = C;
    M(r, r) = ss.D;
    N.topLeftCorner(r, r).setIdentity();

    Eigen::GeneralizedEigenSolver<Mat> ges(M, N, /*computeEigenvectors=*/false);
    const CVec alphas = ges.alphas();
    const Vec betas = ges.betas();
    const double beta_scale = betas.cwiseAbs().maxCoeff();
    std::vector<Cplx> finite;
    for (Eigen::Index i = 0; i < betas.size(); ++i) {
        if (std::abs(betas(i)) > 1e-10 * std::max(1.0, beta_scale))
            finite.push_back(alphas(i) / betas(i));
    }
    return Eigen::Map<const CVec>(finite.data(), static_cast<Eigen::Index>(finite.size())).eval();
}

}  // namespace frfit
