#include "frfit/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace frfit {

namespace {

constexpr double kDiskMargin = 1e-6;       // max point magnitude is 1 - margin
constexpr double kRealTol = 1e-8;          // imaginary part considered zero
constexpr double kDuplicateTol = 0.5e-8;   // detection threshold
constexpr double kSeparation = 1e-8;       // fan-out step for duplicates

double pair_norm_sq(Cplx xi) { return std::norm(xi); }

Cplx blaschke_factor(Cplx xi, Cplx q) { return (1.0 - std::conj(xi) * q) / (q - xi); }

void check_not_pole(Cplx q, Cplx xi) {
    if (std::abs(q - xi) <= 1e-13 * (1.0 + std::abs(xi)))
        throw BasisSingularity("evaluation point coincides with a basis pole");
}

}  // namespace

BasisSet BasisSet::monomial(int r) {
    if (r < 0) throw BadPoint("basis order must be nonnegative");
    BasisSet b;
    b.kind = BasisKind::Monomial;
    b.order = r;
    b.points = CVec();
    return b;
}

BasisSet BasisSet::barycentric(const CVec& points) {
    for (Eigen::Index i = 0; i < points.size(); ++i)
        for (Eigen::Index k = i + 1; k < points.size(); ++k)
            if (points(i) == points(k))
                throw BadPoint("barycentric interpolation points must be pairwise distinct");
    BasisSet b;
    b.kind = BasisKind::Barycentric;
    b.order = static_cast<int>(points.size());
    b.points = points;
    return b;
}

BasisSet BasisSet::orthonormal_disk(const CVec& points) {
    BasisSet b;
    b.kind = BasisKind::OrthonormalDisk;
    b.order = static_cast<int>(points.size());
    b.points = CVec(points.size());

    const Eigen::Index n = points.size();
    std::vector<bool> used(n, false);
    Eigen::Index slot = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (used[i]) continue;
        const Cplx xi = points(i);
        if (std::abs(xi) > 1.0 - kDiskMargin + 1e-12)
            throw BadPoint("orthonormal-disk points must satisfy |xi| <= 1 - 1e-6");
        if (xi.imag() == 0.0) {
            used[i] = true;
            BasisSection s;
            s.is_pair = false;
            s.xi = xi;
            b.sections.push_back(s);
            b.points(slot++) = xi;
            continue;
        }
        // find the conjugate partner
        Eigen::Index partner = -1;
        for (Eigen::Index k = i + 1; k < n; ++k) {
            if (used[k]) continue;
            if (points(k) == std::conj(xi)) {
                partner = k;
                break;
            }
        }
        if (partner < 0)
            throw BadPoint("orthonormal-disk points must be conjugate-closed (use sanitize_points)");
        used[i] = used[partner] = true;
        BasisSection s;
        s.is_pair = true;
        s.xi = xi.imag() > 0.0 ? xi : std::conj(xi);
        s.pc = solve_pair_coefficients(s.xi);
        b.sections.push_back(s);
        b.points(slot++) = s.xi;
        b.points(slot++) = std::conj(s.xi);
    }
    return b;
}

CVec eval_basis(const BasisSet& basis, Cplx q) {
    CVec out(basis.order + 1);
    out(0) = Cplx(1.0, 0.0);
    switch (basis.kind) {
        case BasisKind::Monomial: {
            for (int v = 1; v <= basis.order; ++v) out(v) = out(v - 1) * q;
            return out;
        }
        case BasisKind::Barycentric: {
            for (int v = 1; v <= basis.order; ++v) {
                const Cplx lambda = basis.points(v - 1);
                check_not_pole(q, lambda);
                out(v) = 1.0 / (q - lambda);
            }
            return out;
        }
        case BasisKind::OrthonormalDisk: {
            Cplx running(1.0, 0.0);  // Blaschke product over earlier sections
            int v = 1;
            for (const BasisSection& s : basis.sections) {
                if (!s.is_pair) {
                    const double xi = s.xi.real();
                    check_not_pole(q, s.xi);
                    out(v++) = std::sqrt(1.0 - xi * xi) / (q - xi) * running;
                    running *= blaschke_factor(s.xi, q);
                } else {
                    const double x = s.xi.real();
                    const double m2 = pair_norm_sq(s.xi);
                    const Cplx den = q * q - 2.0 * x * q + m2;
                    check_not_pole(q, s.xi);
                    check_not_pole(q, std::conj(s.xi));
                    const double scale = std::sqrt(1.0 - m2);
                    out(v++) = scale * (s.pc.beta1 * q + s.pc.mu1) / den * running;
                    out(v++) = scale * (s.pc.beta2 * q + s.pc.mu2) / den * running;
                    running *= (m2 * q * q - 2.0 * x * q + 1.0) / den;
                }
            }
            return out;
        }
    }
    throw Error("unreachable basis kind");
}

CMat basis_matrix(const BasisSet& basis, const CVec& points) {
    CMat out(points.size(), basis.order + 1);
    for (Eigen::Index i = 0; i < points.size(); ++i) out.row(i) = eval_basis(basis, points(i));
    return out;
}

Mat gram_matrix(const BasisSet& basis, int quadrature_points) {
    if (quadrature_points < 4 * basis.order + 16)
        throw std::invalid_argument("gram_matrix needs at least 4r + 16 quadrature points");
    const int n = basis.order + 1;
    CMat acc = CMat::Zero(n, n);
    for (int t = 0; t < quadrature_points; ++t) {
        const double theta = 2.0 * std::numbers::pi * t / quadrature_points;
        const CVec b = eval_basis(basis, Cplx(std::cos(theta), std::sin(theta)));
        acc += b * b.adjoint();
    }
    acc /= static_cast<double>(quadrature_points);
    return acc.real();
}

PairCoefficients solve_pair_coefficients(Cplx xi) {
    const double y = xi.imag();
    const double m2 = std::norm(xi);
    if (y <= 0.0 || std::sqrt(m2) > 1.0 - kDiskMargin + 1e-12)
        throw BadPoint("pair apex must have Im > 0 and |xi| <= 1 - 1e-6");

    // Circle inner products of the raw pair {q, 1}/(q^2 - 2 Re(xi) q + |xi|^2),
    // from the Laurent series 1/((q - xi)(q - conj(xi))) = sum c_k q^{-k-1}
    // with c_k = Im(xi^k)/Im(xi):
    //   <u1,u1> = <u2,u2> = sum_{k>=1} c_k^2
    //   <u1,u2> = sum_{k>=1} c_k c_{k+1}
    const Cplx xi2 = xi * xi;
    const double s2 =
        (2.0 * m2 / (1.0 - m2) - 2.0 * (xi2 / (1.0 - xi2)).real()) / (4.0 * y * y);
    const double s12 = (2.0 * xi.real() * m2 / (1.0 - m2) -
                        2.0 * (xi2 * xi / (1.0 - xi2)).real()) /
                       (4.0 * y * y);
    if (!(s2 > 0.0)) throw BadPoint("degenerate pair inner products");

    // Gram-Schmidt: w1 = u1/|u1|, w2 = (u2 - proj) normalized. Coefficients
    // are expressed in the (u1, u2) = (q, 1)/den basis.
    const double n1 = std::sqrt(s2);
    const double c = s12 / s2;
    const double n2 = std::sqrt(std::max(s2 - s12 * s12 / s2, 0.0));
    if (!(n2 > 0.0)) throw BadPoint("raw pair functions are linearly dependent");

    const double scale = 1.0 / std::sqrt(1.0 - m2);
    PairCoefficients pc;
    pc.beta1 = scale / n1;
    pc.mu1 = 0.0;
    pc.beta2 = scale * (-c / n2);
    pc.mu2 = scale / n2;

    // A pure rotation keeps the pair orthonormal; apply one when beta2
    // degenerates so that the Table-style realization denominators exist.
    if (std::abs(pc.beta2) <= 1e-10 * (std::abs(pc.beta1) + std::abs(pc.mu2))) {
        const double ct = std::numbers::sqrt2 / 2.0;
        const PairCoefficients old = pc;
        pc.beta1 = ct * old.beta1 - ct * old.beta2;
        pc.mu1 = ct * old.mu1 - ct * old.mu2;
        pc.beta2 = ct * old.beta1 + ct * old.beta2;
        pc.mu2 = ct * old.mu1 + ct * old.mu2;
    }
    return pc;
}

CVec sanitize_points(const CVec& points) {
    const Eigen::Index n = points.size();

    // Reflect outside-disk points, clamp near-boundary magnitudes, zero
    // negligible imaginary parts.
    std::vector<Cplx> work(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Cplx p = points(i);
        double mag = std::abs(p);
        if (mag > 1.0) {
            p = 1.0 / std::conj(p);
            mag = std::abs(p);
        }
        if (mag > 1.0 - kDiskMargin) p *= (1.0 - kDiskMargin) / mag;
        if (std::abs(p.imag()) <= kRealTol * std::max(1.0, std::abs(p))) p = Cplx(p.real(), 0.0);
        work[i] = p;
    }

    // Conjugate symmetry: match upper-half points with lower-half partners
    // and average; unmatched complex points collapse to the real axis.
    std::vector<Cplx> canon;  // reals and pair apexes
    std::vector<bool> is_pair;
    std::vector<bool> used(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (used[i]) continue;
        const Cplx p = work[i];
        if (p.imag() == 0.0) {
            used[i] = true;
            canon.push_back(p);
            is_pair.push_back(false);
            continue;
        }
        Eigen::Index best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (used[k] || k == i) continue;
            if (work[k].imag() * p.imag() >= 0.0) continue;  // need opposite halves
            const double d = std::abs(work[k] - std::conj(p));
            if (d < best_dist) {
                best_dist = d;
                best = k;
            }
        }
        used[i] = true;
        if (best >= 0 && best_dist <= 1e-6 * std::max(1.0, std::abs(p))) {
            used[best] = true;
            Cplx apex = 0.5 * (p + std::conj(work[best]));
            if (apex.imag() < 0.0) apex = std::conj(apex);
            canon.push_back(apex);
            is_pair.push_back(true);
        } else {
            canon.push_back(Cplx(p.real(), 0.0));
            is_pair.push_back(false);
        }
    }

    // Deterministic order, then separate near-duplicates by shrinking
    // magnitude (stays inside the disk, so the result is a fixed point).
    std::vector<size_t> idx(canon.size());
    for (size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        if (canon[a].real() != canon[b].real()) return canon[a].real() < canon[b].real();
        if (canon[a].imag() != canon[b].imag()) return canon[a].imag() < canon[b].imag();
        return is_pair[a] < is_pair[b];
    });
    std::vector<Cplx> ordered;
    std::vector<bool> ordered_pair;
    for (size_t k : idx) {
        ordered.push_back(canon[k]);
        ordered_pair.push_back(is_pair[k]);
    }
    for (size_t a = 0; a < ordered.size(); ++a) {
        int bump = 0;
        for (size_t b = 0; b < a; ++b) {
            if (ordered_pair[a] != ordered_pair[b]) continue;
            if (std::abs(ordered[a] - ordered[b]) <
                kDuplicateTol * std::max(1.0, std::abs(ordered[a])))
                ++bump;
        }
        if (bump > 0) {
            const Cplx v = ordered[a];
            if (std::abs(v) > 0.5) {
                ordered[a] = v * (1.0 - bump * kSeparation);
            } else {
                ordered[a] = v - Cplx(bump * kSeparation, 0.0);
            }
        }
    }

    CVec out(n);
    Eigen::Index slot = 0;
    for (size_t k = 0; k < ordered.size(); ++k) {
        if (ordered_pair[k]) {
            out(slot++) = ordered[k];
            out(slot++) = std::conj(ordered[k]);
        } else {
            out(slot++) = ordered[k];
        }
    }
    return out;
}

}  // namespace frfit
