#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "frfit/datagen.hpp"
#include "frfit/polynomial.hpp"
#include "frfit/realization.hpp"

#include "oracles.hpp"

using namespace frfit;

namespace {

CVec random_disk_points(RandomStream& rng, int r, double cap) {
    CVec pts(r);
    int k = 0;
    while (k < r) {
        const double mag = rng.uniform(0.05, cap);
        const double ang = rng.uniform(0.1, 3.0);
        if (r - k >= 2 && rng.uniform01() < 0.6) {
            pts(k) = Cplx(mag * std::cos(ang), mag * std::sin(ang));
            pts(k + 1) = std::conj(pts(k));
            k += 2;
        } else {
            pts(k) = Cplx(rng.uniform(-cap, cap), 0.0);
            ++k;
        }
    }
    return sanitize_points(pts);
}

// d(q) through eval_basis; the independent route against the state space
Cplx direct_denominator(const BasisSet& basis, const Vec& coeffs, Cplx q) {
    const CVec b = eval_basis(basis, q);
    Cplx acc(0.0, 0.0);
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) acc += coeffs(k) * b(k);
    return acc;
}

// Numerator polynomial of d(q) over the common denominator prod (q - xi_m),
// expanded with plain polynomial arithmetic.
CVec expanded_numerator(const BasisSet& basis, const Vec& coeffs) {
    using oracles::poly_mul;
    const int r = basis.order;

    // denominator factors per section
    std::vector<CVec> section_den;
    for (const BasisSection& s : basis.sections) {
        if (!s.is_pair) {
            CVec lin(2);
            lin << -s.xi, Cplx(1.0, 0.0);
            section_den.push_back(lin);
        } else {
            CVec quad(3);
            quad << Cplx(std::norm(s.xi), 0.0), Cplx(-2.0 * s.xi.real(), 0.0), Cplx(1.0, 0.0);
            section_den.push_back(quad);
        }
    }
    const size_t ns = basis.sections.size();

    CVec total = CVec::Ones(1);
    for (const CVec& d : section_den) total = poly_mul(total, d);

    CVec num = coeffs(0) * total;
    int slot = 1;
    for (size_t i = 0; i < ns; ++i) {
        const BasisSection& s = basis.sections[i];
        // Blaschke numerators of earlier sections
        CVec earlier = CVec::Ones(1);
        for (size_t j = 0; j < i; ++j) {
            const BasisSection& sj = basis.sections[j];
            if (!sj.is_pair) {
                CVec bn(2);
                bn << Cplx(1.0, 0.0), -std::conj(sj.xi);
                earlier = poly_mul(earlier, bn);
            } else {
                CVec bn(3);
                bn << Cplx(1.0, 0.0), Cplx(-2.0 * sj.xi.real(), 0.0), Cplx(std::norm(sj.xi), 0.0);
                earlier = poly_mul(earlier, bn);
            }
        }
        // denominators of later sections
        CVec later = CVec::Ones(1);
        for (size_t j = i + 1; j < ns; ++j) later = poly_mul(later, section_den[j]);

        const double scale = std::sqrt(1.0 - std::norm(s.xi));
        if (!s.is_pair) {
            CVec term = poly_mul(earlier, later);
            num.head(term.size()) += coeffs(slot) * scale * term;
            slot += 1;
        } else {
            CVec lin1(2), lin2(2);
            lin1 << Cplx(s.pc.mu1, 0.0), Cplx(s.pc.beta1, 0.0);
            lin2 << Cplx(s.pc.mu2, 0.0), Cplx(s.pc.beta2, 0.0);
            CVec t1 = poly_mul(poly_mul(lin1, earlier), later);
            CVec t2 = poly_mul(poly_mul(lin2, earlier), later);
            num.head(t1.size()) += coeffs(slot) * scale * t1;
            num.head(t2.size()) += coeffs(slot + 1) * scale * t2;
            slot += 2;
        }
    }
    return num;
}

}  // namespace

TEST_CASE("realize_section values") {
    SUBCASE("xi = 0") {
        BasisSection s;
        s.is_pair = false;
        s.xi = Cplx(0.0, 0.0);
        const SectionRealization r = realize_section(s);
        CHECK(r.a(0, 0) == 0.0);
        CHECK(r.b(0) == 1.0);
        CHECK(r.c(0) == 1.0);
        CHECK(r.d == 0.0);
    }
    SUBCASE("xi = 0.5") {
        BasisSection s;
        s.is_pair = false;
        s.xi = Cplx(0.5, 0.0);
        const SectionRealization r = realize_section(s);
        CHECK(r.a(0, 0) == doctest::Approx(0.5));
        CHECK(r.b(0) == doctest::Approx(1.0));
        CHECK(r.c(0) == doctest::Approx(0.75));
        CHECK(r.d == doctest::Approx(-0.5));
    }
    SUBCASE("pair section transfer matches the all-pass rational form") {
        BasisSection s;
        s.is_pair = true;
        s.xi = Cplx(0.4, 0.3);
        s.pc = solve_pair_coefficients(s.xi);
        const SectionRealization r = realize_section(s);

        StateSpace ss;
        ss.A = r.a;
        ss.B = r.b;
        ss.C = r.c;
        ss.D = r.d;
        const Cplx q(0.0, 1.0);
        const double x = 0.4;
        const double m2 = std::norm(s.xi);
        const Cplx expected =
            (m2 * q * q - 2.0 * x * q + 1.0) / (q * q - 2.0 * x * q + m2);
        CHECK(std::abs(ss.transfer(q) - expected) <= 1e-10 * std::abs(expected));
    }
    SUBCASE("real section transfer is the Blaschke factor") {
        BasisSection s;
        s.is_pair = false;
        s.xi = Cplx(-0.35, 0.0);
        const SectionRealization r = realize_section(s);
        StateSpace ss;
        ss.A = r.a;
        ss.B = r.b;
        ss.C = r.c;
        ss.D = r.d;
        const Cplx q(0.3, 0.8);
        const Cplx expected = (1.0 - std::conj(s.xi) * q) / (q - s.xi);
        CHECK(std::abs(ss.transfer(q) - expected) <= 1e-12 * std::abs(expected));
    }
}

TEST_CASE("realize_denominator reproduces d(q)") {
    SUBCASE("r = 1, xi = 0, d = (1, 0.7): transfer is 1 + 0.7/q") {
        CVec pts(1);
        pts << Cplx(0.0, 0.0);
        const BasisSet b = BasisSet::orthonormal_disk(pts);
        Vec coeffs(2);
        coeffs << 1.0, 0.7;
        const StateSpace ss = realize_denominator(b, coeffs);
        CHECK(std::abs(ss.transfer(Cplx(2.0, 0.0)) - Cplx(1.35, 0.0)) <= 1e-12);
    }
    SUBCASE("constant coefficients give a constant transfer") {
        RandomStream rng(3);
        const BasisSet b = BasisSet::orthonormal_disk(random_disk_points(rng, 4, 0.8));
        Vec coeffs = Vec::Zero(5);
        coeffs(0) = 3.25;
        const StateSpace ss = realize_denominator(b, coeffs);
        for (int i = 0; i < 10; ++i) {
            const Cplx q(rng.uniform(-2.0, 2.0), rng.uniform(0.2, 2.0));
            CHECK(std::abs(ss.transfer(q) - Cplx(3.25, 0.0)) <= 1e-12);
        }
    }
    SUBCASE("random bases match eval_basis at circle points") {
        RandomStream rng(7);
        for (int trial = 0; trial < 10; ++trial) {
            const int r = 1 + static_cast<int>(rng.uniform01() * 5.99);
            const BasisSet b = BasisSet::orthonormal_disk(random_disk_points(rng, r, 0.8));
            Vec coeffs(r + 1);
            for (int k = 0; k <= r; ++k) coeffs(k) = rng.uniform(-2.0, 2.0);
            const StateSpace ss = realize_denominator(b, coeffs);
            for (int i = 0; i < 20; ++i) {
                const double theta = rng.uniform(0.0, 6.28);
                const Cplx q(std::cos(theta), std::sin(theta));
                const Cplx expected = direct_denominator(b, coeffs, q);
                CHECK(std::abs(ss.transfer(q) - expected) <= 1e-10 * (1.0 + std::abs(expected)));
            }
        }
    }
    SUBCASE("realization correctness off the circle") {
        RandomStream rng(19);
        for (int trial = 0; trial < 10; ++trial) {
            const int r = 1 + static_cast<int>(rng.uniform01() * 9.99);
            const BasisSet b = BasisSet::orthonormal_disk(random_disk_points(rng, r, 0.8));
            Vec coeffs(r + 1);
            for (int k = 0; k <= r; ++k) coeffs(k) = rng.uniform(-2.0, 2.0);
            const StateSpace ss = realize_denominator(b, coeffs);
            for (int i = 0; i < 5; ++i) {
                const double mag = rng.uniform(0.5, 2.0);
                const double ang = rng.uniform(0.0, 6.28);
                const Cplx q(mag * std::cos(ang), mag * std::sin(ang));
                bool near_pole = false;
                for (Eigen::Index k = 0; k < b.points.size(); ++k)
                    if (std::abs(q - b.points(k)) < 0.05) near_pole = true;
                if (near_pole) continue;
                const Cplx expected = direct_denominator(b, coeffs, q);
                CHECK(std::abs(ss.transfer(q) - expected) <= 1e-10 * (1.0 + std::abs(expected)));
            }
        }
    }
    SUBCASE("eigenvalues of A equal the interpolation points") {
        RandomStream rng(11);
        const BasisSet b = BasisSet::orthonormal_disk(random_disk_points(rng, 7, 0.8));
        const StateSpace ss = realize_denominator(b, Vec::Ones(8));
        Eigen::EigenSolver<Mat> es(ss.A, false);
        CHECK(oracles::multiset_match(es.eigenvalues(), b.points, 1e-10));
    }
    SUBCASE("coefficient count mismatch throws") {
        CVec pts(1);
        pts << Cplx(0.0, 0.0);
        CHECK_THROWS_AS(realize_denominator(BasisSet::orthonormal_disk(pts), Vec::Ones(3)),
                        DimensionMismatch);
    }
}

TEST_CASE("denominator_zeros") {
    SUBCASE("1 + 0.7/q has its zero at -0.7") {
        CVec pts(1);
        pts << Cplx(0.0, 0.0);
        Vec coeffs(2);
        coeffs << 1.0, 0.7;
        const CVec z = denominator_zeros(realize_denominator(BasisSet::orthonormal_disk(pts), coeffs));
        REQUIRE(z.size() == 1);
        CHECK(z(0).real() == doctest::Approx(-0.7));
    }
    SUBCASE("constant function has no finite zeros") {
        CVec pts(2);
        pts << Cplx(0.3, 0.0), Cplx(-0.2, 0.0);
        Vec coeffs = Vec::Zero(3);
        coeffs(0) = 1.0;
        const StateSpace ss = realize_denominator(BasisSet::orthonormal_disk(pts), coeffs);
        CHECK(denominator_zeros(ss).size() == 0);
    }
    SUBCASE("trailing zero coefficients cancel their sections") {
        // d(q) = d0 + d1 B1(q) over two real points: the second section is a
        // removable factor and must not surface as a zero
        CVec pts(2);
        pts << Cplx(0.3, 0.0), Cplx(-0.2, 0.0);
        const BasisSet b = BasisSet::orthonormal_disk(pts);
        Vec coeffs(3);
        coeffs << 1.0, 0.7, 0.0;
        const CVec z = denominator_zeros(realize_denominator(b, coeffs));
        REQUIRE(z.size() == 1);
        // oracle: d0 (q - xi1) + d1 sqrt(1 - xi1^2) = 0 with xi1 = 0.3
        const double expected = 0.3 - 0.7 * std::sqrt(1.0 - 0.09);
        CHECK(z(0).real() == doctest::Approx(expected).epsilon(1e-10));
    }
    SUBCASE("random cases match expanded-numerator rootfinding") {
        RandomStream rng(13);
        for (int trial = 0; trial < 15; ++trial) {
            const int r = 2 + static_cast<int>(rng.uniform01() * 3.99);  // up to 5
            const BasisSet b = BasisSet::orthonormal_disk(random_disk_points(rng, r, 0.8));
            Vec coeffs(r + 1);
            for (int k = 0; k <= r; ++k) coeffs(k) = rng.uniform(-2.0, 2.0);
            if (std::abs(coeffs(0)) < 0.1) coeffs(0) = 0.5;  // keep D comfortably nonzero

            const CVec mine = denominator_zeros(realize_denominator(b, coeffs));
            const CVec expanded = expanded_numerator(b, coeffs);
            Vec real_coeffs(expanded.size());
            for (Eigen::Index k = 0; k < expanded.size(); ++k) {
                CHECK(std::abs(expanded(k).imag()) <= 1e-9 * (1.0 + std::abs(expanded(k))));
                real_coeffs(k) = expanded(k).real();
            }
            const CVec oracle = poly_roots(real_coeffs);
            CHECK(oracles::multiset_match(mine, oracle, 1e-7));
        }
    }
    SUBCASE("zeros are invariant under uniform coefficient scaling") {
        RandomStream rng(29);
        const int r = 5;
        const BasisSet b = BasisSet::orthonormal_disk(random_disk_points(rng, r, 0.8));
        Vec coeffs(r + 1);
        for (int k = 0; k <= r; ++k) coeffs(k) = rng.uniform(-2.0, 2.0);
        const CVec z1 = denominator_zeros(realize_denominator(b, coeffs));
        const CVec z2 = denominator_zeros(realize_denominator(b, (1e3 * coeffs).eval()));
        CHECK(oracles::multiset_match(z1, z2, 1e-8));
    }
    SUBCASE("near-zero leading coefficient takes the pencil path") {
        CVec pts(2);
        pts << Cplx(0.4, 0.0), Cplx(-0.3, 0.0);
        const BasisSet b = BasisSet::orthonormal_disk(pts);
        Vec coeffs(3);
        coeffs << 0.0, 1.0, 0.5;  // d0 = 0: degree drops by one
        const StateSpace ss = realize_denominator(b, coeffs);
        const CVec z = denominator_zeros(ss);
        CHECK(z.size() <= 2);
        // cross-check against the expanded numerator
        const CVec expanded = expanded_numerator(b, coeffs);
        Vec rc(expanded.size());
        for (Eigen::Index k = 0; k < expanded.size(); ++k) rc(k) = expanded(k).real();
        const CVec oracle = poly_roots(rc);
        REQUIRE(z.size() == oracle.size() - 0);  // poly_roots drops the zero leading coeff
        CHECK(oracles::multiset_match(z, oracle.head(z.size()).eval(), 1e-7));
    }
    SUBCASE("degenerate denominator throws") {
        CVec pts(1);
        pts << Cplx(0.2, 0.0);
        const StateSpace ss = realize_denominator(BasisSet::orthonormal_disk(pts), Vec::Zero(2));
        CHECK_THROWS_AS(denominator_zeros(ss), DegenerateDenominator);
    }
    SUBCASE("realization matrices are real for conjugate-closed points") {
        RandomStream rng(43);
        const BasisSet b = BasisSet::orthonormal_disk(random_disk_points(rng, 6, 0.8));
        const StateSpace ss = realize_denominator(b, Vec::Ones(7));
        CHECK(ss.A.allFinite());
        CHECK(ss.B.allFinite());
        CHECK(ss.C.allFinite());
    }
}
