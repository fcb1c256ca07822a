#include <doctest.h>

#include <cmath>

#include "frfit/datagen.hpp"
#include "frfit/model.hpp"
#include "frfit/polynomial.hpp"

#include "oracles.hpp"

using namespace frfit;

TEST_CASE("eval_model on 1/(s+1)") {
    CVec poles(1);
    poles << Cplx(-1.0, 0.0);
    const RationalModel m = siso_zpk(CVec(), poles, 1.0);

    SUBCASE("at s = 0") {
        CHECK(eval_channel(m, 0, 0, Cplx(0.0, 0.0)).real() == doctest::Approx(1.0));
        CHECK(eval_channel(m, 0, 0, Cplx(0.0, 0.0)).imag() == doctest::Approx(0.0));
    }
    SUBCASE("at s = j") {
        const Cplx v = eval_channel(m, 0, 0, Cplx(0.0, 1.0));
        CHECK(v.real() == doctest::Approx(0.5));
        CHECK(v.imag() == doctest::Approx(-0.5));
    }
    SUBCASE("pole hit throws") {
        CHECK_THROWS_AS(eval_channel(m, 0, 0, Cplx(-1.0, 0.0)), PoleHit);
    }
}

TEST_CASE("benchmark model evaluation matches a polynomial-division oracle") {
    const RationalModel m = greybox_benchmark_model();
    Vec num(3);
    num << 5e10, 4.8e7, 1.2e8;
    Vec den(6);
    den << 0.0, 1.6e9, 1.7e6, 4e6, 200.0, 1.0;
    for (const Cplx s : {Cplx(0.0, 1.0), Cplx(0.0, 10.0), Cplx(0.0, 123.0)}) {
        const Cplx expected = oracles::horner(num, s) / oracles::horner(den, s);
        const Cplx got = eval_channel(m, 0, 0, s);
        CHECK(std::abs(got - expected) <= 1e-9 * std::abs(expected));
    }
}

TEST_CASE("zpk and coefficient forms agree on random conjugate-closed models") {
    RandomStream rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const int order = 1 + static_cast<int>(rng.uniform01() * 9.99);  // up to 10
        CVec poles(order);
        int k = 0;
        while (k < order) {
            const double mag = rng.uniform(0.2, 3.0);
            const double ang = rng.uniform(0.2, 1.4);
            if (order - k >= 2 && rng.uniform01() < 0.8) {
                poles(k) = Cplx(-mag * std::cos(ang), mag * std::sin(ang));
                poles(k + 1) = std::conj(poles(k));
                k += 2;
            } else {
                poles(k) = Cplx(-mag, 0.0);
                k += 1;
            }
        }
        const int nz = static_cast<int>(rng.uniform01() * order);
        CVec zeros(nz);
        k = 0;
        while (k < nz) {
            const double mag = rng.uniform(0.2, 3.0);
            const double ang = rng.uniform(0.2, 1.4);
            if (nz - k >= 2) {
                zeros(k) = Cplx(-mag * std::cos(ang), mag * std::sin(ang));
                zeros(k + 1) = std::conj(zeros(k));
                k += 2;
            } else {
                zeros(k) = Cplx(-mag, 0.0);
                k += 1;
            }
        }
        RationalModel m = siso_zpk(zeros, poles, rng.uniform(0.5, 2.0));
        REQUIRE(m.den_coeffs.has_value());

        for (int p = 0; p < 50; ++p) {
            const Cplx s(0.0, rng.uniform(0.05, 5.0));
            const Cplx via_zpk = eval_channel(m, 0, 0, s);
            const Cplx via_coeffs =
                eval_poly((*m.num_coeffs)[0], s) / eval_poly(*m.den_coeffs, s);
            CHECK(std::abs(via_zpk - via_coeffs) <= 1e-9 * std::max(1.0, std::abs(via_zpk)));
        }
    }
}

TEST_CASE("nls_cost") {
    SUBCASE("model reproducing data exactly gives zero") {
        CVec poles(1);
        poles << Cplx(-1.0, 0.0);
        const RationalModel m = siso_zpk(CVec(), poles, 1.0);
        Vec w(3);
        w << 0.5, 1.0, 2.0;
        CVec h(3);
        for (int i = 0; i < 3; ++i) h(i) = eval_channel(m, 0, 0, Cplx(0.0, w(i)));
        const auto data = FrequencyResponseData::siso(w, h);
        CHECK(nls_cost(m, data) == doctest::Approx(0.0));
    }
    SUBCASE("single point, residual 2, unit weight") {
        // constant model H = 3 vs data H = 1 at one frequency
        const RationalModel m = siso_from_coefficients(Vec::Constant(1, 3.0), Vec::Ones(1));
        Vec w(1);
        w << 1.0;
        CVec h(1);
        h << Cplx(1.0, 0.0);
        CHECK(nls_cost(m, FrequencyResponseData::siso(w, h)) == doctest::Approx(4.0));
    }
    SUBCASE("weighted residuals 1 and j with weights (1, 2)") {
        const RationalModel m = siso_from_coefficients(Vec::Zero(1), Vec::Ones(1));
        Vec w(2);
        w << 1.0, 2.0;
        CVec h(2);
        h << Cplx(-1.0, 0.0), Cplx(0.0, -1.0);  // residuals 1 and j
        Vec weights(2);
        weights << 1.0, 2.0;
        CHECK(nls_cost(m, FrequencyResponseData::siso(w, h, weights)) == doctest::Approx(5.0));
    }
    SUBCASE("nonnegative on perturbed data") {
        const RationalModel m = siso_from_coefficients(Vec::Constant(1, 1.0), Vec::Ones(1));
        Vec w(2);
        w << 1.0, 2.0;
        CVec h(2);
        h << Cplx(1.1, 0.0), Cplx(0.9, 0.0);
        CHECK(nls_cost(m, FrequencyResponseData::siso(w, h)) > 0.0);
    }
}

TEST_CASE("data validation rejects bad inputs") {
    Vec w(2);
    w << 2.0, 1.0;  // not ascending
    CVec h(2);
    h << Cplx(1.0, 0.0), Cplx(1.0, 0.0);
    CHECK_THROWS_AS(FrequencyResponseData::siso(w, h), std::invalid_argument);

    Vec w2(2);
    w2 << 0.0, 1.0;  // zero frequency
    CHECK_THROWS_AS(FrequencyResponseData::siso(w2, h), std::invalid_argument);

    Vec w3(2);
    w3 << 1.0, 2.0;
    Vec weights = Vec::Zero(2);  // no positive weight
    CHECK_THROWS_AS(FrequencyResponseData::siso(w3, h, weights), std::invalid_argument);
}

TEST_CASE("improper models evaluate") {
    // H(s) = s^2 + 1 over s + 1: more zeros than poles
    CVec zeros(2);
    zeros << Cplx(0.0, 1.0), Cplx(0.0, -1.0);
    CVec poles(1);
    poles << Cplx(-1.0, 0.0);
    const RationalModel m = siso_zpk(zeros, poles, 2.0);
    const Cplx s(0.0, 2.0);
    const Cplx expected = 2.0 * (s * s + 1.0) / (s + 1.0);
    CHECK(std::abs(eval_channel(m, 0, 0, s) - expected) <= 1e-12 * std::abs(expected));
}
