#include <doctest.h>

#include <cmath>

#include "frfit/datagen.hpp"
#include "frfit/mapping.hpp"
#include "frfit/model.hpp"

using namespace frfit;

TEST_CASE("select_alpha") {
    CHECK(select_alpha(0.1, 1e6) == doctest::Approx(3.16227766016838e2).epsilon(1e-12));
    CHECK(select_alpha(1.0, 1e4) == doctest::Approx(100.0));
    CHECK(select_alpha(7.5, 7.5) == doctest::Approx(7.5));
    CHECK_THROWS_AS(select_alpha(0.0, 1.0), BadRange);
    CHECK_THROWS_AS(select_alpha(2.0, 1.0), BadRange);
    CHECK_THROWS_AS(select_alpha(1.0, std::numeric_limits<double>::infinity()), BadRange);
}

TEST_CASE("select_alpha is the unique stationary point of the endpoint spread") {
    for (auto [lo, hi] : {std::pair{0.1, 1e6}, std::pair{1.0, 1e4}, std::pair{3.0, 77.0}}) {
        const double alpha = select_alpha(lo, hi);
        auto spread = [&](double a) {
            const BilinearMap m(a);
            return std::abs(to_disk(m, Cplx(0.0, lo)) - to_disk(m, Cplx(0.0, hi)));
        };
        CHECK(spread(alpha * (1.0 + 1e-3)) < spread(alpha));
        CHECK(spread(alpha * (1.0 - 1e-3)) < spread(alpha));
    }
}

TEST_CASE("to_disk basics") {
    const BilinearMap map(100.0);
    CHECK(to_disk(map, Cplx(0.0, 0.0)) == Cplx(1.0, 0.0));
    const Cplx qj = to_disk(map, Cplx(0.0, 100.0));
    CHECK(qj.real() == doctest::Approx(0.0));
    CHECK(qj.imag() == doctest::Approx(1.0));
    CHECK(std::abs(to_disk(map, Cplx(-100.0, 0.0))) == doctest::Approx(0.0));
    CHECK_THROWS_AS(to_disk(map, Cplx(100.0, 0.0)), MapSingularity);
}

TEST_CASE("imaginary axis lands on the unit circle") {
    const BilinearMap map(316.23);
    RandomStream rng(7);
    for (int i = 0; i < 200; ++i) {
        const double w = std::exp(rng.uniform(std::log(1e-3), std::log(1e8)));
        CHECK(std::abs(std::abs(to_disk(map, Cplx(0.0, w))) - 1.0) <= 1e-14);
        CHECK(std::abs(std::abs(to_disk(map, Cplx(0.0, -w))) - 1.0) <= 1e-14);
    }
}

TEST_CASE("from_disk inverts to_disk") {
    const BilinearMap map(316.23);
    CHECK(from_disk(map, Cplx(1.0, 0.0)) == Cplx(0.0, 0.0));
    const Cplx s = from_disk(BilinearMap(100.0), Cplx(0.0, 1.0));
    CHECK(s.real() == doctest::Approx(0.0));
    CHECK(s.imag() == doctest::Approx(100.0));
    CHECK_THROWS_AS(from_disk(map, Cplx(-1.0, 0.0)), PointAtInfinity);

    RandomStream rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double theta = rng.uniform(0.0, 6.28318);
        const Cplx q(std::cos(theta), std::sin(theta));
        if (std::abs(q + Cplx(1.0, 0.0)) < 1e-3) continue;
        const Cplx back = to_disk(map, from_disk(map, q));
        CHECK(std::abs(back - q) <= 1e-12 * std::max(1.0, std::abs(q)));
    }
    for (int i = 0; i < 1000; ++i) {
        const Cplx s2(rng.uniform(-50.0, 40.0), rng.uniform(-300.0, 300.0));
        const Cplx back = from_disk(map, to_disk(map, s2));
        CHECK(std::abs(back - s2) <= 1e-12 * std::max(1.0, std::abs(s2)));
    }
}

TEST_CASE("map_model transports poles and zeros") {
    SUBCASE("s-pole at -1 with alpha 1 lands at the origin") {
        CVec poles(1);
        poles << Cplx(-1.0, 0.0);
        const RationalModel m = siso_zpk(CVec(), poles, 1.0);
        const RationalModel q = map_model(BilinearMap(1.0), m, MapDirection::SToQ);
        REQUIRE(q.poles.size() == 1);
        CHECK(std::abs(q.poles(0)) <= 1e-15);
        CHECK(q.domain == Domain::QDisk);
    }

    SUBCASE("round trip recovers poles and zeros") {
        CVec poles(3);
        poles << Cplx(-1.0, 4.0), Cplx(-1.0, -4.0), Cplx(-0.5, 0.0);
        CVec zeros(2);
        zeros << Cplx(-2.0, 1.0), Cplx(-2.0, -1.0);
        const RationalModel m = siso_zpk(zeros, poles, 3.0);
        const BilinearMap map(2.0);
        const RationalModel q = map_model(map, m, MapDirection::SToQ);
        const RationalModel back = map_model(map, q, MapDirection::QToS);
        REQUIRE(back.poles.size() == 3);
        REQUIRE(back.zeros[0].size() == 2);
        CHECK(back.zeros_dropped_at_infinity == 1);  // the explicit q-zero at -1
        for (int i = 0; i < 3; ++i) {
            double best = 1e9;
            for (int k = 0; k < 3; ++k) best = std::min(best, std::abs(back.poles(i) - poles(k)));
            CHECK(best <= 1e-10 * (1.0 + std::abs(poles(i))));
        }
        CHECK(back.gains(0, 0) == doctest::Approx(3.0).epsilon(1e-10));
    }

    SUBCASE("frequency response is preserved") {
        CVec poles(1);
        poles << Cplx(-1.0, 0.0);
        const RationalModel m = siso_zpk(CVec(), poles, 1.0);
        const BilinearMap map(1.0);
        const RationalModel mq = map_model(map, m, MapDirection::SToQ);
        const Cplx s(0.0, 2.0);
        const Cplx hs = eval_channel(m, 0, 0, s);
        const Cplx hq = eval_channel(mq, 0, 0, to_disk(map, s));
        CHECK(std::abs(hs - hq) <= 1e-12 * std::abs(hs));
    }

    SUBCASE("relative degree becomes explicit zeros at -1") {
        CVec poles(3);
        poles << Cplx(-1.0, 2.0), Cplx(-1.0, -2.0), Cplx(-3.0, 0.0);
        const RationalModel m = siso_zpk(CVec(), poles, 5.0);  // relative degree 3
        const RationalModel q = map_model(BilinearMap(2.5), m, MapDirection::SToQ);
        REQUIRE(q.zeros[0].size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(q.zeros[0](i) == Cplx(-1.0, 0.0));
    }

    SUBCASE("gain reference falls back when a pole sits at j*alpha") {
        CVec poles(2);
        poles << Cplx(0.0, 2.0), Cplx(0.0, -2.0);  // undamped pole exactly at j*alpha
        const RationalModel m = siso_zpk(CVec(), poles, 1.0);
        const BilinearMap map(2.0);
        const RationalModel q = map_model(map, m, MapDirection::SToQ);
        const Cplx s(0.0, 3.7);
        const Cplx hs = eval_channel(m, 0, 0, s);
        const Cplx hq = eval_channel(q, 0, 0, to_disk(map, s));
        CHECK(std::abs(hs - hq) <= 1e-9 * std::abs(hs));
    }
}

TEST_CASE("map_model preserves response on random models") {
    RandomStream rng(23);
    for (int trial = 0; trial < 15; ++trial) {
        const int order = 1 + static_cast<int>(rng.uniform01() * 7.99);
        CVec poles(order);
        int k = 0;
        while (k < order) {
            const double mag = std::exp(rng.uniform(std::log(0.5), std::log(50.0)));
            const double ang = rng.uniform(0.3, 1.4);
            if (order - k >= 2 && rng.uniform01() < 0.8) {
                poles(k) = Cplx(-mag * std::cos(ang), mag * std::sin(ang));
                poles(k + 1) = std::conj(poles(k));
                k += 2;
            } else {
                poles(k) = Cplx(-mag, 0.0);
                ++k;
            }
        }
        const int nz = static_cast<int>(rng.uniform01() * order);
        CVec zeros(nz);
        k = 0;
        while (k < nz) {
            const double mag = std::exp(rng.uniform(std::log(0.5), std::log(50.0)));
            if (nz - k >= 2) {
                zeros(k) = Cplx(-mag * 0.4, mag);
                zeros(k + 1) = std::conj(zeros(k));
                k += 2;
            } else {
                zeros(k) = Cplx(-mag, 0.0);
                ++k;
            }
        }
        const RationalModel m = siso_zpk(zeros, poles, rng.uniform(0.5, 2.0));
        const BilinearMap map(rng.uniform(1.0, 30.0));
        const RationalModel mq = map_model(map, m, MapDirection::SToQ);
        for (int p = 0; p < 20; ++p) {
            const Cplx s(0.0, std::exp(rng.uniform(std::log(0.1), std::log(100.0))));
            const Cplx hs = eval_channel(m, 0, 0, s);
            const Cplx hq = eval_channel(mq, 0, 0, to_disk(map, s));
            CHECK(std::abs(hs - hq) <= 1e-9 * std::max(std::abs(hs), 1e-12));
        }
    }
}
