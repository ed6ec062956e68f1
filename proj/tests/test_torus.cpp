#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "wkam/torus.hpp"

using namespace wkam;

TEST_CASE("coordinates are reduced to [0,1)") {
    CHECK(TorusPoint(1.25)[0] == doctest::Approx(0.25));
    CHECK(TorusPoint(-0.25)[0] == doctest::Approx(0.75));
    CHECK(TorusPoint(1.0)[0] == 0.0);
    TorusPoint p(2.5, -1.75);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.25));
}

TEST_CASE("torus metric wraparound and identity") {
    CHECK(torus_metric(TorusPoint(0.1), TorusPoint(0.9)) == doctest::Approx(0.2));
    CHECK(torus_metric(TorusPoint(0.37), TorusPoint(0.37)) == 0.0);
    CHECK(torus_metric(TorusPoint(0.0, 0.0), TorusPoint(0.5, 0.5)) ==
          doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(torus_metric(TorusPoint(0.1), TorusPoint(0.1, 0.2)),
                    std::invalid_argument);
}

TEST_CASE("torus metric is a metric and bounded by sqrt(d)/2") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (int rep = 0; rep < 1000; ++rep) {
        for (int dim = 1; dim <= 2; ++dim) {
            auto pt = [&] {
                return dim == 1 ? TorusPoint(U(rng)) : TorusPoint(U(rng), U(rng));
            };
            TorusPoint a = pt(), b = pt(), c = pt();
            double ab = torus_metric(a, b), ba = torus_metric(b, a);
            double ac = torus_metric(a, c), cb = torus_metric(c, b);
            CHECK(ab >= 0.0);
            CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
            CHECK(ab <= ac + cb + 1e-12);
            CHECK(ab <= std::sqrt(static_cast<double>(dim)) / 2.0 + 1e-12);
        }
    }
}

TEST_CASE("advanced wraps and signed deltas are shortest") {
    TorusPoint p(0.9);
    TorusPoint q = p.advanced(Vec(1.0), 0.2);
    CHECK(q[0] == doctest::Approx(0.1));
    CHECK(torus_delta(0.9, 0.1) == doctest::Approx(0.2));
    CHECK(torus_delta(0.1, 0.9) == doctest::Approx(-0.2));
}
