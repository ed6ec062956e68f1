#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <random>

#include "test_util.hpp"
#include "wkam/grid.hpp"

using namespace wkam;

TEST_CASE("grid spec guards") {
    CHECK_THROWS_AS(GridSpec(1, 8), GridError);    // below minimum
    CHECK_THROWS_AS(GridSpec(1, 100), GridError);  // not a power of two
    CHECK_THROWS_AS(GridSpec(3, 32), GridError);
    CHECK_THROWS_AS(GridSpec(2, 4096), GridError);  // 4096^2 > 2^22
    CHECK(GridSpec(2, 2048).node_count() == (1u << 22));
}

TEST_CASE("interpolation matches node values and is periodic") {
    std::mt19937_64 rng(3);
    GridSpec g(1, 64);
    GridField f = test::make_smooth_field(g, rng);
    for (int i = 0; i < g.n; ++i) {
        double x = static_cast<double>(i) / g.n;
        CHECK(f.interp(TorusPoint(x)) == f.v[static_cast<std::size_t>(i)]);
        // unit translate of a dyadic point is exact
        double y = x + 1.0;
        CHECK(f.interp(&y) == f.v[static_cast<std::size_t>(i)]);
        double z = x - 1.0;
        CHECK(f.interp(&z) == f.v[static_cast<std::size_t>(i)]);
    }
    // linear between nodes
    double mid = (3 + 0.5) / 64.0;
    CHECK(f.interp(&mid) == doctest::Approx(0.5 * (f.v[3] + f.v[4])));
}

TEST_CASE("2-d interpolation is bilinear and periodic") {
    std::mt19937_64 rng(5);
    GridSpec g(2, 32);
    GridField f = test::make_smooth_field(g, rng);
    for (int i = 0; i < g.n; i += 7)
        for (int j = 0; j < g.n; j += 5) {
            TorusPoint p(static_cast<double>(i) / g.n, static_cast<double>(j) / g.n);
            CHECK(f.interp(p) == f.v[g.index(i, j)]);
            double q[2] = {p[0] + 1.0, p[1] - 1.0};
            CHECK(f.interp(q) == f.v[g.index(i, j)]);
        }
    double q[2] = {(5 + 0.25) / 32.0, (9 + 0.75) / 32.0};
    double expect = 0.75 * (0.25 * f.v[g.index(5, 9)] + 0.75 * f.v[g.index(5, 10)]) +
                    0.25 * (0.25 * f.v[g.index(6, 9)] + 0.75 * f.v[g.index(6, 10)]);
    CHECK(f.interp(q) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("binary round trip is bit exact") {
    std::mt19937_64 rng(9);
    GridSpec g(1, 128);
    GridField f = test::make_smooth_field(g, rng);
    f.meta.lambda = 0.125;
    f.meta.c = 1.0 + 1e-9;
    std::string path = "roundtrip_test.bin";
    f.write_binary(path);
    GridField r = GridField::read_binary(path);
    CHECK(r.grid.n == f.grid.n);
    CHECK(r.meta.lambda == f.meta.lambda);
    CHECK(r.meta.c == f.meta.c);
    for (std::size_t i = 0; i < f.v.size(); ++i) CHECK(r.v[i] == f.v[i]);
    std::remove(path.c_str());
    CHECK_THROWS_AS(GridField::read_binary("no_such_file.bin"), GridError);
}

TEST_CASE("discrete Lipschitz constant") {
    GridSpec g(1, 16);
    GridField f(g, 0.0);
    f.v[5] = 0.25;  // jump of 0.25 over dx = 1/16
    CHECK(f.discrete_lipschitz() == doctest::Approx(4.0));
}
