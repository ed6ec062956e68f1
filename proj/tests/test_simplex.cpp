#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "wkam/simplex.hpp"

using namespace wkam;

TEST_CASE("small equality-form LPs") {
    // min -x1 - 2 x2  s.t.  x1 + x2 = 1
    LpProblem lp;
    lp.rows = 1;
    lp.cols = 2;
    lp.objective = {-1.0, -2.0};
    lp.A = {1.0, 1.0};
    lp.b = {1.0};
    LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.value == doctest::Approx(-2.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
}

TEST_CASE("transport-like LP with a known optimum") {
    // min sum c_ij x_ij with row/column sums fixed (2x2)
    LpProblem lp;
    lp.rows = 4;
    lp.cols = 4;  // x11 x12 x21 x22
    lp.objective = {1.0, 3.0, 4.0, 1.5};
    lp.A = {
        1, 1, 0, 0,  // row 1 supply = 0.6
        0, 0, 1, 1,  // row 2 supply = 0.4
        1, 0, 1, 0,  // col 1 demand = 0.5
        0, 1, 0, 1,  // col 2 demand = 0.5
    };
    lp.b = {0.6, 0.4, 0.5, 0.5};
    LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::optimal);
    // optimal: x11 = 0.5, x12 = 0.1, x22 = 0.4 -> 0.5 + 0.3 + 0.6 = 1.4
    CHECK(r.value == doctest::Approx(1.4).epsilon(1e-9));
    CHECK(r.x[0] == doctest::Approx(0.5));
    CHECK(r.x[3] == doctest::Approx(0.4));
}

TEST_CASE("negative b entries are handled by row flips") {
    // x1 - x2 = -0.5, x1 + x2 = 1 -> x = (0.25, 0.75)
    LpProblem lp;
    lp.rows = 2;
    lp.cols = 2;
    lp.objective = {1.0, 1.0};
    lp.A = {1.0, -1.0, 1.0, 1.0};
    lp.b = {-0.5, 1.0};
    LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(0.25));
    CHECK(r.x[1] == doctest::Approx(0.75));
}

TEST_CASE("infeasible and unbounded detection") {
    LpProblem bad;
    bad.rows = 2;
    bad.cols = 1;
    bad.objective = {1.0};
    bad.A = {1.0, 1.0};
    bad.b = {1.0, 2.0};  // x = 1 and x = 2
    CHECK(solve_lp(bad).status == LpStatus::infeasible);

    LpProblem unb;
    unb.rows = 1;
    unb.cols = 2;
    unb.objective = {-1.0, 0.0};
    unb.A = {0.0, 1.0};  // x2 = 1, x1 free to grow
    unb.b = {1.0};
    CHECK(solve_lp(unb).status == LpStatus::unbounded);
}

TEST_CASE("redundant rows keep artificials at zero") {
    // duplicated constraint rows
    LpProblem lp;
    lp.rows = 3;
    lp.cols = 3;
    lp.objective = {2.0, 1.0, 3.0};
    lp.A = {1, 1, 1, 1, 1, 1, 0, 1, 0};
    lp.b = {1.0, 1.0, 0.25};
    LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.x[1] == doctest::Approx(0.25));
    CHECK(r.value == doctest::Approx(2.0 * 0.75 + 0.25).epsilon(1e-9));
}

TEST_CASE("random dense LPs agree with vertex enumeration") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        // 2 rows, 5 cols; enumerate all basic feasible solutions
        LpProblem lp;
        lp.rows = 2;
        lp.cols = 5;
        lp.objective.resize(5);
        lp.A.resize(10);
        for (auto& c : lp.objective) c = U(rng);
        for (auto& a : lp.A) a = U(rng);
        // make feasible: b = A * positive point
        double x0[5];
        for (double& x : x0) x = 0.2 + 0.4 * std::abs(U(rng));
        lp.b = {0.0, 0.0};
        for (int j = 0; j < 5; ++j) {
            lp.b[0] += lp.a(0, j) * x0[j];
            lp.b[1] += lp.a(1, j) * x0[j];
        }
        LpResult r = solve_lp(lp);
        if (r.status != LpStatus::optimal) continue;  // unbounded draws happen
        double best = 1e300;
        for (int j = 0; j < 5; ++j)
            for (int k = j + 1; k < 5; ++k) {
                double a = lp.a(0, j), b = lp.a(0, k);
                double c = lp.a(1, j), d = lp.a(1, k);
                double det = a * d - b * c;
                if (std::fabs(det) < 1e-9) continue;
                double xj = (lp.b[0] * d - b * lp.b[1]) / det;
                double xk = (a * lp.b[1] - lp.b[0] * c) / det;
                if (xj < -1e-9 || xk < -1e-9) continue;
                best = std::min(best, lp.objective[static_cast<std::size_t>(j)] * xj +
                                          lp.objective[static_cast<std::size_t>(k)] * xk);
            }
        if (best < 1e300) CHECK(r.value == doctest::Approx(best).epsilon(1e-7));
    }
}
