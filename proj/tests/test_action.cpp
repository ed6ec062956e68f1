#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "wkam/action.hpp"
#include "wkam/aubry.hpp"
#include "wkam/solver.hpp"

using namespace wkam;
using nlohmann::json;

namespace {

LagrangianModel free_model() {
    return build_model(json{{"family", "mechanical"},
                            {"dim", 1},
                            {"potential", {{"id", "zero"}}}});
}

LagrangianModel pendulum() {
    return build_model(json{{"family", "mechanical"},
                            {"dim", 1},
                            {"potential", {{"id", "cos"}, {"k", 1}, {"amp", 1.0}}}});
}

double barrier_oracle(double x) {
    // quadrature of sqrt(2 (1 - cos 2 pi s)) = 2 |sin(pi s)| from 0 to x
    double t = std::min(x, 1.0 - x);
    return (2.0 / M_PI) * (1.0 - std::cos(M_PI * t));
}

}  // namespace

TEST_CASE("free finite action matches d^2/(2t)") {
    LagrangianModel m = free_model();
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    cfg.c = 0.0;
    ActionTable t1 = finite_action(TorusPoint(0.0), 1.0, cfg, m);
    const GridField& h = t1.fields.front();
    CHECK(std::fabs(h.v[0]) <= 2.0 * cfg.grid.dx());
    CHECK(std::fabs(h.v[32] - 0.125) <= 5.0 * cfg.grid.dx());
    // a couple of generic targets
    for (int i : {8, 16, 48}) {
        double d = std::min(i / 64.0, 1.0 - i / 64.0);
        CHECK(std::fabs(h.v[static_cast<std::size_t>(i)] - d * d / 2.0) <=
              5.0 * cfg.grid.dx());
    }
    CHECK_THROWS_AS(finite_action(TorusPoint(0.0), 0.5 * cfg.dt, cfg, m), SolverError);
}

TEST_CASE("pendulum finite action approaches the barrier by t=4") {
    LagrangianModel m = pendulum();
    SolverConfig cfg = SolverConfig::make_default(m, 128);
    cfg.c = 1.0;
    ActionTable t4 = finite_action(TorusPoint(0.0), 4.0, cfg, m);
    CHECK(std::fabs(t4.fields.front().v[64] - 2.0 / M_PI) <= 0.05);
}

TEST_CASE("discounted action: stay-put curves and the lambda->0 limit") {
    LagrangianModel m = free_model();
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    cfg.c = 0.0;
    CHECK(std::fabs(discounted_action(TorusPoint(0.3), TorusPoint(0.3), 0.0, 1.0,
                                      0.5, cfg, m)) <= 2.0 * cfg.grid.dx());
    CHECK_THROWS_AS(
        discounted_action(TorusPoint(0.0), TorusPoint(0.5), 1.0, 1.0, 0.5, cfg, m),
        SolverError);

    // degenerate weights: matches the undiscounted table within 1e-3
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        TorusPoint x(U(rng)), y(U(rng));
        double t = 0.5 + 1.5 * U(rng);
        double da = discounted_action(x, y, 0.0, t, 1e-6, cfg, m);
        ActionTable tab = finite_action(x, t, cfg, m);
        CHECK(std::fabs(da - tab.fields.front().interp(y)) <= 1e-3);
    }

    LagrangianModel p = pendulum();
    SolverConfig cfg2 = SolverConfig::make_default(p, 64);
    cfg2.c = 1.0;
    CHECK(std::fabs(discounted_action(TorusPoint(0.0), TorusPoint(0.0), 0.0, 2.0,
                                      0.2, cfg2, p)) <= 2.0 * cfg2.grid.dx());
}

TEST_CASE("Peierls barrier: free case vanishes, pendulum matches quadrature") {
    LagrangianModel m = free_model();
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    cfg.c = 0.0;
    Barrier b0 = peierls_barrier(TorusPoint(0.25), cfg, m);
    for (double v : b0.liminf.v) CHECK(std::fabs(v) <= 5.0 * cfg.grid.dx());

    LagrangianModel p = pendulum();
    SolverConfig cfg2 = SolverConfig::make_default(p, 256);
    cfg2.c = 1.0;
    Barrier bp = peierls_barrier(TorusPoint(0.0), cfg2, p);
    double worst = 0.0;
    for (int i = 0; i < cfg2.grid.n; ++i)
        worst = std::max(worst, std::fabs(bp.liminf.v[static_cast<std::size_t>(i)] -
                                          barrier_oracle(i / 256.0)));
    CHECK(worst <= 0.03);
    CHECK(std::fabs(bp.liminf.v[0]) <= 0.01);  // h_inf(0,0) = 0 on the Aubry set
    CHECK_FALSE(bp.oscillation_flag);
}

TEST_CASE("barrier pseudo-metric properties on sampled sources") {
    LagrangianModel m = pendulum();
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    cfg.c = 1.0;
    std::vector<Barrier> bars;
    std::vector<int> srcs;
    for (int i = 0; i < 64; i += 8) {
        bars.push_back(peierls_barrier(TorusPoint(i / 64.0), cfg, m));
        srcs.push_back(i);
    }
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> S(0, static_cast<int>(srcs.size()) - 1);
    std::uniform_int_distribution<int> Y(0, 63);
    const double slack = 10.0 * cfg.grid.dx();
    for (int rep = 0; rep < 1000; ++rep) {
        int a = S(rng), z = S(rng);
        int y = Y(rng);
        double hxy = bars[static_cast<std::size_t>(a)].liminf.v[static_cast<std::size_t>(y)];
        double hxz = bars[static_cast<std::size_t>(a)].liminf.v[static_cast<std::size_t>(srcs[static_cast<std::size_t>(z)])];
        double hzy = bars[static_cast<std::size_t>(z)].liminf.v[static_cast<std::size_t>(y)];
        CHECK(hxy <= hxz + hzy + slack);  // triangle inequality
        // d_c nonnegativity on source pairs
        double hyx = bars[static_cast<std::size_t>(z)].liminf.v[static_cast<std::size_t>(srcs[static_cast<std::size_t>(a)])];
        CHECK(hxz + hyx >= -slack);
    }
}

TEST_CASE("backtracked minimizers are consistent and near-geodesic") {
    LagrangianModel m = free_model();
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    cfg.c = 0.0;
    ActionTable tab = finite_action(TorusPoint(0.0), 1.0, cfg, m, true);
    Trajectory tr = backtrack_minimizer(tab, TorusPoint(0.5));
    REQUIRE(tr.samples.size() >= 2);
    // integration consistency with wraparound
    for (std::size_t k = 0; k + 1 < tr.samples.size(); ++k) {
        const auto& s0 = tr.samples[k];
        const auto& s1 = tr.samples[k + 1];
        double step = s1.t - s0.t;
        double moved = torus_delta(s0.x[0], s1.x[0]);
        CHECK(std::fabs(moved - s1.v[0] * step) <= 1e-9);
    }
    // near-constant speed 1/2 (either orientation)
    for (std::size_t k = 1; k + 1 < tr.samples.size(); ++k)
        CHECK(std::fabs(std::fabs(tr.samples[k].v[0]) - 0.5) <= 0.1);

    Trajectory still = backtrack_minimizer(tab, TorusPoint(0.0));
    for (const auto& s : still.samples) CHECK(std::fabs(s.v[0]) <= 0.05);
}

TEST_CASE("pendulum minimizer dwells at the hilltop then crosses") {
    LagrangianModel m = pendulum();
    SolverConfig cfg = SolverConfig::make_default(m, 128);
    cfg.c = 1.0;
    ActionTable tab = finite_action(TorusPoint(0.0), 8.0, cfg, m, true);
    Trajectory tr = backtrack_minimizer(tab, TorusPoint(0.5));
    // terminal speed profile matches the energy-conservation oracle
    int checked = 0;
    for (const auto& s : tr.samples) {
        double d = std::min(s.x[0], 1.0 - s.x[0]);
        if (s.t > 6.5 && d > 0.1) {
            double oracle = 2.0 * std::fabs(std::sin(M_PI * s.x[0]));
            CHECK(std::fabs(std::fabs(s.v[0]) - oracle) <= 0.1);
            ++checked;
        }
    }
    CHECK(checked > 0);
    // dwells near the hilltop early on
    double early_far = 0.0;
    for (const auto& s : tr.samples)
        if (s.t < 2.0)
            early_far = std::max(early_far, std::min(s.x[0], 1.0 - s.x[0]));
    CHECK(early_far <= 0.1);
}

TEST_CASE("action table is finite for t >= 1 and sub-additive") {
    LagrangianModel m = pendulum();
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    cfg.c = 1.0;
    ActionTable from0 = finite_action_multi(TorusPoint(0.0), {1.0, 2.0}, cfg, m);
    CHECK(from0.fields[0].all_finite());
    CHECK(from0.fields[0].max_value() < kBigActionCost / 2);

    // h^2(x,y) <= h^1(x,z) + h^1(z,y) + 10 dx on sampled triples
    const double slack = 10.0 * cfg.grid.dx();
    for (int z = 0; z < 64; z += 8) {
        ActionTable fromz = finite_action(TorusPoint(z / 64.0), 1.0, cfg, m);
        for (int y = 0; y < 64; y += 5) {
            double lhs = from0.fields[1].v[static_cast<std::size_t>(y)];
            double rhs = from0.fields[0].v[static_cast<std::size_t>(z)] +
                         fromz.fields[0].v[static_cast<std::size_t>(y)];
            CHECK(lhs <= rhs + slack);
        }
    }
}

TEST_CASE("action table CSV export") {
    LagrangianModel m = free_model();
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    cfg.c = 0.0;
    ActionTable tab = finite_action_multi(TorusPoint(0.0), {1.0, 2.0}, cfg, m);
    std::string path = "action_table_test.csv";
    tab.write_csv(path);
    std::ifstream is(path);
    REQUIRE(is.good());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,y,value");
    std::size_t lines = 0;
    for (std::string line; std::getline(is, line);) ++lines;
    CHECK(lines == 2 * 64);
    std::remove(path.c_str());
}

TEST_CASE("backtracked minimizers satisfy the discrete E-L residual") {
    LagrangianModel m = pendulum();
    auto residual_at = [&](int n) {
        SolverConfig cfg = SolverConfig::make_default(m, n);
        cfg.c = 1.0;
        ActionTable tab = finite_action(TorusPoint(0.0), 4.0, cfg, m, true);
        Trajectory tr = backtrack_minimizer(tab, TorusPoint(0.375));
        // central differences on the sampled path, resampled to ~0.1 time
        // units so grid snapping noise does not dominate the quotient
        const std::size_t stride =
            std::max<std::size_t>(1, static_cast<std::size_t>(0.1 / tab.dt));
        const double h = tab.dt * static_cast<double>(stride);
        double worst = 0.0;
        const double T = tr.samples.back().t;
        for (std::size_t k = stride; k + stride < tr.samples.size(); ++k) {
            const auto& sm = tr.samples[k - stride];
            const auto& s0 = tr.samples[k];
            const auto& sp = tr.samples[k + stride];
            if (s0.t < 0.3 || s0.t > T - 0.3) continue;  // endpoint layers
            double d = std::min(s0.x[0], 1.0 - s0.x[0]);
            if (d < 0.05 || d > 0.45) continue;  // rest point and kink regions
            double dLv = (m.dL_dv(sp.x, sp.v)[0] - m.dL_dv(sm.x, sm.v)[0]) / (2 * h);
            double res = dLv - m.dL_dx(s0.x, s0.v)[0];  // lambda = 0
            worst = std::max(worst, std::fabs(res));
        }
        return worst;
    };
    double r64 = residual_at(64);
    double r128 = residual_at(128);
    CHECK(r64 <= 0.5);
    CHECK(r128 <= 0.5);
    CHECK(r128 <= r64);  // decreases under refinement
}

TEST_CASE("drift breaks barrier symmetry; LP still matches -c") {
    LagrangianModel m = build_model(
        json{{"family", "mechanical-with-drift"},
             {"dim", 1},
             {"potential", {{"id", "cos"}, {"k", 1}, {"amp", 1.0}}},
             {"drift", {{"id", "const"}, {"v", {0.3}}}}});
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    CriticalValue cv = critical_value(m, cfg);
    cfg.c = cv.c;

    DiscreteMeasure mu = mather_lp(cfg, m);
    CHECK(std::fabs(mu.objective + cv.c) <= 1e-2);

    Barrier fwd = peierls_barrier(TorusPoint(0.0), cfg, m);
    SolverConfig rcfg = cfg;
    LagrangianModel rev = m.velocity_reversed();
    rcfg.v_max = rev.v_max_default();
    Barrier bwd = peierls_barrier(TorusPoint(0.0), rcfg, rev);
    // h(0, y) vs h(y, 0): reversibility is broken by the drift
    double asym = 0.0;
    for (int y = 0; y < 64; y += 4)
        asym = std::max(asym, std::fabs(fwd.liminf.v[static_cast<std::size_t>(y)] -
                                        bwd.liminf.v[static_cast<std::size_t>(y)]));
    CHECK(asym > 3.0 * cfg.grid.dx());
}

TEST_CASE("E-L flow: equilibrium, free wrap, energy conservation") {
    LagrangianModel m = pendulum();
    Trajectory eq = el_flow(TorusPoint(0.0), Vec(0.0), 0.1, 10.0, m);
    for (const auto& s : eq.samples) {
        CHECK(std::fabs(torus_delta(0.0, s.x[0])) <= 1e-12);
        CHECK(std::fabs(s.v[0]) <= 1e-12);
    }

    LagrangianModel f = free_model();
    Trajectory wrap = el_flow(TorusPoint(0.0), Vec(1.0), 0.0, 1.0, f);
    CHECK(std::fabs(torus_delta(0.0, wrap.samples.back().x[0])) <= 1e-12);
    CHECK(wrap.samples.back().v[0] == doctest::Approx(1.0));

    // energy L_v.v - L is conserved at lambda = 0
    Trajectory orbit = el_flow(TorusPoint(0.5), Vec(2.0), 0.0, 2.0, m);
    double e0 = m.energy(orbit.samples.front().x, orbit.samples.front().v);
    for (const auto& s : orbit.samples)
        CHECK(std::fabs(m.energy(s.x, s.v) - e0) <= 1e-6);
}

TEST_CASE("discounted E-L flow drifts energy upward") {
    LagrangianModel m = pendulum();
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
        TorusPoint x0(U(rng));
        Vec v0(1.0 + U(rng));
        Trajectory tr = el_flow(x0, v0, 0.3, 2.0, m);
        double e0 = m.energy(tr.samples.front().x, tr.samples.front().v);
        double e1 = m.energy(tr.samples.back().x, tr.samples.back().v);
        CHECK(e1 > e0);
    }
}
