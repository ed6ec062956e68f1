#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "wkam/sweep.hpp"

using namespace wkam;
using nlohmann::json;

namespace {

LagrangianModel by_potential(const std::string& id) {
    return build_model(json{{"family", "mechanical"},
                            {"dim", 1},
                            {"potential", {{"id", id}, {"k", 1}, {"amp", 1.0}}}});
}

double analytic_u0(double x) {
    double t = std::min(x, 1.0 - x);
    return (2.0 / M_PI) * (1.0 - std::cos(M_PI * t));
}

}  // namespace

TEST_CASE("schedule validation") {
    LagrangianModel m = by_potential("zero");
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    CHECK_THROWS_AS(discount_sweep({0.1, 0.2}, cfg, m), ConfigError);
    CHECK_THROWS_AS(discount_sweep({0.4, 0.005}, cfg, m), ConfigError);
    CHECK_THROWS_AS(discount_sweep({}, cfg, m), ConfigError);
}

TEST_CASE("free Lagrangian sweep is identically zero") {
    LagrangianModel m = by_potential("zero");
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    SweepResult sr = discount_sweep({0.4, 0.2, 0.1, 0.05}, cfg, m);
    REQUIRE(sr.complete);
    CHECK(std::fabs(sr.critical.c) <= 1e-3);
    for (const auto& u : sr.u_minus)
        CHECK(std::fabs(u.max_value()) + std::fabs(u.min_value()) <= 1e-6);
    for (double c : sr.cauchy) CHECK(c <= 1e-6);
    for (const auto& g : sr.g_lambda) CHECK(g.size() == 64);
}

TEST_CASE("pendulum sweep: Cauchy decay, limit field, and all four checks") {
    LagrangianModel m = by_potential("cos");
    SolverConfig cfg = SolverConfig::make_default(m, 128);
    SweepResult sr = discount_sweep({0.4, 0.2, 0.1, 0.05}, cfg, m);
    REQUIRE(sr.complete);
    CHECK(std::fabs(sr.critical.c - 1.0) <= 5e-3);

    for (std::size_t k = 0; k + 1 < sr.cauchy.size(); ++k)
        CHECK(sr.cauchy[k + 1] <= sr.cauchy[k] + 1e-12);

    double sup = 0.0;
    for (int i = 0; i < 128; ++i)
        sup = std::max(sup, std::fabs(sr.u0_minus().v[static_cast<std::size_t>(i)] -
                                      analytic_u0(i / 128.0)));
    CHECK(sup <= 0.05);

    // ordering along the whole schedule (envelope-exact)
    for (std::size_t k = 0; k < sr.u_minus.size(); ++k)
        for (std::size_t i = 0; i < sr.u_minus[k].v.size(); ++i)
            CHECK(sr.u_minus[k].v[i] >= sr.u_plus[k].v[i] - 2.0 * cfg.grid.dx());

    // equi-Lipschitz and equi-bounded along the schedule
    const double kappa = m.lipschitz_kappa();
    double K0 = 0.0;
    for (const auto& up : sr.u_plus)
        K0 = std::max({K0, std::fabs(up.max_value()), std::fabs(up.min_value())});
    for (const auto& um : sr.u_minus) {
        CHECK(um.discrete_lipschitz() <= kappa);
        double bound = K0 + kappa * 0.5 * std::sqrt(1.0) + 1.0;
        CHECK(std::max(std::fabs(um.max_value()), std::fabs(um.min_value())) <= bound);
    }

    SolverConfig bcfg = cfg;
    bcfg.c = sr.critical.c;
    BarrierCache cache(bcfg, m);
    PointSet aubry = aubry_set(bcfg, m, cache);
    PointSet classes = static_classes(aubry, cache);
    CHECK(classes.num_classes() == 1);

    // forward limit oracle: u_0^+ = -h^inf(., x*) with x* = 0
    const Barrier& b0 = cache.get(0);
    double supf = 0.0;
    for (std::size_t i = 0; i < 128; ++i)
        supf = std::max(supf, std::fabs(sr.u0_plus().v[i] + b0.liminf.v[i]));
    CHECK(supf <= 0.05);

    SolverConfig lcfg = bcfg;
    lcfg.grid = GridSpec(1, 64);
    DiscreteMeasure mu = mather_lp(lcfg, m);
    PointSet mset = mather_set(mu);

    CheckReport conj = conjugate_check(sr.u0_minus(), sr.u0_plus(), mset, 0.05);
    CHECK(conj.pass);
    CheckReport swapped = conjugate_check(sr.u0_plus(), sr.u0_minus(), mset, 0.05);
    CHECK_FALSE(swapped.pass);  // negative control
    CHECK(swapped.violations > 0);

    CheckReport repr = representation_check(sr.u0_minus(), classes, cache, 0.05);
    CHECK(repr.pass);

    CheckReport star = star_condition_check(sr, classes, 0.05);
    CHECK(star.pass);

    PointSet g0 = compute_G0(bcfg, m, classes, aubry);
    CheckReport usc = usc_check(sr, g0, 0.05);
    CHECK(usc.pass);
}

TEST_CASE("Aubry set tracks the vanishing-discount calibrated set") {
    // unique-class consistency: Hausdorff(aubry, G at the smallest lambda)
    // stays within 5 dx (both sets fatten identically around the maximum)
    LagrangianModel m = by_potential("cos");
    SolverConfig cfg = SolverConfig::make_default(m, 128);
    SweepResult sr = discount_sweep({0.4, 0.2, 0.1, 0.05}, cfg, m);
    REQUIRE(sr.complete);
    SolverConfig bcfg = cfg;
    bcfg.c = sr.critical.c;
    BarrierCache cache(bcfg, m);
    PointSet a = aubry_set(bcfg, m, cache);
    CHECK(hausdorff_distance(a, sr.g_lambda.back()) <= 5.0 * cfg.grid.dx());
}

TEST_CASE("two_bump sweep: two classes, both reached by G_lambda") {
    LagrangianModel m = by_potential("two_bump");
    SolverConfig cfg = SolverConfig::make_default(m, 128);
    SweepResult sr = discount_sweep({0.4, 0.2, 0.1}, cfg, m);
    REQUIRE(sr.complete);
    CHECK(std::fabs(sr.critical.c - 1.0) <= 5e-3);

    SolverConfig bcfg = cfg;
    bcfg.c = sr.critical.c;
    BarrierCache cache(bcfg, m);
    PointSet aubry = aubry_set(bcfg, m, cache, 0.05);
    PointSet classes = static_classes(aubry, cache);
    CHECK(classes.num_classes() == 2);
    CHECK(std::fabs(pseudo_metric(0, 64, cache) - 4.0 / M_PI) <= 0.05);

    CheckReport star = star_condition_check(sr, classes, 0.05);
    CHECK(star.pass);

    CheckReport repr = representation_check(sr.u0_minus(), classes, cache, 0.05);
    CHECK(repr.pass);

    PointSet g0 = compute_G0(bcfg, m, classes, aubry);
    CheckReport usc = usc_check(sr, g0, 0.05);
    CHECK(usc.pass);
}

TEST_CASE("sweep export writes fields and manifest") {
    LagrangianModel m = by_potential("zero");
    SolverConfig cfg = SolverConfig::make_default(m, 64);
    SweepResult sr = discount_sweep({0.4, 0.2, 0.1}, cfg, m);
    std::string dir = "sweep_export_test";
    export_sweep(dir, sr, {});
    namespace fs = std::filesystem;
    CHECK(fs::exists(dir + "/u_minus_0.1.bin"));
    CHECK(fs::exists(dir + "/u_plus_0.4.csv"));
    CHECK(fs::exists(dir + "/cauchy.csv"));
    CHECK(fs::exists(dir + "/manifest.json"));
    GridField r = GridField::read_binary(dir + "/u_minus_0.1.bin");
    CHECK(r.grid.n == 64);
    CHECK(r.meta.lambda == 0.1);
    fs::remove_all(dir);
}
