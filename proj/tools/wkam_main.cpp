// wkam: numerical weak-KAM laboratory on flat tori.
//
// Subcommands: critical, solve, sweep, aubry, barrier, check, plot.
// Exit codes: 0 success, 1 config error, 2 solver failure, 3 check failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wkam/action.hpp"
#include "wkam/aubry.hpp"
#include "wkam/parallel.hpp"
#include "wkam/solver.hpp"
#include "wkam/sweep.hpp"

using namespace wkam;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    json model_spec;
    int n = 256;
    double dt = 0.0;     // 0 = auto
    double v_max = 0.0;  // 0 = auto
    int vel_m = 17;
    int refine = 2;
    double tol_fix = 1e-9;
    long k_max = 0;
    std::vector<double> schedule{0.4, 0.2, 0.1, 0.05};
    std::string out = "out";
    double eps_check = 0.05;
    double eps_G = -1.0;
    double eps_A = -1.0;
    double eps_class = 0.1;
    unsigned long seed = 42;
    int threads = 0;

    json echo() const {
        return json{{"model", model_spec},
                    {"grid", {{"n", n}}},
                    {"solver",
                     {{"dt", dt},
                      {"v_max", v_max},
                      {"m", vel_m},
                      {"refine", refine},
                      {"tol_fix", tol_fix},
                      {"k_max", k_max}}},
                    {"schedule", schedule},
                    {"out", out},
                    {"checks",
                     {{"eps", eps_check},
                      {"eps_G", eps_G},
                      {"eps_A", eps_A},
                      {"eps_class", eps_class}}},
                    {"seed", seed},
                    {"threads", threads}};
    }
};

RunConfig load_config(const std::string& path) {
    RunConfig rc;
    rc.model_spec = json{{"family", "mechanical"},
                         {"dim", 1},
                         {"potential", {{"id", "cos"}, {"k", 1}, {"amp", 1.0}}},
                         {"perturbation", nullptr}};
    if (path.empty()) return rc;
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (j.contains("model")) rc.model_spec = j["model"];
    if (j.contains("grid")) rc.n = j["grid"].value("n", rc.n);
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        rc.dt = s.value("dt", rc.dt);
        rc.v_max = s.value("v_max", rc.v_max);
        rc.vel_m = s.value("m", rc.vel_m);
        rc.refine = s.value("refine", rc.refine);
        rc.tol_fix = s.value("tol_fix", rc.tol_fix);
        rc.k_max = s.value("k_max", rc.k_max);
    }
    if (j.contains("schedule")) rc.schedule = j["schedule"].get<std::vector<double>>();
    if (j.contains("out")) rc.out = j["out"].get<std::string>();
    if (j.contains("checks")) {
        const auto& c = j["checks"];
        rc.eps_check = c.value("eps", rc.eps_check);
        rc.eps_G = c.value("eps_G", rc.eps_G);
        rc.eps_A = c.value("eps_A", rc.eps_A);
        rc.eps_class = c.value("eps_class", rc.eps_class);
    }
    if (j.contains("seed")) rc.seed = j["seed"].get<unsigned long>();
    if (j.contains("threads")) rc.threads = j["threads"].get<int>();
    return rc;
}

SolverConfig make_solver_config(const RunConfig& rc, const LagrangianModel& model,
                                double lambda = 0.0) {
    SolverConfig cfg = SolverConfig::make_default(model, rc.n, lambda);
    if (rc.v_max > 0.0) {
        cfg.v_max = rc.v_max;
        cfg.dt = std::min(0.5 / cfg.v_max, SolverConfig::dt_factor * cfg.grid.dx());
    }
    if (rc.dt > 0.0) cfg.dt = rc.dt;
    cfg.vel_lattice_m = rc.vel_m;
    cfg.refine_rounds = rc.refine;
    cfg.tol_fix = rc.tol_fix;
    cfg.k_max = rc.k_max;
    cfg.validate();
    return cfg;
}

void write_manifest(const std::string& dir, const std::string& command,
                    const RunConfig& rc, json extra) {
    fs::create_directories(dir);
    json m;
    m["command"] = command;
    m["config"] = rc.echo();
    m["results"] = std::move(extra);
    std::ofstream os(dir + "/manifest_" + command + ".json");
    os << m.dump(2) << '\n';
}

json critical_to_json(const CriticalValue& cv) {
    return json{{"c", cv.c},
                {"lambdas", cv.lambdas},
                {"estimates", cv.estimates},
                {"iterations", cv.iterations},
                {"richardson1", cv.richardson1},
                {"richardson2", cv.richardson2}};
}

// c is expensive; cache it per (model, grid) in the output directory
CriticalValue cached_critical(const RunConfig& rc, const LagrangianModel& model,
                              const SolverConfig& cfg) {
    const std::string path = rc.out + "/critical.json";
    std::ifstream is(path);
    if (is) {
        try {
            json j = json::parse(is);
            if (j.value("grid_n", -1) == rc.n && j["model"] == rc.model_spec) {
                CriticalValue cv;
                cv.c = j.at("c").get<double>();
                auto est = j.at("estimates");
                for (int k = 0; k < 3; ++k) cv.estimates[static_cast<std::size_t>(k)] = est[static_cast<std::size_t>(k)];
                return cv;
            }
        } catch (...) {
            // stale or foreign file; recompute
        }
    }
    CriticalValue cv = critical_value(model, cfg);
    fs::create_directories(rc.out);
    json j = critical_to_json(cv);
    j["grid_n"] = rc.n;
    j["model"] = rc.model_spec;
    std::ofstream os(path);
    os << j.dump(2) << '\n';
    return cv;
}

int cmd_critical(const RunConfig& rc) {
    LagrangianModel model = build_model(rc.model_spec);
    SolverConfig cfg = make_solver_config(rc, model);
    CriticalValue cv = critical_value(model, cfg);
    std::printf("c = %.6f\n", cv.c);
    fs::create_directories(rc.out);
    json j = critical_to_json(cv);
    j["grid_n"] = rc.n;
    j["model"] = rc.model_spec;
    {
        std::ofstream os(rc.out + "/critical.json");
        os << j.dump(2) << '\n';
    }
    write_manifest(rc.out, "critical", rc, critical_to_json(cv));
    return 0;
}

int cmd_solve(const RunConfig& rc, double lambda) {
    if (!(lambda > 0.0)) {
        std::fprintf(stderr, "lambda must be positive; use sweep for the limit\n");
        return 1;
    }
    LagrangianModel model = build_model(rc.model_spec);
    SolverConfig cfg = make_solver_config(rc, model, lambda);
    CriticalValue cv = cached_critical(rc, model, cfg);
    cfg.c = cv.c;

    fs::create_directories(rc.out);
    json results;
    results["c"] = cv.c;
    results["lambda"] = lambda;
    try {
        GridField up = forward_solution(cfg, model);
        up.write_binary(rc.out + "/u_plus.bin");
        up.write_csv(rc.out + "/u_plus.csv");
        results["forward_iterations"] = up.meta.iterations;

        GridField um = ground_state(up, cfg, model);
        um.write_binary(rc.out + "/u_minus.bin");
        um.write_csv(rc.out + "/u_minus.csv");
        results["backward_iterations"] = um.meta.iterations;
        results["backward_converged"] = um.meta.converged;

        double epsG = rc.eps_G > 0 ? rc.eps_G : 10.0 * cfg.grid.dx();
        PointSet g = calibrated_set(um, up, epsG);
        g.write_csv(rc.out + "/g_lambda.csv");
        results["g_lambda_size"] = g.size();

        GridField res = residual(um, cfg, model);
        res.write_binary(rc.out + "/residual.bin");
        res.write_csv(rc.out + "/residual.csv");
        auto collar = kink_collar(um);
        results["max_residual_outside_collar"] = max_residual_outside(res, collar);

        if (!um.meta.converged) {
            results["note"] = "backward envelope unconverged within budget; "
                              "partial results saved";
            write_manifest(rc.out, "solve", rc, results);
            std::fprintf(stderr,
                         "solver failure: backward envelope unconverged "
                         "(increment %.3e)\n",
                         um.meta.last_increment);
            return 2;
        }
        write_manifest(rc.out, "solve", rc, results);
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        results["error"] = e.what();
        write_manifest(rc.out, "solve", rc, results);
        return 2;
    }
    return 0;
}

int cmd_sweep(const RunConfig& rc) {
    LagrangianModel model = build_model(rc.model_spec);
    SolverConfig cfg = make_solver_config(rc, model);
    SweepResult sweep = discount_sweep(rc.schedule, cfg, model, rc.eps_G);
    if (!sweep.complete) {
        std::fprintf(stderr, "sweep aborted: %s\n", sweep.error.c_str());
        export_sweep(rc.out, sweep, {});
        return 2;
    }

    SolverConfig bcfg = cfg;
    bcfg.c = sweep.critical.c;
    BarrierCache cache(bcfg, model);
    PointSet aubry = aubry_set(bcfg, model, cache, rc.eps_A);
    PointSet classes = static_classes(aubry, cache, rc.eps_class);

    // LP cross-check runs on a coarsened copy of the grid when needed
    int n_lp = std::min(rc.n, cfg.grid.dim == 1 ? 64 : 16);
    SolverConfig lcfg = make_solver_config(rc, model);
    lcfg.grid = GridSpec(cfg.grid.dim, n_lp);
    lcfg.c = sweep.critical.c;
    DiscreteMeasure mu = mather_lp(lcfg, model);
    PointSet mset = mather_set(mu);

    std::vector<CheckReport> reports;
    reports.push_back(conjugate_check(sweep.u0_minus(), sweep.u0_plus(), mset,
                                      rc.eps_check));
    reports.push_back(representation_check(sweep.u0_minus(), classes, cache,
                                           rc.eps_check));
    reports.push_back(star_condition_check(sweep, classes, rc.eps_check));
    PointSet g0 = compute_G0(bcfg, model, classes, aubry);
    reports.push_back(usc_check(sweep, g0, rc.eps_check));

    export_sweep(rc.out, sweep, reports);
    aubry.write_csv(rc.out + "/aubry.csv");
    classes.write_csv(rc.out + "/classes.csv");
    mu.write_csv(rc.out + "/mather_measure.csv");
    mset.write_csv(rc.out + "/mather_set.csv");
    g0.write_csv(rc.out + "/g0.csv");

    bool all = true;
    std::printf("%-16s %-6s %-12s %s\n", "check", "state", "margin", "violations");
    for (const auto& r : reports) {
        std::printf("%-16s %-6s %-12.6g %ld\n", r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.margin, r.violations);
        all = all && r.pass;
    }
    json extra;
    extra["c"] = sweep.critical.c;
    extra["all_checks_pass"] = all;
    extra["num_classes"] = classes.num_classes();
    double icd = min_interclass_distance(classes);
    if (std::isfinite(icd)) {
        extra["min_interclass_distance"] = icd;
        if (icd < 4.0 * cfg.grid.dx())
            extra["warning"] =
                "two classes sit within 4 dx; threshold clustering may differ "
                "from connectedness at this resolution";
    }
    write_manifest(rc.out, "sweep", rc, extra);
    return all ? 0 : 3;
}

int cmd_aubry(const RunConfig& rc) {
    LagrangianModel model = build_model(rc.model_spec);
    SolverConfig cfg = make_solver_config(rc, model);
    CriticalValue cv = cached_critical(rc, model, cfg);
    cfg.c = cv.c;

    BarrierCache cache(cfg, model);
    PointSet aubry = aubry_set(cfg, model, cache, rc.eps_A);
    PointSet classes = static_classes(aubry, cache, rc.eps_class);

    int n_lp = std::min(rc.n, cfg.grid.dim == 1 ? 64 : 16);
    SolverConfig lcfg = make_solver_config(rc, model);
    lcfg.grid = GridSpec(cfg.grid.dim, n_lp);
    lcfg.c = cv.c;
    DiscreteMeasure mu = mather_lp(lcfg, model);
    PointSet mset = mather_set(mu);

    fs::create_directories(rc.out);
    aubry.write_csv(rc.out + "/aubry.csv");
    classes.write_csv(rc.out + "/classes.csv");
    mu.write_csv(rc.out + "/mather_measure.csv");
    mset.write_csv(rc.out + "/mather_set.csv");

    json extra;
    extra["c"] = cv.c;
    extra["aubry_size"] = aubry.size();
    extra["num_classes"] = classes.num_classes();
    extra["lp_value"] = mu.objective;
    extra["lp_plus_c"] = mu.objective + cv.c;
    extra["closedness_defect"] = mu.closedness_defect();
    double icd = min_interclass_distance(classes);
    if (std::isfinite(icd)) {
        extra["min_interclass_distance"] = icd;
        if (icd < 4.0 * cfg.grid.dx())
            extra["warning"] =
                "two classes sit within 4 dx; threshold clustering may differ "
                "from connectedness at this resolution";
    }
    write_manifest(rc.out, "aubry", rc, extra);
    std::printf("aubry nodes: %zu, classes: %d, LP value: %.6f (c = %.6f)\n",
                aubry.size(), classes.num_classes(), mu.objective, cv.c);
    return 0;
}

int cmd_barrier(const RunConfig& rc, double x0, double x1) {
    LagrangianModel model = build_model(rc.model_spec);
    SolverConfig cfg = make_solver_config(rc, model);
    CriticalValue cv = cached_critical(rc, model, cfg);
    cfg.c = cv.c;

    TorusPoint src = model.dim() == 1 ? TorusPoint(x0) : TorusPoint(x0, x1);
    Barrier bar = peierls_barrier(src, cfg, model);
    fs::create_directories(rc.out);
    bar.liminf.write_binary(rc.out + "/barrier.bin");
    bar.liminf.write_csv(rc.out + "/barrier.csv");
    {
        std::ofstream os(rc.out + "/barrier_horizons.csv");
        os.precision(17);
        os << "horizon,value_at_source\n";
        for (std::size_t k = 0; k < bar.horizons.size(); ++k)
            os << bar.horizons[k] << ',' << bar.per_horizon[k].v[bar.source_node]
               << '\n';
    }
    json extra;
    extra["c"] = cv.c;
    extra["source_node"] = bar.source_node;
    extra["self_value"] = bar.liminf.v[bar.source_node];
    extra["oscillation"] = bar.oscillation;
    extra["oscillation_flag"] = bar.oscillation_flag;
    write_manifest(rc.out, "barrier", rc, extra);
    std::printf("h_inf(x, x) = %.6f%s\n", bar.liminf.v[bar.source_node],
                bar.oscillation_flag ? " [oscillation flag raised]" : "");
    return 0;
}

GridField smooth_probe_field(const GridSpec& g, std::mt19937_64& rng,
                             double amplitude = 1.0, int max_modes = 4) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    constexpr double twopi = 6.283185307179586;
    GridField f(g);
    double a[4] = {0, 0, 0, 0}, p[4] = {0, 0, 0, 0};
    double b[4] = {0, 0, 0, 0}, q[4] = {0, 0, 0, 0};
    for (int k = 0; k < max_modes && k < 4; ++k) {
        a[k] = amplitude * U(rng);
        p[k] = twopi * U(rng);
        b[k] = amplitude * U(rng);
        q[k] = twopi * U(rng);
    }
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
        TorusPoint pt = g.node_point(idx);
        double s = 0.0;
        for (int k = 0; k < 4; ++k) {
            s += a[k] * std::cos(twopi * (k + 1) * pt[0] + p[k]);
            if (g.dim == 2) s += b[k] * std::cos(twopi * (k + 1) * pt[1] + q[k]);
        }
        f.v[idx] = s;
    }
    return f;
}

int cmd_check(const RunConfig& rc) {
    LagrangianModel model = build_model(rc.model_spec);
    bool all = true;
    std::mt19937_64 rng(rc.seed);
    auto report = [&](const std::string& name, bool pass, double margin,
                      double bound) {
        std::printf("%-24s %s  margin=%.6e bound=%.6e\n", name.c_str(),
                    pass ? "PASS" : "FAIL", margin, bound);
        all = all && pass;
    };

    SolverConfig base = make_solver_config(rc, model, 0.2);
    base.c = std::isnan(base.c) ? 0.0 : base.c;
    // the property suite needs c; cache or compute it once
    CriticalValue cv = cached_critical(rc, model, base);
    base.c = cv.c;

    // 1. semigroup law: two dt-steps vs one 2dt-step, probed in the
    // dt ~ dx scaling regime with curvature-bounded smooth fields
    {
        SolverConfig cfg1 = base;
        cfg1.dt = std::min(0.5 * base.grid.dx(), 0.25 / base.v_max);
        StepOperator op(model, cfg1);
        StepWeights one = backward_weights(cfg1.lambda, cfg1.dt);
        SolverConfig cfg2 = cfg1;
        cfg2.dt = 2.0 * cfg1.dt;
        StepOperator op2(model, cfg2);
        StepWeights two = backward_weights(base.lambda, cfg2.dt);
        double worst = 0.0;
        for (int rep = 0; rep < 5; ++rep) {
            GridField phi = smooth_probe_field(base.grid, rng, 0.2, 2);
            GridField twice =
                op.apply(op.apply(phi, one, false, base.c), one, false, base.c);
            GridField once = op2.apply(phi, two, false, base.c);
            worst = std::max(worst, GridField::sup_diff(twice, once));
        }
        double bound = 20.0 * cfg1.grid.dx() * cfg1.dt;
        report("semigroup_law", worst <= bound, worst, bound);
    }

    // 2. scaled nonexpansiveness (exact law for the discrete step)
    {
        StepOperator op(model, base);
        StepWeights wt = backward_weights(base.lambda, base.dt);
        const double factor = std::exp(base.lambda * base.dt);
        double worst = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            GridField a = smooth_probe_field(base.grid, rng);
            GridField b = smooth_probe_field(base.grid, rng);
            double lhs = GridField::sup_diff(op.apply(a, wt, false, base.c),
                                             op.apply(b, wt, false, base.c));
            double rhs = factor * GridField::sup_diff(a, b);
            worst = std::max(worst, lhs - rhs);
        }
        report("nonexpansiveness", worst <= 1e-12, worst, 1e-12);
    }

    // 3. monotonicity (exact law for the discrete step)
    {
        StepOperator op(model, base);
        StepWeights wt = backward_weights(base.lambda, base.dt);
        double worst = -1e300;
        for (int rep = 0; rep < 50; ++rep) {
            GridField lo = smooth_probe_field(base.grid, rng);
            GridField bump = smooth_probe_field(base.grid, rng);
            GridField hi = lo;
            for (std::size_t i = 0; i < hi.v.size(); ++i)
                hi.v[i] += std::fabs(bump.v[i]);
            GridField slo = op.apply(lo, wt, false, base.c);
            GridField shi = op.apply(hi, wt, false, base.c);
            for (std::size_t i = 0; i < slo.v.size(); ++i)
                worst = std::max(worst, slo.v[i] - shi.v[i]);
        }
        report("monotonicity", worst <= 1e-12, worst, 1e-12);
    }

    // 4. equi-Lipschitz output after one unit of time
    {
        const double kappa = model.lipschitz_kappa();
        double worst = 0.0;
        for (double lambda : {1.0, 0.4, 0.1}) {
            SolverConfig cfg = base;
            cfg.lambda = lambda;
            StepOperator op(model, cfg);
            StepWeights wt = backward_weights(lambda, cfg.dt);
            GridField phi = smooth_probe_field(cfg.grid, rng);
            long steps = static_cast<long>(std::ceil(1.0 / cfg.dt));
            for (long k = 0; k < steps; ++k) phi = op.apply(phi, wt, false, cfg.c);
            worst = std::max(worst, phi.discrete_lipschitz());
        }
        report("lipschitz_bound", worst <= kappa, worst, kappa);
    }

    // 5. ground-state ordering across the schedule
    {
        double worst = -1e300;
        for (double lambda : rc.schedule) {
            SolverConfig cfg = base;
            cfg.lambda = lambda;
            GridField up = forward_solution(cfg, model);
            GridField um = ground_state(up, cfg, model);
            for (std::size_t i = 0; i < um.v.size(); ++i)
                worst = std::max(worst, up.v[i] - um.v[i]);
        }
        double bound = 2.0 * base.grid.dx();
        report("ground_ordering", worst <= bound, worst, bound);
    }

    // 6. domination along random straight segments (trapezoid quadrature)
    {
        SolverConfig cfg = base;
        cfg.lambda = 0.2;
        GridField um = ground_state(forward_solution(cfg, model), cfg, model);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double worst = -1e300;
        for (int rep = 0; rep < 100; ++rep) {
            TorusPoint x0 = model.dim() == 1 ? TorusPoint(U(rng))
                                             : TorusPoint(U(rng), U(rng));
            Vec d;
            d.dim = model.dim();
            for (int k = 0; k < model.dim(); ++k) d[k] = 2.0 * U(rng) - 1.0;
            const int sub = 64;
            double integral = 0.0;
            for (int s = 0; s <= sub; ++s) {
                double tau = static_cast<double>(s) / sub;
                TorusPoint xt = x0.advanced(d, tau);
                double f = std::exp(-cfg.lambda * tau) *
                           (model.lagrangian(xt, d) + cfg.c);
                integral += (s == 0 || s == sub ? 0.5 : 1.0) * f / sub;
            }
            TorusPoint x1 = x0.advanced(d, 1.0);
            double lhs = std::exp(-cfg.lambda) * um.interp(x1) - um.interp(x0);
            worst = std::max(worst, lhs - integral);
        }
        double bound = 5.0 * base.grid.dx();
        report("domination", worst <= bound, worst, bound);
    }

    return all ? 0 : 3;
}

int cmd_plot(const std::string& dir) {
    if (!fs::exists(dir)) {
        std::fprintf(stderr, "result directory not found: %s\n", dir.c_str());
        return 1;
    }
    std::vector<std::string> umfiles, gfiles;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string name = e.path().filename().string();
        if (name.rfind("u_minus_", 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".csv")
            umfiles.push_back(name);
        if (name.rfind("g_lambda_", 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".csv")
            gfiles.push_back(name);
    }
    bool have_barrier = fs::exists(dir + "/barrier.csv");
    if (umfiles.empty() && gfiles.empty() && !have_barrier &&
        !fs::exists(dir + "/u_minus.bin")) {
        std::fprintf(stderr, "no plottable files in %s\n", dir.c_str());
        return 1;
    }
    std::sort(umfiles.begin(), umfiles.end());
    std::sort(gfiles.begin(), gfiles.end());

    // d=2 fields become n x n matrix files rendered as heatmaps
    std::vector<std::string> heatmaps;
    for (const char* base : {"u_minus", "barrier"}) {
        std::string bin = dir + "/" + base + ".bin";
        if (!fs::exists(bin)) continue;
        GridField f = GridField::read_binary(bin);
        if (f.grid.dim != 2) continue;
        std::string datname = std::string(base) + "_heatmap.dat";
        std::ofstream hm(dir + "/" + datname);
        hm.precision(17);
        for (int i = 0; i < f.grid.n; ++i) {
            for (int j = 0; j < f.grid.n; ++j) {
                hm << f.v[f.grid.index(i, j)];
                hm << (j + 1 == f.grid.n ? '\n' : ' ');
            }
        }
        heatmaps.push_back(datname);
    }

    std::ofstream os(dir + "/plot.gp");
    os << "set datafile separator ','\n";
    os << "set key outside\n";
    for (const std::string& hmf : heatmaps) {
        os << "set terminal pngcairo size 700,600\nset output '" << hmf
           << ".png'\nset datafile separator whitespace\n";
        os << "plot '" << hmf << "' matrix with image notitle\n";
        os << "set datafile separator ','\n";
    }
    if (!umfiles.empty()) {
        os << "set terminal pngcairo size 900,600\nset output 'u_fields.png'\n";
        os << "plot ";
        for (std::size_t k = 0; k < umfiles.size(); ++k) {
            os << "'" << umfiles[k] << "' using 2:3 with lines title '" << umfiles[k]
               << "'";
            std::string up = "u_plus" + umfiles[k].substr(7);
            if (fs::exists(dir + "/" + up))
                os << ", '" << up << "' using 2:3 with lines dashtype 2 title '" << up
                   << "'";
            if (k + 1 < umfiles.size()) os << ", ";
        }
        os << "\n";
    }
    if (have_barrier) {
        os << "set output 'barrier.png'\n";
        os << "plot 'barrier.csv' using 2:3 with lines title 'h_inf'\n";
    }
    if (!gfiles.empty()) {
        os << "set output 'g_lambda.png'\n";
        os << "plot ";
        for (std::size_t k = 0; k < gfiles.size(); ++k) {
            os << "'" << gfiles[k] << "' using 1:2 with points title '" << gfiles[k]
               << "'";
            if (k + 1 < gfiles.size()) os << ", ";
        }
        os << "\n";
    }
    std::printf("wrote %s/plot.gp\n", dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical weak-KAM laboratory on flat tori"};
    app.require_subcommand(1);

    std::string config_path, out_override, plot_dir;
    double lambda = -1.0;
    int threads = 0, grid_override = 0;
    double src_x = 0.0, src_y = 0.0;

    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_override, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");
    app.add_option("--grid", grid_override, "nodes per dimension");

    auto* c_crit = app.add_subcommand("critical", "estimate the critical value");
    auto* c_solve = app.add_subcommand("solve", "solve one discounted problem");
    c_solve->add_option("--lambda", lambda, "discount rate")->required();
    auto* c_sweep = app.add_subcommand("sweep", "vanishing-discount pipeline");
    auto* c_aubry = app.add_subcommand("aubry", "Aubry set, classes, Mather LP");
    auto* c_barrier = app.add_subcommand("barrier", "Peierls barrier from a source");
    c_barrier->add_option("--x", src_x, "source x coordinate");
    c_barrier->add_option("--y", src_y, "source y coordinate (d=2)");
    auto* c_check = app.add_subcommand("check", "operator property suite");
    auto* c_plot = app.add_subcommand("plot", "emit gnuplot script for a result dir");
    c_plot->add_option("dir", plot_dir, "result directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig rc = load_config(config_path);
        if (!out_override.empty()) rc.out = out_override;
        if (grid_override > 0) rc.n = grid_override;
        if (threads > 0) rc.threads = threads;
        if (rc.threads > 0) set_worker_count(rc.threads);

        if (c_crit->parsed()) return cmd_critical(rc);
        if (c_solve->parsed()) return cmd_solve(rc, lambda);
        if (c_sweep->parsed()) return cmd_sweep(rc);
        if (c_aubry->parsed()) return cmd_aubry(rc);
        if (c_barrier->parsed()) return cmd_barrier(rc, src_x, src_y);
        if (c_check->parsed()) return cmd_check(rc);
        if (c_plot->parsed()) return cmd_plot(plot_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const ModelError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const GridError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 2;
    }
    return 0;
}
