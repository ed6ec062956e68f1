#include "wkam/action.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "wkam/solver.hpp"

namespace wkam {

namespace {

std::size_t snap_to_node(const GridSpec& g, const TorusPoint& p) {
    if (g.dim == 1) {
        int i = g.wrap_index(static_cast<long>(std::lround(p[0] * g.n)));
        return static_cast<std::size_t>(i);
    }
    int i = g.wrap_index(static_cast<long>(std::lround(p[0] * g.n)));
    int j = g.wrap_index(static_cast<long>(std::lround(p[1] * g.n)));
    return g.index(i, j);
}

}  // namespace

const GridField& ActionTable::field_for(double t) const {
    for (std::size_t k = 0; k < horizons.size(); ++k)
        if (std::fabs(horizons[k] - t) <= 0.5 * dt) return fields[k];
    throw SolverError("action table does not contain the requested horizon");
}

void ActionTable::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw SolverError("cannot open for writing: " + path);
    os.precision(17);
    const GridSpec& g = fields.front().grid;
    os << (g.dim == 1 ? "t,y,value\n" : "t,y0,y1,value\n");
    for (std::size_t k = 0; k < horizons.size(); ++k)
        for (std::size_t i = 0; i < fields[k].v.size(); ++i) {
            TorusPoint p = g.node_point(i);
            os << horizons[k] << ',';
            for (int d = 0; d < g.dim; ++d) os << p[d] << ',';
            os << fields[k].v[i] << '\n';
        }
}

ActionTable finite_action_multi(const TorusPoint& x,
                                const std::vector<double>& horizons,
                                const SolverConfig& cfg,
                                const LagrangianModel& model, bool store_policy) {
    if (horizons.empty()) throw SolverError("finite_action: no horizons");
    for (double t : horizons)
        if (t < cfg.dt) throw SolverError("finite_action: horizon below dt");
    if (std::isnan(cfg.c)) throw SolverError("finite_action: c must be set");

    // uniform sub-steps reaching the largest horizon exactly; this keeps the
    // step grid identical to the one discounted_action uses
    const double t_max = *std::max_element(horizons.begin(), horizons.end());
    const long total = static_cast<long>(std::ceil(t_max / cfg.dt - 1e-12));
    const double h = t_max / static_cast<double>(total);

    SolverConfig local = cfg;
    local.dt = h;
    StepOperator op(model, local);
    const StepWeights wt = backward_weights(0.0, h);  // undiscounted

    ActionTable table;
    table.source_node = snap_to_node(cfg.grid, x);
    table.source = cfg.grid.node_point(table.source_node);
    table.dt = h;
    table.lambda = 0.0;
    table.has_policy = store_policy;

    std::vector<long> steps_at;
    for (double t : horizons)
        steps_at.push_back(static_cast<long>(std::lround(t / h)));

    // The first step from a point source is evaluated in closed form: only
    // curves landing exactly on the source node have finite cost, and within
    // one step only the shortest displacement representative is reachable.
    // (The d=2 lattice search cannot produce exact two-dimensional node
    // landings, so interpolating the BIG background would poison the table.)
    GridField phi(cfg.grid, kBigActionCost);
    phi.meta.c = cfg.c;
    const TorusPoint src = table.source;
    std::vector<double> pol0(cfg.grid.node_count() * cfg.grid.dim, 0.0);
    for (std::size_t idx = 0; idx < cfg.grid.node_count(); ++idx) {
        TorusPoint y = cfg.grid.node_point(idx);
        Vec v;
        v.dim = cfg.grid.dim;
        for (int d = 0; d < cfg.grid.dim; ++d)
            v[d] = torus_delta(src[d], y[d]) / h;
        if (v.norm() <= cfg.v_max) {
            phi.v[idx] = wt.run_cost * (model.lagrangian(y, v) + cfg.c);
            for (int d = 0; d < cfg.grid.dim; ++d)
                pol0[idx * cfg.grid.dim + d] = v[d];
        }
    }
    if (store_policy) table.policy.push_back(pol0);
    for (std::size_t hz = 0; hz < steps_at.size(); ++hz) {
        if (steps_at[hz] == 1) {
            table.horizons.push_back(h);
            table.horizon_steps.push_back(1);
            GridField snap = phi;
            snap.meta.c = cfg.c;
            snap.meta.iterations = 1;
            table.fields.push_back(snap);
        }
    }

    std::vector<double> pol;
    for (long k = 2; k <= total; ++k) {
        GridField next = op.apply(phi, wt, false, cfg.c,
                                  store_policy ? &pol : nullptr);
        if (store_policy) table.policy.push_back(pol);
        phi.v.swap(next.v);
        for (std::size_t hz = 0; hz < steps_at.size(); ++hz) {
            if (steps_at[hz] == k) {
                table.horizons.push_back(static_cast<double>(k) * h);
                table.horizon_steps.push_back(k);
                GridField snap = phi;
                snap.meta.c = cfg.c;
                snap.meta.iterations = k;
                table.fields.push_back(std::move(snap));
            }
        }
    }
    return table;
}

ActionTable finite_action(const TorusPoint& x, double t, const SolverConfig& cfg,
                          const LagrangianModel& model, bool store_policy) {
    return finite_action_multi(x, {t}, cfg, model, store_policy);
}

double discounted_action(const TorusPoint& x, const TorusPoint& y, double a,
                         double b, double lambda, const SolverConfig& cfg,
                         const LagrangianModel& model) {
    if (a >= b) throw SolverError("discounted_action: requires a < b");
    if (std::isnan(cfg.c)) throw SolverError("discounted_action: c must be set");
    const long steps = static_cast<long>(std::ceil((b - a) / cfg.dt - 1e-12));
    const double h = (b - a) / static_cast<double>(steps);

    SolverConfig local = cfg;
    local.dt = h;
    StepOperator op(model, local);

    GridField phi(cfg.grid, kBigActionCost);
    const std::size_t src = snap_to_node(cfg.grid, x);
    phi.v[src] = 0.0;

    for (long k = 0; k < steps; ++k) {
        const double t0 = a + static_cast<double>(k) * h;
        const double t1 = t0 + h;
        StepWeights wt;
        wt.field_factor = 1.0;  // absolute discounting carried by run_cost
        wt.run_cost = lambda > 0.0
                          ? (std::exp(-lambda * t0) - std::exp(-lambda * t1)) / lambda
                          : h;
        GridField next = op.apply(phi, wt, false, cfg.c);
        phi.v.swap(next.v);
    }
    return phi.interp(y);
}

Barrier peierls_barrier(const TorusPoint& x, const SolverConfig& cfg,
                        const LagrangianModel& model, double T) {
    std::vector<double> horizons;
    for (double t = T / 2.0; t <= T + 1e-9; t += 1.0) horizons.push_back(t);
    ActionTable table = finite_action_multi(x, horizons, cfg, model, false);

    Barrier bar;
    bar.source = table.source;
    bar.source_node = table.source_node;
    bar.horizons = table.horizons;
    bar.per_horizon = table.fields;
    bar.liminf = table.fields.front();
    for (std::size_t h = 1; h < table.fields.size(); ++h)
        for (std::size_t i = 0; i < bar.liminf.v.size(); ++i)
            bar.liminf.v[i] = std::min(bar.liminf.v[i], table.fields[h].v[i]);

    double osc = 0.0;
    for (std::size_t i = 0; i < bar.liminf.v.size(); ++i) {
        double lo = 1e300, hi = -1e300;
        for (const auto& f : table.fields) {
            lo = std::min(lo, f.v[i]);
            hi = std::max(hi, f.v[i]);
        }
        if (hi < kBigActionCost / 2) osc = std::max(osc, hi - lo);
    }
    bar.oscillation = osc;
    bar.oscillation_flag = osc > 5.0 * cfg.grid.dx();
    bar.liminf.meta.c = cfg.c;
    return bar;
}

Trajectory backtrack_minimizer(const ActionTable& table, const TorusPoint& y,
                               double horizon) {
    if (!table.has_policy)
        throw SolverError("backtrack_minimizer: table has no stored policy");
    long steps = -1;
    for (std::size_t k = 0; k < table.horizons.size(); ++k)
        if (std::fabs(table.horizons[k] - horizon) <= 0.5 * table.dt)
            steps = table.horizon_steps[k];
    if (steps < 0)
        throw SolverError("backtrack_minimizer: horizon not in table");

    const GridSpec& g = table.fields.front().grid;
    const int dim = g.dim;
    Trajectory traj;
    traj.lambda = table.lambda;

    // interpolate the per-node argmin velocities at off-node positions
    auto policy_at = [&](const std::vector<double>& pol, const TorusPoint& p) {
        Vec v;
        v.dim = dim;
        const int n = g.n;
        if (dim == 1) {
            double s = wrap_unit(p[0]) * n;
            int i0 = static_cast<int>(s);
            if (i0 >= n) i0 = 0;
            double th = s - i0;
            int i1 = i0 + 1 == n ? 0 : i0 + 1;
            v[0] = (1.0 - th) * pol[static_cast<std::size_t>(i0)] +
                   th * pol[static_cast<std::size_t>(i1)];
            return v;
        }
        double s0 = wrap_unit(p[0]) * n, s1 = wrap_unit(p[1]) * n;
        int i0 = static_cast<int>(s0), j0 = static_cast<int>(s1);
        if (i0 >= n) i0 = 0;
        if (j0 >= n) j0 = 0;
        double a = s0 - i0, b = s1 - j0;
        int i1 = i0 + 1 == n ? 0 : i0 + 1;
        int j1 = j0 + 1 == n ? 0 : j0 + 1;
        for (int d = 0; d < 2; ++d) {
            double v00 = pol[g.index(i0, j0) * 2 + static_cast<std::size_t>(d)];
            double v01 = pol[g.index(i0, j1) * 2 + static_cast<std::size_t>(d)];
            double v10 = pol[g.index(i1, j0) * 2 + static_cast<std::size_t>(d)];
            double v11 = pol[g.index(i1, j1) * 2 + static_cast<std::size_t>(d)];
            v[d] = (1 - a) * ((1 - b) * v00 + b * v01) +
                   a * ((1 - b) * v10 + b * v11);
        }
        return v;
    };

    TorusPoint p = y;
    std::vector<Trajectory::Sample> rev;
    for (long k = steps; k >= 1; --k) {
        const std::vector<double>& pol = table.policy[static_cast<std::size_t>(k - 1)];
        Vec v = policy_at(pol, p);
        rev.push_back({static_cast<double>(k) * table.dt, p, v});
        TorusPoint prev = p;
        for (int d = 0; d < dim; ++d)
            prev.x[static_cast<std::size_t>(d)] =
                wrap_unit(p[d] - v[d] * table.dt);
        prev.dim = dim;
        p = prev;
    }
    // leading sample carries the first step velocity
    Vec v0 = rev.empty() ? Vec{} : rev.back().v;
    v0.dim = dim;
    traj.samples.push_back({0.0, p, v0});
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) traj.samples.push_back(*it);
    return traj;
}

Trajectory backtrack_minimizer(const ActionTable& table, const TorusPoint& y) {
    return backtrack_minimizer(table, y, table.horizons.back());
}

Trajectory el_flow(const TorusPoint& x0, const Vec& v0, double lambda,
                   double horizon, const LagrangianModel& model, double step_hint) {
    if (!model.is_mechanical())
        throw SolverError("el_flow: mechanical families only");
    if (horizon <= 0.0) throw SolverError("el_flow: horizon must be positive");
    const int dim = model.dim();
    const double h = std::min(step_hint, 1e-2);
    const long steps = static_cast<long>(std::ceil(horizon / h - 1e-12));
    const double hs = horizon / static_cast<double>(steps);

    auto accel = [&](const std::array<double, kMaxDim>& xu, const Vec& v) {
        TorusPoint p = dim == 1 ? TorusPoint(xu[0]) : TorusPoint(xu[0], xu[1]);
        Vec w = model.drift(p);
        Vec gU = model.potential_total_grad(p);
        auto J = model.drift_spec().jacobian(p, dim);
        Vec a;
        a.dim = dim;
        for (int i = 0; i < dim; ++i) {
            double s = lambda * (v[i] - w[i]) - gU[i];
            for (int k = 0; k < dim; ++k) {
                s += J[static_cast<std::size_t>(i * kMaxDim + k)] * v[k];
                s -= J[static_cast<std::size_t>(k * kMaxDim + i)] * (v[k] - w[k]);
            }
            a[i] = s;
        }
        return a;
    };

    Trajectory traj;
    traj.lambda = lambda;
    std::array<double, kMaxDim> x{x0[0], dim == 2 ? x0[1] : 0.0};
    Vec v = v0;
    v.dim = dim;
    auto record = [&](double t) {
        TorusPoint p = dim == 1 ? TorusPoint(x[0]) : TorusPoint(x[0], x[1]);
        traj.samples.push_back({t, p, v});
    };
    record(0.0);
    for (long k = 0; k < steps; ++k) {
        // classical RK4 on (x, v)
        std::array<double, kMaxDim> k1x{}, k2x{}, k3x{}, k4x{}, xt{};
        Vec k1v = accel(x, v), k2v, k3v, k4v, vt;
        for (int i = 0; i < dim; ++i) k1x[static_cast<std::size_t>(i)] = v[i];

        vt = v;
        for (int i = 0; i < dim; ++i) {
            xt[static_cast<std::size_t>(i)] =
                x[static_cast<std::size_t>(i)] + 0.5 * hs * k1x[static_cast<std::size_t>(i)];
            vt[i] = v[i] + 0.5 * hs * k1v[i];
        }
        k2v = accel(xt, vt);
        for (int i = 0; i < dim; ++i) k2x[static_cast<std::size_t>(i)] = vt[i];

        for (int i = 0; i < dim; ++i) {
            xt[static_cast<std::size_t>(i)] =
                x[static_cast<std::size_t>(i)] + 0.5 * hs * k2x[static_cast<std::size_t>(i)];
            vt[i] = v[i] + 0.5 * hs * k2v[i];
        }
        k3v = accel(xt, vt);
        for (int i = 0; i < dim; ++i) k3x[static_cast<std::size_t>(i)] = vt[i];

        for (int i = 0; i < dim; ++i) {
            xt[static_cast<std::size_t>(i)] =
                x[static_cast<std::size_t>(i)] + hs * k3x[static_cast<std::size_t>(i)];
            vt[i] = v[i] + hs * k3v[i];
        }
        k4v = accel(xt, vt);
        for (int i = 0; i < dim; ++i) k4x[static_cast<std::size_t>(i)] = vt[i];

        for (int i = 0; i < dim; ++i) {
            x[static_cast<std::size_t>(i)] +=
                hs / 6.0 *
                (k1x[static_cast<std::size_t>(i)] + 2 * k2x[static_cast<std::size_t>(i)] +
                 2 * k3x[static_cast<std::size_t>(i)] + k4x[static_cast<std::size_t>(i)]);
            v[i] += hs / 6.0 * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i]);
        }
        record(static_cast<double>(k + 1) * hs);
    }
    return traj;
}

void Trajectory::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw SolverError("cannot open for writing: " + path);
    os.precision(17);
    const int dim = samples.empty() ? 1 : samples.front().x.dim;
    os << "t";
    for (int d = 0; d < dim; ++d) os << ",x" << d;
    for (int d = 0; d < dim; ++d) os << ",v" << d;
    os << '\n';
    for (const auto& s : samples) {
        os << s.t;
        for (int d = 0; d < dim; ++d) os << ',' << s.x[d];
        for (int d = 0; d < dim; ++d) os << ',' << s.v[d];
        os << '\n';
    }
}

}  // namespace wkam
