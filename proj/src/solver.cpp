#include "wkam/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "wkam/parallel.hpp"

namespace wkam {

StepWeights backward_weights(double lambda, double dt) {
    StepWeights w;
    if (lambda > 0.0) {
        w.field_factor = std::exp(lambda * dt);
        w.run_cost = (std::exp(lambda * dt) - 1.0) / lambda;
    } else {
        w.field_factor = 1.0;
        w.run_cost = dt;
    }
    return w;
}

StepWeights forward_weights(double lambda, double dt) {
    StepWeights w;
    if (lambda > 0.0) {
        w.field_factor = std::exp(-lambda * dt);
        w.run_cost = (1.0 - std::exp(-lambda * dt)) / lambda;
    } else {
        w.field_factor = 1.0;
        w.run_cost = dt;
    }
    return w;
}

StepOperator::StepOperator(const LagrangianModel& model, const SolverConfig& cfg)
    : model_(model), cfg_(cfg), mech_(model.is_mechanical()) {
    cfg_.validate();
    if (model.dim() != cfg_.grid.dim)
        throw SolverError("model/grid dimension mismatch");
    const std::size_t count = cfg_.grid.node_count();
    U_.resize(count);
    omega_.resize(count * model.dim(), 0.0);
    for (std::size_t idx = 0; idx < count; ++idx) {
        TorusPoint x = cfg_.grid.node_point(idx);
        if (mech_) {
            U_[idx] = model.potential_total(x);
            Vec w = model.drift(x);
            for (int k = 0; k < model.dim(); ++k)
                omega_[idx * model.dim() + k] = w[k];
        } else {
            Vec zero;
            zero.dim = model.dim();
            U_[idx] = -model.lagrangian(x, zero);
        }
    }
}

namespace {

inline double clampd(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

// strictly convex 1-d minimization by bisection on the derivative
double piece_min_custom(const LagrangianModel& model, const TorusPoint& x,
                        double s, double EB, double w, double vl, double vr,
                        double& vout) {
    auto qp = [&](double v) {
        Vec vv(s * v);
        return EB + w * s * model.dL_dv(x, vv)[0];
    };
    double lo = vl, hi = vr;
    if (qp(lo) >= 0.0) {
        vout = vl;
    } else if (qp(hi) <= 0.0) {
        vout = vr;
    } else {
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (qp(mid) < 0.0 ? lo : hi) = mid;
        }
        vout = 0.5 * (lo + hi);
    }
    return 0.0;  // caller evaluates the objective
}

}  // namespace

void StepOperator::minimize_node_1d(std::size_t i, const std::vector<double>& phi,
                                    double phi_min, const StepWeights& wt,
                                    bool reversed, double c, double& best,
                                    double& best_v) const {
    const double dx = cfg_.grid.dx();
    const double a = cfg_.dt / dx;  // grid cells per unit velocity
    const double vmax = cfg_.v_max;
    const double E = wt.field_factor, w = wt.run_cost;
    const double Ui = U_[i];
    const double s = reversed ? -1.0 : 1.0;
    const double om = mech_ ? s * omega_[i] : 0.0;

    best = std::numeric_limits<double>::infinity();
    best_v = 0.0;

    const double gspan = a * vmax;
    const long klo = static_cast<long>(std::floor(static_cast<double>(i) - gspan));
    const long khi = static_cast<long>(std::floor(static_cast<double>(i) + gspan));

    TorusPoint xpt;
    if (!mech_) xpt = cfg_.grid.node_point(i);

    auto eval_piece = [&](long k) {
        double vl = (static_cast<double>(static_cast<long>(i) - k) - 1.0) / a;
        double vr = static_cast<double>(static_cast<long>(i) - k) / a;
        vl = std::max(vl, -vmax);
        vr = std::min(vr, vmax);
        if (vl > vr) return;
        const double phik = phi[static_cast<std::size_t>(cfg_.grid.wrap_index(k))];
        const double phik1 =
            phi[static_cast<std::size_t>(cfg_.grid.wrap_index(k + 1))];
        const double slope = phik1 - phik;
        const double B = -a * slope;
        double vc;
        if (mech_) {
            vc = w > 0.0 ? clampd(om - E * B / w, vl, vr) : clampd(om, vl, vr);
        } else {
            piece_min_custom(model_, xpt, s, E * B, w, vl, vr, vc);
        }
        const double g = static_cast<double>(i) - a * vc;
        const double th = g - static_cast<double>(k);
        const double ival = phik + th * slope;
        double run;
        if (mech_) {
            const double d = vc - om;
            run = 0.5 * d * d - Ui + c;
        } else {
            run = model_.lagrangian(xpt, Vec(s * vc)) + c;
        }
        const double J = E * ival + w * run;
        if (J < best) {
            best = J;
            best_v = vc;
        }
    };

    if (!mech_) {
        for (long k = klo; k <= khi; ++k) eval_piece(k);
        return;
    }

    // scan outward from the piece containing v = om; the kinetic lower
    // bound increases monotonically in each direction
    long kc = static_cast<long>(std::floor(static_cast<double>(i) - a * om));
    kc = std::max(klo, std::min(khi, kc));
    eval_piece(kc);
    const double base = w * (-Ui + c) + E * phi_min;
    for (long k = kc - 1; k >= klo; --k) {
        // pieces below kc have velocities above om
        double vlow = static_cast<double>(static_cast<long>(i) - k - 1) / a;
        double dmin = std::max(0.0, vlow - om);
        if (base + 0.5 * w * dmin * dmin >= best) break;
        eval_piece(k);
    }
    for (long k = kc + 1; k <= khi; ++k) {
        double vhigh = static_cast<double>(static_cast<long>(i) - k) / a;
        double dmin = std::max(0.0, om - vhigh);
        if (base + 0.5 * w * dmin * dmin >= best) break;
        eval_piece(k);
    }
}

void StepOperator::minimize_node_2d_scan(std::size_t idx, const GridField& phi,
                                         const StepWeights& wt, bool reversed,
                                         double c, double& best, double bv[2]) const {
    const int n = cfg_.grid.n;
    const double dx = cfg_.grid.dx();
    const double dt = cfg_.dt, vmax = cfg_.v_max;
    const double E = wt.field_factor, w = wt.run_cost;
    const int m = cfg_.vel_lattice_m;
    const double s = reversed ? -1.0 : 1.0;
    const double om0 = s * omega_[idx * 2], om1 = s * omega_[idx * 2 + 1];
    const double Ui = U_[idx];
    const double x0 = static_cast<double>(idx / static_cast<std::size_t>(n)) * dx;
    const double x1 = static_cast<double>(idx % static_cast<std::size_t>(n)) * dx;
    TorusPoint xpt;
    if (!mech_) xpt = cfg_.grid.node_point(idx);

    for (int p = 0; p < m; ++p) {
        double v0 = -vmax + 2.0 * vmax * p / (m - 1);
        for (int q = 0; q < m; ++q) {
            double v1 = -vmax + 2.0 * vmax * q / (m - 1);
            double foot[2] = {x0 - v0 * dt, x1 - v1 * dt};
            double ival = phi.interp(foot);
            double run;
            if (mech_) {
                double d0 = v0 - om0, d1 = v1 - om1;
                run = 0.5 * (d0 * d0 + d1 * d1) - Ui + c;
            } else {
                Vec vv(s * v0, s * v1);
                run = model_.lagrangian(xpt, vv) + c;
            }
            double J = E * ival + w * run;
            if (J < best) {
                best = J;
                bv[0] = v0;
                bv[1] = v1;
            }
        }
    }
}

void StepOperator::line_min_2d(std::size_t idx, const GridField& phi,
                               const StepWeights& wt, bool reversed, double c,
                               int dim_along, double& best, double bv[2]) const {
    const int n = cfg_.grid.n;
    const double dx = cfg_.grid.dx();
    const double a = cfg_.dt / dx;
    const double vmax = cfg_.v_max;
    const double E = wt.field_factor, w = wt.run_cost;
    const double s = reversed ? -1.0 : 1.0;
    const double Ui = U_[idx];
    const int i0 = static_cast<int>(idx / static_cast<std::size_t>(n));
    const int i1 = static_cast<int>(idx % static_cast<std::size_t>(n));
    const int ia = dim_along == 0 ? i0 : i1;      // index along the line
    const int ifx = dim_along == 0 ? i1 : i0;     // fixed-dimension index
    const double om_a = s * omega_[idx * 2 + dim_along];
    const double om_f = s * omega_[idx * 2 + (1 - dim_along)];
    const double v_f = bv[1 - dim_along];

    // blend the two rows bracketing the fixed-coordinate foot point
    const double foot_f = wrap_unit(static_cast<double>(ifx) * dx - v_f * cfg_.dt);
    double sf = foot_f * n;
    int j0 = static_cast<int>(sf);
    if (j0 >= n) j0 = 0;
    const double th_f = sf - j0;
    const int j1 = j0 + 1 == n ? 0 : j0 + 1;

    auto row_value = [&](int k) {
        int kk = cfg_.grid.wrap_index(k);
        std::size_t a0, a1;
        if (dim_along == 0) {
            a0 = phi.grid.index(kk, j0);
            a1 = phi.grid.index(kk, j1);
        } else {
            a0 = phi.grid.index(j0, kk);
            a1 = phi.grid.index(j1, kk);
        }
        return (1.0 - th_f) * phi.v[a0] + th_f * phi.v[a1];
    };

    const double dfix = v_f - om_f;
    const double run_fixed = 0.5 * dfix * dfix - Ui + c;

    const double gspan = a * vmax;
    const long klo = static_cast<long>(std::floor(static_cast<double>(ia) - gspan));
    const long khi = static_cast<long>(std::floor(static_cast<double>(ia) + gspan));
    for (long k = klo; k <= khi; ++k) {
        double vl = (static_cast<double>(static_cast<long>(ia) - k) - 1.0) / a;
        double vr = static_cast<double>(static_cast<long>(ia) - k) / a;
        vl = std::max(vl, -vmax);
        vr = std::min(vr, vmax);
        if (vl > vr) continue;
        const double phik = row_value(static_cast<int>(k));
        const double phik1 = row_value(static_cast<int>(k + 1));
        const double slope = phik1 - phik;
        const double B = -a * slope;
        double vc = clampd(om_a - E * B / w, vl, vr);
        const double g = static_cast<double>(ia) - a * vc;
        const double th = g - static_cast<double>(k);
        const double ival = phik + th * slope;
        const double da = vc - om_a;
        const double J = E * ival + w * (run_fixed + 0.5 * da * da);
        if (J < best) {
            best = J;
            bv[dim_along] = vc;
        }
    }
}

GridField StepOperator::apply(const GridField& phi, const StepWeights& wt,
                              bool reversed, double c,
                              std::vector<double>* policy_out) const {
    if (!(phi.grid == cfg_.grid)) throw SolverError("step: grid mismatch");
    GridField out(cfg_.grid);
    out.meta = phi.meta;
    const std::size_t count = cfg_.grid.node_count();
    if (policy_out) policy_out->assign(count * cfg_.grid.dim, 0.0);
    const double phi_min = phi.min_value();

    if (cfg_.grid.dim == 1) {
        parallel_for(count, [&](std::size_t b, std::size_t e, int) {
            for (std::size_t i = b; i < e; ++i) {
                double best, bv;
                minimize_node_1d(i, phi.v, phi_min, wt, reversed, c, best, bv);
                out.v[i] = best;
                if (policy_out) (*policy_out)[i] = bv;
            }
        });
        return out;
    }

    parallel_for(count, [&](std::size_t b, std::size_t e, int) {
        for (std::size_t idx = b; idx < e; ++idx) {
            double best = std::numeric_limits<double>::infinity();
            double bv[2] = {0.0, 0.0};
            minimize_node_2d_scan(idx, phi, wt, reversed, c, best, bv);
            for (int r = 0; r < cfg_.refine_rounds; ++r) {
                line_min_2d(idx, phi, wt, reversed, c, 0, best, bv);
                line_min_2d(idx, phi, wt, reversed, c, 1, best, bv);
            }
            out.v[idx] = best;
            if (policy_out) {
                (*policy_out)[idx * 2] = bv[0];
                (*policy_out)[idx * 2 + 1] = bv[1];
            }
        }
    });
    return out;
}

GridField StepOperator::apply_warm(const GridField& phi, const StepWeights& wt,
                                   bool reversed, double c,
                                   std::vector<double>& warm,
                                   bool full_scan) const {
    if (cfg_.grid.dim == 1) return apply(phi, wt, reversed, c, &warm);
    if (!(phi.grid == cfg_.grid)) throw SolverError("step: grid mismatch");
    const std::size_t count = cfg_.grid.node_count();
    if (warm.size() != count * 2) {
        warm.assign(count * 2, 0.0);
        full_scan = true;
    }
    GridField out(cfg_.grid);
    out.meta = phi.meta;
    parallel_for(count, [&](std::size_t b, std::size_t e, int) {
        for (std::size_t idx = b; idx < e; ++idx) {
            double best = std::numeric_limits<double>::infinity();
            double bv[2] = {warm[idx * 2], warm[idx * 2 + 1]};
            if (full_scan) {
                minimize_node_2d_scan(idx, phi, wt, reversed, c, best, bv);
            } else {
                // keep the previous argmin as a candidate line seed
                line_min_2d(idx, phi, wt, reversed, c, 0, best, bv);
            }
            for (int r = 0; r < cfg_.refine_rounds; ++r) {
                line_min_2d(idx, phi, wt, reversed, c, 0, best, bv);
                line_min_2d(idx, phi, wt, reversed, c, 1, best, bv);
            }
            out.v[idx] = best;
            warm[idx * 2] = bv[0];
            warm[idx * 2 + 1] = bv[1];
        }
    });
    return out;
}

GridField backward_step(const GridField& phi, const SolverConfig& cfg,
                        const LagrangianModel& model) {
    StepOperator op(model, cfg);
    GridField out =
        op.apply(phi, backward_weights(cfg.lambda, cfg.dt), false, cfg.c);
    if (!out.all_finite()) {
        for (std::size_t i = 0; i < out.v.size(); ++i)
            if (!std::isfinite(out.v[i]))
                throw SolverError("backward_step: non-finite value at node " +
                                  std::to_string(i));
    }
    return out;
}

namespace {

double sup_increment(const GridField& a, const GridField& b) {
    const std::size_t count = a.v.size();
    const int chunks = parallel_chunk_count(count);
    std::vector<double> part(static_cast<std::size_t>(chunks), 0.0);
    parallel_for(count, [&](std::size_t lo, std::size_t hi, int ck) {
        double m = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            m = std::max(m, std::fabs(a.v[i] - b.v[i]));
        part[static_cast<std::size_t>(ck)] = m;
    });
    double m = 0.0;
    for (double p : part) m = std::max(m, p);
    return m;
}

}  // namespace

GridField forward_value_function(const SolverConfig& cfg,
                                 const LagrangianModel& model) {
    if (!(cfg.lambda > 0.0))
        throw SolverError("forward solution requires lambda > 0");
    if (std::isnan(cfg.c))
        throw SolverError("forward solution requires the critical value c");
    StepOperator op(model, cfg);
    const StepWeights wt = forward_weights(cfg.lambda, cfg.dt);
    const double q = wt.field_factor;

    GridField u(cfg.grid, 0.0);
    std::vector<double> warm;
    const long budget = cfg.forward_budget();
    double inc = std::numeric_limits<double>::infinity();
    double prev_inc = -1.0;
    int stable = 0, jumps = 0;
    long it = 0;
    bool last_full = true;

    for (it = 1; it <= budget; ++it) {
        bool do_full = cfg.grid.dim == 1 ||
                       (it % std::max(1, cfg.full_scan_interval) == 1);
        GridField unew = op.apply_warm(u, wt, true, cfg.c, warm, do_full);
        last_full = do_full || cfg.grid.dim == 1;
        inc = sup_increment(unew, u);

        bool jumped = false;
        if (prev_inc > 0.0 && inc > 0.0 && inc > 8.0 * cfg.tol_fix && it > 30) {
            double ratio = inc / prev_inc;
            if (ratio < 1.0 && std::fabs(ratio - q) <= 0.05 * (1.0 - q))
                ++stable;
            else
                stable = 0;
            if (stable >= 5 && jumps < 64) {
                const double f = ratio / (1.0 - ratio);
                parallel_for(unew.v.size(), [&](std::size_t lo, std::size_t hi, int) {
                    for (std::size_t i = lo; i < hi; ++i)
                        unew.v[i] += (unew.v[i] - u.v[i]) * f;
                });
                ++jumps;
                stable = 0;
                jumped = true;
            }
        }
        prev_inc = jumped ? -1.0 : inc;
        u.v.swap(unew.v);

        if (!jumped && inc < cfg.tol_fix) {
            if (cfg.grid.dim == 2 && !last_full) {
                GridField ucheck = op.apply_warm(u, wt, true, cfg.c, warm, true);
                double inc2 = sup_increment(ucheck, u);
                u.v.swap(ucheck.v);
                if (inc2 >= cfg.tol_fix) {
                    prev_inc = -1.0;
                    continue;
                }
                inc = inc2;
            }
            u.meta.lambda = cfg.lambda;
            u.meta.c = cfg.c;
            u.meta.iterations = it;
            u.meta.last_increment = inc;
            u.meta.converged = true;
            return u;
        }
    }
    std::ostringstream os;
    os << "forward solution: iteration budget " << budget
       << " exceeded; achieved increment " << inc << " (tolerance " << cfg.tol_fix
       << ")";
    throw SolverError(os.str());
}

GridField forward_solution(const SolverConfig& cfg, const LagrangianModel& model) {
    GridField u = forward_value_function(cfg, model);
    for (double& x : u.v) x = -x;
    return u;
}

GridField ground_state(const GridField& u_plus, const SolverConfig& cfg,
                       const LagrangianModel& model) {
    if (!(cfg.lambda > 0.0)) throw SolverError("ground state requires lambda > 0");
    if (std::isnan(cfg.c)) throw SolverError("ground state requires c");
    StepOperator op(model, cfg);
    const StepWeights wt = backward_weights(cfg.lambda, cfg.dt);
    const double tol = cfg.backward_tol();
    const long budget = cfg.backward_budget();

    const double diam = 0.5 * std::sqrt(static_cast<double>(cfg.grid.dim));
    const double C_k0 = model.C_of(diam);
    const double upper_bound = u_plus.max_value() +
                               (C_k0 + cfg.c) * std::exp(cfg.lambda) / cfg.lambda +
                               1.0;

    GridField orbit = u_plus;
    GridField env = u_plus;
    std::vector<double> warm;
    double inc = 0.0;
    long it = 0;
    bool converged = false;

    for (it = 1; it <= budget; ++it) {
        bool do_full = cfg.grid.dim == 1 ||
                       (it % std::max(1, cfg.full_scan_interval) == 1);
        GridField next = op.apply_warm(orbit, wt, false, cfg.c, warm, do_full);

        const std::size_t count = next.v.size();
        const int chunks = parallel_chunk_count(count);
        std::vector<double> part_inc(static_cast<std::size_t>(chunks), 0.0);
        std::vector<double> part_max(static_cast<std::size_t>(chunks), -1e300);
        std::vector<long> part_bad(static_cast<std::size_t>(chunks), -1);
        parallel_for(count, [&](std::size_t lo, std::size_t hi, int ck) {
            double mi = 0.0, mx = -1e300;
            long bad = -1;
            for (std::size_t i = lo; i < hi; ++i) {
                double x = next.v[i];
                if (!std::isfinite(x) && bad < 0) bad = static_cast<long>(i);
                if (x > env.v[i]) {
                    mi = std::max(mi, x - env.v[i]);
                    env.v[i] = x;
                }
                mx = std::max(mx, env.v[i]);
            }
            part_inc[static_cast<std::size_t>(ck)] = mi;
            part_max[static_cast<std::size_t>(ck)] = mx;
            part_bad[static_cast<std::size_t>(ck)] = bad;
        });
        inc = 0.0;
        double env_max = -1e300;
        for (int ck = 0; ck < chunks; ++ck) {
            inc = std::max(inc, part_inc[static_cast<std::size_t>(ck)]);
            env_max = std::max(env_max, part_max[static_cast<std::size_t>(ck)]);
            if (part_bad[static_cast<std::size_t>(ck)] >= 0)
                throw SolverError(
                    "ground state: non-finite value at node " +
                    std::to_string(part_bad[static_cast<std::size_t>(ck)]));
        }
        if (env_max > upper_bound) {
            std::ostringstream os;
            os << "ground state: envelope " << env_max
               << " exceeded the a-priori bound " << upper_bound
               << "; discretization blow-up, use a smaller dt";
            throw SolverError(os.str());
        }
        orbit.v.swap(next.v);
        if (inc < tol) {
            converged = true;
            break;
        }
    }

    env.meta.lambda = cfg.lambda;
    env.meta.c = cfg.c;
    env.meta.iterations = it > budget ? budget : it;
    env.meta.last_increment = inc;
    env.meta.converged = converged;
    return env;
}

CriticalValue critical_value(const LagrangianModel& model,
                             const SolverConfig& cfg) {
    CriticalValue cv;
    for (int k = 0; k < 3; ++k) {
        SolverConfig c = cfg;
        c.lambda = cv.lambdas[static_cast<std::size_t>(k)];
        c.c = 0.0;
        GridField v = forward_value_function(c, model);
        double mean = 0.0;
        for (double x : v.v) mean += x;
        mean /= static_cast<double>(v.v.size());
        cv.estimates[static_cast<std::size_t>(k)] = -c.lambda * mean;
        cv.iterations[static_cast<std::size_t>(k)] = v.meta.iterations;
    }
    cv.richardson1[0] = 2.0 * cv.estimates[1] - cv.estimates[0];
    cv.richardson1[1] = 2.0 * cv.estimates[2] - cv.estimates[1];
    cv.richardson2 = (4.0 * cv.richardson1[1] - cv.richardson1[0]) / 3.0;
    cv.c = cv.richardson2;
    return cv;
}

GridField residual(const GridField& u, const SolverConfig& cfg,
                   const LagrangianModel& model) {
    GridField res(u.grid);
    res.meta = u.meta;
    const int n = u.grid.n;
    const double dx = u.grid.dx();
    const std::size_t count = u.grid.node_count();
    const bool mech = model.is_mechanical();

    parallel_for(count, [&](std::size_t b, std::size_t e, int) {
        for (std::size_t idx = b; idx < e; ++idx) {
            TorusPoint x = u.grid.node_point(idx);
            double dm[2], dp[2];
            if (u.grid.dim == 1) {
                int i = static_cast<int>(idx);
                double um = u.v[static_cast<std::size_t>(u.grid.wrap_index(i - 1))];
                double up = u.v[static_cast<std::size_t>(u.grid.wrap_index(i + 1))];
                dm[0] = (u.v[idx] - um) / dx;
                dp[0] = (up - u.v[idx]) / dx;
            } else {
                int i = static_cast<int>(idx / static_cast<std::size_t>(n));
                int j = static_cast<int>(idx % static_cast<std::size_t>(n));
                dm[0] = (u.v[idx] - u.v[u.grid.index(u.grid.wrap_index(i - 1), j)]) / dx;
                dp[0] = (u.v[u.grid.index(u.grid.wrap_index(i + 1), j)] - u.v[idx]) / dx;
                dm[1] = (u.v[idx] - u.v[u.grid.index(i, u.grid.wrap_index(j - 1))]) / dx;
                dp[1] = (u.v[u.grid.index(i, u.grid.wrap_index(j + 1))] - u.v[idx]) / dx;
            }
            double hmax = -1e300;
            const int combos = u.grid.dim == 1 ? 2 : 4;
            for (int cb = 0; cb < combos; ++cb) {
                Covector p;
                p.dim = u.grid.dim;
                for (int d = 0; d < u.grid.dim; ++d)
                    p[d] = (cb >> d) & 1 ? dp[d] : dm[d];
                double h;
                if (mech) {
                    Vec w = model.drift(x);
                    h = model.potential_total(x);
                    for (int d = 0; d < u.grid.dim; ++d)
                        h += 0.5 * p[d] * p[d] + p[d] * w[d];
                } else {
                    h = model.hamiltonian(x, p).value;
                }
                hmax = std::max(hmax, h);
            }
            res.v[idx] = -cfg.lambda * u.v[idx] + hmax - cfg.c;
        }
    });
    return res;
}

std::vector<std::uint8_t> kink_collar(const GridField& u, double jump_threshold) {
    const int n = u.grid.n;
    const double dx = u.grid.dx();
    const std::size_t count = u.grid.node_count();
    std::vector<std::uint8_t> flag(count, 0), collar(count, 0);
    for (std::size_t idx = 0; idx < count; ++idx) {
        if (u.grid.dim == 1) {
            int i = static_cast<int>(idx);
            double um = u.v[static_cast<std::size_t>(u.grid.wrap_index(i - 1))];
            double up = u.v[static_cast<std::size_t>(u.grid.wrap_index(i + 1))];
            double jump = std::fabs((up - u.v[idx]) / dx - (u.v[idx] - um) / dx);
            if (jump > jump_threshold) flag[idx] = 1;
        } else {
            int i = static_cast<int>(idx / static_cast<std::size_t>(n));
            int j = static_cast<int>(idx % static_cast<std::size_t>(n));
            for (int d = 0; d < 2; ++d) {
                int im = u.grid.wrap_index((d == 0 ? i : j) - 1);
                int ip = u.grid.wrap_index((d == 0 ? i : j) + 1);
                std::size_t am = d == 0 ? u.grid.index(im, j) : u.grid.index(i, im);
                std::size_t ap = d == 0 ? u.grid.index(ip, j) : u.grid.index(i, ip);
                double jump = std::fabs((u.v[ap] - u.v[idx]) / dx -
                                        (u.v[idx] - u.v[am]) / dx);
                if (jump > jump_threshold) flag[idx] = 1;
            }
        }
    }
    for (std::size_t idx = 0; idx < count; ++idx) {
        if (!flag[idx]) continue;
        collar[idx] = 1;
        if (u.grid.dim == 1) {
            int i = static_cast<int>(idx);
            collar[static_cast<std::size_t>(u.grid.wrap_index(i - 1))] = 1;
            collar[static_cast<std::size_t>(u.grid.wrap_index(i + 1))] = 1;
        } else {
            int i = static_cast<int>(idx / static_cast<std::size_t>(n));
            int j = static_cast<int>(idx % static_cast<std::size_t>(n));
            collar[u.grid.index(u.grid.wrap_index(i - 1), j)] = 1;
            collar[u.grid.index(u.grid.wrap_index(i + 1), j)] = 1;
            collar[u.grid.index(i, u.grid.wrap_index(j - 1))] = 1;
            collar[u.grid.index(i, u.grid.wrap_index(j + 1))] = 1;
        }
    }
    return collar;
}

double max_residual_outside(const GridField& res,
                            const std::vector<std::uint8_t>& collar) {
    double m = 0.0;
    for (std::size_t i = 0; i < res.v.size(); ++i)
        if (!collar[i]) m = std::max(m, std::fabs(res.v[i]));
    return m;
}

}  // namespace wkam
