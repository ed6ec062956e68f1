#pragma once

#include <vector>

#include "wkam/config.hpp"
#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam {

/// DP encoding of a constrained endpoint: cost 0 at the source node and
/// kBigActionCost elsewhere. Any value above max|L| * T * e^{lambda T} + 1
/// works at desk scale.
inline constexpr double kBigActionCost = 1e6;

/// Finite-time action h^t(x, .) at one or more horizons, with optional
/// per-step argmin policies for minimizer backtracking.
struct ActionTable {
    TorusPoint source;
    std::size_t source_node = 0;
    double dt = 0.0;
    double lambda = 0.0;
    std::vector<double> horizons;      // effective horizons (= steps * dt)
    std::vector<long> horizon_steps;
    std::vector<GridField> fields;     // one per horizon
    bool has_policy = false;
    std::vector<std::vector<double>> policy;  // [step][node*dim + k]

    const GridField& field_for(double t) const;

    /// CSV rows (t, y-coords, h^t(x,y)) across all stored horizons.
    void write_csv(const std::string& path) const;
};

struct Trajectory {
    struct Sample {
        double t;
        TorusPoint x;
        Vec v;
    };
    std::vector<Sample> samples;
    double lambda = 0.0;

    void write_csv(const std::string& path) const;
};

/// h^t(x, .): ceil(t/dt) undiscounted backward steps from the point-source
/// initial condition at the node nearest x.
ActionTable finite_action(const TorusPoint& x, double t, const SolverConfig& cfg,
                          const LagrangianModel& model, bool store_policy = false);

/// Same DP run, capturing every horizon in the (sorted, increasing) list.
ActionTable finite_action_multi(const TorusPoint& x,
                                const std::vector<double>& horizons,
                                const SolverConfig& cfg,
                                const LagrangianModel& model,
                                bool store_policy = false);

/// Discounted action h_lambda^{a,b}(x,y): DP with the exact per-step weight
/// (e^{-lambda tau_k} - e^{-lambda tau_{k+1}}) / lambda.
double discounted_action(const TorusPoint& x, const TorusPoint& y, double a,
                         double b, double lambda, const SolverConfig& cfg,
                         const LagrangianModel& model);

/// Peierls barrier surrogate: pointwise minimum of h^t(x, .) over integer
/// horizons in [T/2, T]; per-horizon fields kept for diagnostics.
struct Barrier {
    TorusPoint source;
    std::size_t source_node = 0;
    GridField liminf;
    std::vector<double> horizons;
    std::vector<GridField> per_horizon;
    double oscillation = 0.0;   // sup_y spread of horizon values
    bool oscillation_flag = false;  // spread exceeded 5*dx somewhere
};

Barrier peierls_barrier(const TorusPoint& x, const SolverConfig& cfg,
                        const LagrangianModel& model, double T = 16.0);

/// Follows stored argmin velocities backward from y to the source.
Trajectory backtrack_minimizer(const ActionTable& table, const TorusPoint& y,
                               double horizon);
Trajectory backtrack_minimizer(const ActionTable& table, const TorusPoint& y);

/// Euler-Lagrange flow (RK4, step min(cfg_dt_hint, 1e-2)); lambda >= 0.
/// Mechanical families only: x' = v, v' = Dw v + lambda (v - w) -
/// (Dw)^T (v - w) - grad U, which reduces to v' = -grad V + lambda v for the
/// plain mechanical family.
Trajectory el_flow(const TorusPoint& x0, const Vec& v0, double lambda,
                   double horizon, const LagrangianModel& model,
                   double step_hint = 1e-2);

}  // namespace wkam
