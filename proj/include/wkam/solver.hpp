#pragma once

#include <optional>
#include <vector>

#include "wkam/config.hpp"
#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One discrete Lax-Oleinik step evaluates, at every node x,
///   min_v  field_factor * I[phi](x - v*dt) + run_cost * (L(x, s*v) + c)
/// over v in [-v_max, v_max]^d, where I is periodic multilinear
/// interpolation and s = -1 when reversed velocities are requested.
struct StepWeights {
    double field_factor = 1.0;
    double run_cost = 0.0;
};

StepWeights backward_weights(double lambda, double dt);
StepWeights forward_weights(double lambda, double dt);

/// Semi-Lagrangian realization of the discounted Lax-Oleinik operators.
///
/// In d=1 the inner minimization is solved exactly: the objective is
/// piecewise smooth in v with breakpoints where the foot point crosses grid
/// nodes, and on each piece it is strictly convex, so the piece minimum has
/// a closed form (mechanical families) or is found by derivative bisection
/// (custom models). The feasible set is field-independent, which makes the
/// discrete operator exactly monotone and exactly nonexpansive up to
/// floating-point rounding. It also evaluates exact node landings, which
/// point-source action tables require.
///
/// In d=2 the minimization uses a coarse velocity lattice scan followed by
/// alternating exact line minimizations.
class StepOperator {
public:
    StepOperator(const LagrangianModel& model, const SolverConfig& cfg);

    /// Pure one-step application (full search at every node).
    GridField apply(const GridField& phi, const StepWeights& wt, bool reversed,
                    double c, std::vector<double>* policy_out = nullptr) const;

    /// Warm-started variant for fixed-point iterations in d=2: refines the
    /// stored per-node argmin unless full_scan is set. In d=1 this is the
    /// same exact step as apply().
    GridField apply_warm(const GridField& phi, const StepWeights& wt,
                         bool reversed, double c, std::vector<double>& warm,
                         bool full_scan) const;

    const SolverConfig& config() const { return cfg_; }
    const LagrangianModel& model() const { return model_; }

private:
    void minimize_node_1d(std::size_t i, const std::vector<double>& phi,
                          double phi_min, const StepWeights& wt, bool reversed,
                          double c, double& best, double& best_v) const;
    void minimize_node_2d_scan(std::size_t idx, const GridField& phi,
                               const StepWeights& wt, bool reversed, double c,
                               double& best, double bv[2]) const;
    void line_min_2d(std::size_t idx, const GridField& phi, const StepWeights& wt,
                     bool reversed, double c, int dim_along, double& best,
                     double bv[2]) const;

    const LagrangianModel& model_;
    SolverConfig cfg_;
    bool mech_;
    std::vector<double> U_;       // V - phi at nodes
    std::vector<double> omega_;   // drift at nodes, dim-major packed
};

/// Computes u_lambda^+ by iterating the contraction
///   u <- min_v e^{-l dt} I[u](x - v dt) + w(l,dt) (L(x,-v) + c)
/// from u = 0 and returning the negative of the fixed point. Convergence is
/// geometric with factor e^{-l dt}; once the increment ratio stabilizes at
/// that factor the remaining tail is summed in closed form (the jump lands
/// on the same fixed point and the iteration continues to certify it).
GridField forward_solution(const SolverConfig& cfg, const LagrangianModel& model);

/// Internal: fixed point of the forward contraction itself (not negated).
GridField forward_value_function(const SolverConfig& cfg,
                                 const LagrangianModel& model);

/// Ground state u_lambda^-: long-time limit of the backward operator applied
/// to u_lambda^+, tracked through its monotone envelope.
GridField ground_state(const GridField& u_plus, const SolverConfig& cfg,
                       const LagrangianModel& model);

/// One discrete backward Lax-Oleinik step with t = cfg.dt.
GridField backward_step(const GridField& phi, const SolverConfig& cfg,
                        const LagrangianModel& model);

struct CriticalValue {
    double c = 0.0;
    std::array<double, 3> lambdas{0.1, 0.05, 0.025};
    std::array<double, 3> estimates{};     // -lambda * mean(v_lambda)
    std::array<long, 3> iterations{};
    std::array<double, 2> richardson1{};   // first-order extrapolants
    double richardson2 = 0.0;              // returned value
};

/// Mane critical value via the vanishing-discount schedule with Richardson
/// extrapolation across the three estimates.
CriticalValue critical_value(const LagrangianModel& model, const SolverConfig& cfg);

/// Upwind viscosity residual -lambda u + H(x, Du) - c, maximizing H over the
/// 2^d one-sided gradient combinations.
GridField residual(const GridField& u, const SolverConfig& cfg,
                   const LagrangianModel& model);

/// Nodes where one-sided gradients differ by more than jump_threshold in
/// some dimension, dilated by one node (non-differentiability collar).
std::vector<std::uint8_t> kink_collar(const GridField& u,
                                      double jump_threshold = 1.0);

double max_residual_outside(const GridField& res,
                            const std::vector<std::uint8_t>& collar);

}  // namespace wkam
