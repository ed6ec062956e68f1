#pragma once

#include <cmath>
#include <limits>

#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Discretization and stopping parameters shared by the solvers.
struct SolverConfig {
    GridSpec grid;
    double dt = 0.0;
    double v_max = 0.0;
    int vel_lattice_m = 17;   // coarse lattice points per dimension (d=2 scan)
    int refine_rounds = 2;    // exact line-minimization rounds (d=2)
    double tol_fix = 1e-9;    // forward contraction stopping tolerance
    long k_max = 0;           // 0 = automatic budget
    double lambda = 0.0;
    double c = std::numeric_limits<double>::quiet_NaN();
    int full_scan_interval = 16;  // d=2: full lattice re-scan cadence

    /// dt = min(0.5 / v_max, dt_factor * dx); the first bound keeps the
    /// interpolation stencil within half the domain, the second ties the
    /// quadrature error to the grid resolution.
    static constexpr double dt_factor = 2.0;

    static SolverConfig make_default(const LagrangianModel& model, int n,
                                     double lambda_ = 0.0) {
        SolverConfig cfg;
        cfg.grid = GridSpec(model.dim(), n);
        cfg.v_max = model.v_max_default();
        cfg.dt = std::min(0.5 / cfg.v_max, dt_factor * cfg.grid.dx());
        cfg.lambda = lambda_;
        return cfg;
    }

    double backward_tol() const { return 1e-6 * (1.0 + 1.0 / lambda); }

    long forward_budget() const {
        if (k_max > 0) return k_max;
        double lt = std::max(lambda * dt, 1e-12);
        return static_cast<long>(std::ceil(40.0 / lt)) + 1000;
    }
    long backward_budget() const {
        return static_cast<long>(std::ceil(20.0 / (lambda * dt)));
    }

    void validate() const {
        if (dt <= 0.0) throw ConfigError("dt must be positive");
        if (v_max <= 0.0) throw ConfigError("v_max must be positive");
        if (dt * v_max > 0.5 + 1e-12)
            throw ConfigError("dt * v_max must not exceed 0.5");
        if (tol_fix <= 0.0) throw ConfigError("tol_fix must be positive");
        if (vel_lattice_m < 3) throw ConfigError("velocity lattice too coarse");
    }
};

}  // namespace wkam
