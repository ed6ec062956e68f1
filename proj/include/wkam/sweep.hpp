#pragma once

#include <string>
#include <vector>

#include "wkam/aubry.hpp"
#include "wkam/config.hpp"
#include "wkam/grid.hpp"
#include "wkam/model.hpp"
#include "wkam/solver.hpp"

namespace wkam {

/// Vanishing-discount sweep: per-lambda conjugate fields, calibrated sets,
/// and the Cauchy table of consecutive sup-norm gaps.
struct SweepResult {
    std::vector<double> schedule;
    CriticalValue critical;
    std::vector<GridField> u_plus;
    std::vector<GridField> u_minus;
    std::vector<PointSet> g_lambda;
    std::vector<double> cauchy;  // sup|u^-_{k} - u^-_{k+1}|
    bool complete = false;
    std::string error;

    const GridField& u0_plus() const { return u_plus.back(); }
    const GridField& u0_minus() const { return u_minus.back(); }
};

/// Runs critical_value once, then forward + ground state per lambda.
/// On a per-lambda solver failure the partial result is preserved and the
/// error recorded. Schedule must be strictly decreasing with min >= 0.01.
SweepResult discount_sweep(const std::vector<double>& schedule,
                           const SolverConfig& cfg, const LagrangianModel& model,
                           double eps_G = -1.0);

struct CheckReport {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // worst measured quantity (check-specific)
    long violations = 0;
    std::vector<std::string> notes;
};

/// Conjugacy: u_minus >= u_plus - eps everywhere, |u_minus - u_plus| <= eps
/// on the Mather set (mapped across grids when needed).
CheckReport conjugate_check(const GridField& u_minus, const GridField& u_plus,
                            const PointSet& mather, double eps);

/// Representation formula: u(x) = inf over Aubry sources of
/// u(x0) + h^inf(x0, x), plus classwise constancy of the difference of two
/// independently computed solutions.
CheckReport representation_check(const GridField& u, const PointSet& classes,
                                 BarrierCache& cache, double eps);

/// For every static class, the per-lambda distances from the class to
/// G_lambda must be non-increasing (within a grid cell) and end below eps.
CheckReport star_condition_check(const SweepResult& sweep,
                                 const PointSet& classes, double eps);

/// Upper semicontinuity: every node of G_{lambda_min} within eps of G0.
CheckReport usc_check(const SweepResult& sweep, const PointSet& g0, double eps);

/// Undiscounted calibrated set: the Aubry set when the class is unique
/// (A = G); otherwise nodes on near-minimizing DP orbits through the class
/// representatives (action defect below 10 dx).
PointSet compute_G0(const SolverConfig& cfg, const LagrangianModel& model,
                    const PointSet& classes, const PointSet& aubry);

/// Writes per-lambda fields (binary + CSV), the Cauchy table, calibrated
/// sets, and a JSON manifest into dir.
void export_sweep(const std::string& dir, const SweepResult& sweep,
                  const std::vector<CheckReport>& reports);

}  // namespace wkam
