#pragma once

#include <string>
#include <vector>

namespace wkam {

/// Dense linear program in standard form: min c.x s.t. Ax = b, x >= 0.
struct LpProblem {
    int rows = 0;
    int cols = 0;
    std::vector<double> objective;  // cols
    std::vector<double> A;          // row-major, rows x cols
    std::vector<double> b;          // rows

    double& a(int i, int j) { return A[static_cast<std::size_t>(i) * cols + j]; }
    double a(int i, int j) const { return A[static_cast<std::size_t>(i) * cols + j]; }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::iteration_limit;
    double value = 0.0;
    std::vector<double> x;
    long pivots = 0;
};

/// Two-phase revised simplex with an explicit basis inverse. Dantzig pricing
/// by default; switches to Bland's rule after a run of degenerate pivots so
/// cycling cannot occur.
LpResult solve_lp(const LpProblem& lp, long max_pivots = 200000);

}  // namespace wkam
