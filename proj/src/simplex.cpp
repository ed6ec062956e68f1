#include "wkam/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wkam {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-9;

struct Tableau {
    int m, n;                      // rows, structural + artificial columns
    const LpProblem* lp;
    std::vector<double> binv;      // m x m basis inverse
    std::vector<int> basis;        // m basic column indices
    std::vector<double> xb;        // basic variable values
    std::vector<double> sign;      // row sign flips applied to make b >= 0

    double col(int i, int j) const {
        // column j of the (sign-flipped) constraint matrix; artificials are
        // the identity appended after the structural columns
        if (j < lp->cols) return sign[static_cast<std::size_t>(i)] * lp->a(i, j);
        return j - lp->cols == i ? 1.0 : 0.0;
    }

    void refactorize() {
        // rebuild binv from the basis by Gauss-Jordan
        std::vector<double> M(static_cast<std::size_t>(m) * m, 0.0);
        std::vector<double> I(static_cast<std::size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i) {
            I[static_cast<std::size_t>(i) * m + i] = 1.0;
            for (int k = 0; k < m; ++k)
                M[static_cast<std::size_t>(i) * m + k] = col(i, basis[static_cast<std::size_t>(k)]);
        }
        for (int k = 0; k < m; ++k) {
            int piv = k;
            double best = std::fabs(M[static_cast<std::size_t>(k) * m + k]);
            for (int i = k + 1; i < m; ++i) {
                double v = std::fabs(M[static_cast<std::size_t>(i) * m + k]);
                if (v > best) {
                    best = v;
                    piv = i;
                }
            }
            if (best < 1e-14) throw std::runtime_error("simplex: singular basis");
            if (piv != k)
                for (int j = 0; j < m; ++j) {
                    std::swap(M[static_cast<std::size_t>(piv) * m + j],
                              M[static_cast<std::size_t>(k) * m + j]);
                    std::swap(I[static_cast<std::size_t>(piv) * m + j],
                              I[static_cast<std::size_t>(k) * m + j]);
                }
            double d = M[static_cast<std::size_t>(k) * m + k];
            for (int j = 0; j < m; ++j) {
                M[static_cast<std::size_t>(k) * m + j] /= d;
                I[static_cast<std::size_t>(k) * m + j] /= d;
            }
            for (int i = 0; i < m; ++i) {
                if (i == k) continue;
                double f = M[static_cast<std::size_t>(i) * m + k];
                if (f == 0.0) continue;
                for (int j = 0; j < m; ++j) {
                    M[static_cast<std::size_t>(i) * m + j] -=
                        f * M[static_cast<std::size_t>(k) * m + j];
                    I[static_cast<std::size_t>(i) * m + j] -=
                        f * I[static_cast<std::size_t>(k) * m + j];
                }
            }
        }
        binv = I;
        recompute_xb();
    }

    void recompute_xb() {
        xb.assign(static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int k = 0; k < m; ++k)
                s += binv[static_cast<std::size_t>(i) * m + k] *
                     (sign[static_cast<std::size_t>(k)] * lp->b[static_cast<std::size_t>(k)]);
            xb[static_cast<std::size_t>(i)] = s;
        }
    }
};

}  // namespace

LpResult solve_lp(const LpProblem& lp, long max_pivots) {
    const int m = lp.rows, n = lp.cols;
    LpResult res;

    Tableau T;
    T.m = m;
    T.n = n + m;
    T.lp = &lp;
    T.sign.assign(static_cast<std::size_t>(m), 1.0);
    for (int i = 0; i < m; ++i)
        if (lp.b[static_cast<std::size_t>(i)] < 0.0) T.sign[static_cast<std::size_t>(i)] = -1.0;
    T.basis.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) T.basis[static_cast<std::size_t>(i)] = n + i;  // artificials
    T.refactorize();

    // phase costs: 1 on artificials, then the real objective
    auto cost_of = [&](int j, bool phase1) {
        if (phase1) return j >= n ? 1.0 : 0.0;
        return j >= n ? 0.0 : lp.objective[static_cast<std::size_t>(j)];
    };

    std::vector<double> y(static_cast<std::size_t>(m));
    std::vector<double> d(static_cast<std::size_t>(m));
    long degenerate_run = 0;

    auto iterate = [&](bool phase1) -> LpStatus {
        while (true) {
            if (res.pivots >= max_pivots) return LpStatus::iteration_limit;
            // duals y = c_B * binv
            for (int k = 0; k < m; ++k) {
                double s = 0.0;
                for (int i = 0; i < m; ++i)
                    s += cost_of(T.basis[static_cast<std::size_t>(i)], phase1) *
                         T.binv[static_cast<std::size_t>(i) * m + k];
                y[static_cast<std::size_t>(k)] = s;
            }
            // pricing
            const bool bland = degenerate_run > 50;
            int enter = -1;
            double best_rc = -kCostTol;
            const int limit = phase1 ? T.n : n;  // artificials priced out in phase 2
            for (int j = 0; j < limit; ++j) {
                bool basic = false;
                for (int i = 0; i < m; ++i)
                    if (T.basis[static_cast<std::size_t>(i)] == j) {
                        basic = true;
                        break;
                    }
                if (basic) continue;
                double rc = cost_of(j, phase1);
                for (int i = 0; i < m; ++i)
                    rc -= y[static_cast<std::size_t>(i)] * T.col(i, j);
                if (rc < -kCostTol) {
                    if (bland) {
                        enter = j;
                        break;
                    }
                    if (rc < best_rc) {
                        best_rc = rc;
                        enter = j;
                    }
                }
            }
            if (enter < 0) return LpStatus::optimal;

            // direction d = binv * A_enter
            for (int i = 0; i < m; ++i) {
                double s = 0.0;
                for (int k = 0; k < m; ++k)
                    s += T.binv[static_cast<std::size_t>(i) * m + k] * T.col(k, enter);
                d[static_cast<std::size_t>(i)] = s;
            }
            // ratio test (Bland tie-break on basis variable index)
            int leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                if (d[static_cast<std::size_t>(i)] > kPivotTol) {
                    double r = T.xb[static_cast<std::size_t>(i)] / d[static_cast<std::size_t>(i)];
                    if (r < best_ratio - 1e-12 ||
                        (r < best_ratio + 1e-12 &&
                         (leave < 0 || T.basis[static_cast<std::size_t>(i)] <
                                           T.basis[static_cast<std::size_t>(leave)]))) {
                        best_ratio = r;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            degenerate_run = best_ratio < 1e-12 ? degenerate_run + 1 : 0;

            // basis change: Gauss-Jordan update of binv on the pivot row
            double piv = d[static_cast<std::size_t>(leave)];
            for (int k = 0; k < m; ++k)
                T.binv[static_cast<std::size_t>(leave) * m + k] /= piv;
            for (int i = 0; i < m; ++i) {
                if (i == leave) continue;
                double f = d[static_cast<std::size_t>(i)];
                if (f == 0.0) continue;
                for (int k = 0; k < m; ++k)
                    T.binv[static_cast<std::size_t>(i) * m + k] -=
                        f * T.binv[static_cast<std::size_t>(leave) * m + k];
            }
            T.basis[static_cast<std::size_t>(leave)] = enter;
            ++res.pivots;
            if (res.pivots % 128 == 0)
                T.refactorize();
            else
                T.recompute_xb();
        }
    };

    LpStatus s1 = iterate(true);
    if (s1 == LpStatus::iteration_limit) {
        res.status = s1;
        return res;
    }
    double art = 0.0;
    for (int i = 0; i < m; ++i)
        if (T.basis[static_cast<std::size_t>(i)] >= n)
            art += T.xb[static_cast<std::size_t>(i)];
    if (art > 1e-7) {
        res.status = LpStatus::infeasible;
        return res;
    }

    // drive remaining basic artificials out on any structural column with a
    // nonzero tableau entry; rows with none are redundant and stay at zero
    for (int i = 0; i < m; ++i) {
        if (T.basis[static_cast<std::size_t>(i)] < n) continue;
        for (int j = 0; j < n; ++j) {
            bool basic = false;
            for (int k = 0; k < m; ++k)
                if (T.basis[static_cast<std::size_t>(k)] == j) {
                    basic = true;
                    break;
                }
            if (basic) continue;
            double t = 0.0;
            for (int k = 0; k < m; ++k)
                t += T.binv[static_cast<std::size_t>(i) * m + k] * T.col(k, j);
            if (std::fabs(t) > 1e-8) {
                for (int r = 0; r < m; ++r) {
                    if (r == i) continue;
                    double s = 0.0;
                    for (int k = 0; k < m; ++k)
                        s += T.binv[static_cast<std::size_t>(r) * m + k] * T.col(k, j);
                    if (s == 0.0) continue;
                    double f = s / t;
                    for (int k = 0; k < m; ++k)
                        T.binv[static_cast<std::size_t>(r) * m + k] -=
                            f * T.binv[static_cast<std::size_t>(i) * m + k];
                }
                for (int k = 0; k < m; ++k)
                    T.binv[static_cast<std::size_t>(i) * m + k] /= t;
                T.basis[static_cast<std::size_t>(i)] = j;
                T.recompute_xb();
                break;
            }
        }
    }

    LpStatus s2 = iterate(false);
    res.status = s2;
    if (s2 != LpStatus::optimal) return res;

    res.x.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < m; ++i)
        if (T.basis[static_cast<std::size_t>(i)] < n)
            res.x[static_cast<std::size_t>(T.basis[static_cast<std::size_t>(i)])] =
                std::max(0.0, T.xb[static_cast<std::size_t>(i)]);
    double v = 0.0;
    for (int j = 0; j < n; ++j) v += lp.objective[static_cast<std::size_t>(j)] * res.x[static_cast<std::size_t>(j)];
    res.value = v;
    return res;
}

}  // namespace wkam
