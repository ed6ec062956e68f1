#include "wkam/aubry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "wkam/simplex.hpp"
#include "wkam/solver.hpp"

namespace wkam {

int PointSet::num_classes() const {
    std::set<int> ids;
    for (int l : labels)
        if (l >= 0) ids.insert(l);
    return static_cast<int>(ids.size());
}

std::vector<std::size_t> PointSet::class_representatives() const {
    std::map<int, std::size_t> best;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        int l = labels.empty() ? -1 : labels[k];
        if (l < 0) continue;
        auto it = best.find(l);
        if (it == best.end() || scores[k] < scores[it->second]) best[l] = k;
    }
    std::vector<std::size_t> reps;
    for (auto& [l, k] : best) reps.push_back(nodes[k]);
    return reps;
}

double PointSet::distance_to(const TorusPoint& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t node : nodes)
        d = std::min(d, torus_metric(grid.node_point(node), p));
    return d;
}

double PointSet::directed_hausdorff(const PointSet& other) const {
    double h = 0.0;
    for (std::size_t node : nodes)
        h = std::max(h, other.distance_to(grid.node_point(node)));
    return h;
}

double hausdorff_distance(const PointSet& a, const PointSet& b) {
    return std::max(a.directed_hausdorff(b), b.directed_hausdorff(a));
}

void PointSet::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw GridError("cannot open for writing: " + path);
    os.precision(17);
    os << (grid.dim == 1 ? "x,score,label\n" : "x,y,score,label\n");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        TorusPoint p = grid.node_point(nodes[k]);
        for (int d = 0; d < grid.dim; ++d) os << p[d] << ',';
        os << scores[k] << ',' << (labels.empty() ? -1 : labels[k]) << '\n';
    }
}

double DiscreteMeasure::total_mass() const {
    return std::accumulate(w.begin(), w.end(), 0.0);
}

std::vector<double> DiscreteMeasure::x_marginal() const {
    const std::size_t nodes = grid.node_count();
    const int nv = vlat.count(grid.dim);
    std::vector<double> m(nodes, 0.0);
    for (std::size_t i = 0; i < nodes; ++i)
        for (int j = 0; j < nv; ++j) m[i] += w[i * nv + j];
    return m;
}

double DiscreteMeasure::closedness_defect() const {
    const int n = grid.n;
    const int nv = vlat.count(grid.dim);
    const double inv2dx = 1.0 / (2.0 * grid.dx());
    double worst = 0.0;
    if (grid.dim == 1) {
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            int km = grid.wrap_index(k - 1), kp = grid.wrap_index(k + 1);
            for (int j = 0; j < nv; ++j) {
                double vj = vlat.v(j);
                s += vj * (w[static_cast<std::size_t>(km) * nv + j] -
                           w[static_cast<std::size_t>(kp) * nv + j]);
            }
            worst = std::max(worst, std::fabs(s * inv2dx));
        }
        return worst;
    }
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int j0 = 0; j0 < vlat.m; ++j0)
                for (int j1 = 0; j1 < vlat.m; ++j1) {
                    int j = j0 * vlat.m + j1;
                    double v0 = vlat.v(j0), v1 = vlat.v(j1);
                    s += v0 * (w[grid.index(grid.wrap_index(k - 1), l) * nv + j] -
                               w[grid.index(grid.wrap_index(k + 1), l) * nv + j]);
                    s += v1 * (w[grid.index(k, grid.wrap_index(l - 1)) * nv + j] -
                               w[grid.index(k, grid.wrap_index(l + 1)) * nv + j]);
                }
            worst = std::max(worst, std::fabs(s * inv2dx));
        }
    return worst;
}

void DiscreteMeasure::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw GridError("cannot open for writing: " + path);
    os.precision(17);
    const int nv = vlat.count(grid.dim);
    os << (grid.dim == 1 ? "x,v,weight\n" : "x,y,vx,vy,weight\n");
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        TorusPoint p = grid.node_point(i);
        for (int j = 0; j < nv; ++j) {
            double wij = w[i * nv + j];
            if (wij <= 0.0) continue;
            for (int d = 0; d < grid.dim; ++d) os << p[d] << ',';
            if (grid.dim == 1) {
                os << vlat.v(j) << ',';
            } else {
                os << vlat.v(j / vlat.m) << ',' << vlat.v(j % vlat.m) << ',';
            }
            os << wij << '\n';
        }
    }
}

const Barrier& BarrierCache::get(std::size_t source_node) {
    auto it = cache_.find(source_node);
    if (it != cache_.end()) return it->second;
    TorusPoint p = cfg_.grid.node_point(source_node);
    Barrier b = peierls_barrier(p, cfg_, model_, T_);
    return cache_.emplace(source_node, std::move(b)).first->second;
}

PointSet aubry_set(const SolverConfig& cfg, const LagrangianModel& model,
                   BarrierCache& cache, double eps_A, int stride) {
    (void)model;  // tables come from the cache, which carries the same model
    if (std::isnan(cfg.c)) throw SolverError("aubry_set: c must be set");
    if (eps_A < 0.0) eps_A = 20.0 * cfg.grid.dx();
    const int n = cfg.grid.n;

    std::set<std::size_t> pending;
    if (cfg.grid.dim == 1) {
        for (int i = 0; i < n; i += stride) pending.insert(static_cast<std::size_t>(i));
    } else {
        for (int i = 0; i < n; i += stride)
            for (int j = 0; j < n; j += stride) pending.insert(cfg.grid.index(i, j));
    }

    std::map<std::size_t, double> score;
    std::set<std::size_t> done;
    while (!pending.empty()) {
        std::size_t node = *pending.begin();
        pending.erase(pending.begin());
        if (done.count(node)) continue;
        done.insert(node);
        const Barrier& b = cache.get(node);
        double s = b.liminf.v[node];
        score[node] = s;
        if (s < eps_A) {
            // refine around the hit so the set boundary is node-resolved
            if (cfg.grid.dim == 1) {
                int i = static_cast<int>(node);
                for (int d = -stride + 1; d < stride; ++d) {
                    std::size_t nb = static_cast<std::size_t>(cfg.grid.wrap_index(i + d));
                    if (!done.count(nb)) pending.insert(nb);
                }
            } else {
                int i = static_cast<int>(node / static_cast<std::size_t>(n));
                int j = static_cast<int>(node % static_cast<std::size_t>(n));
                for (int di = -stride + 1; di < stride; ++di)
                    for (int dj = -stride + 1; dj < stride; ++dj) {
                        std::size_t nb = cfg.grid.index(cfg.grid.wrap_index(i + di),
                                                        cfg.grid.wrap_index(j + dj));
                        if (!done.count(nb)) pending.insert(nb);
                    }
            }
        }
    }

    PointSet ps;
    ps.grid = cfg.grid;
    ps.threshold = eps_A;
    for (auto& [node, s] : score) {
        if (s < eps_A) {
            ps.nodes.push_back(node);
            ps.scores.push_back(s);
            ps.labels.push_back(-1);
        }
    }
    return ps;
}

double pseudo_metric(std::size_t x_node, std::size_t y_node, BarrierCache& cache) {
    const Barrier& bx = cache.get(x_node);
    const Barrier& by = cache.get(y_node);
    return bx.liminf.v[y_node] + by.liminf.v[x_node];
}

namespace {
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};
}  // namespace

PointSet static_classes(const PointSet& aubry, BarrierCache& cache,
                        double eps_class) {
    PointSet out = aubry;
    if (aubry.empty()) return out;

    // Union-find runs on the kernel: nodes with self-barrier below
    // eps_class/2. Rim nodes of a threshold Aubry set satisfy
    // d_c(x,y) ~ score(x) + score(y) (long-time loops park on the Aubry
    // set), so clustering them literally shreds the rim into slivers; they
    // are attached to the nearest kernel node instead.
    std::vector<std::size_t> srcs, others;
    for (std::size_t k = 0; k < aubry.nodes.size(); ++k) {
        bool kernel = cache.has(aubry.nodes[k]) &&
                      aubry.scores[k] < 0.5 * eps_class;
        (kernel ? srcs : others).push_back(k);
    }
    if (srcs.empty()) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < aubry.nodes.size(); ++k)
            if (aubry.scores[k] < aubry.scores[best]) best = k;
        srcs.push_back(best);
        others.erase(std::remove(others.begin(), others.end(), best), others.end());
    }

    UnionFind uf(srcs.size());
    for (std::size_t a = 0; a < srcs.size(); ++a)
        for (std::size_t b = a + 1; b < srcs.size(); ++b) {
            double d = pseudo_metric(aubry.nodes[srcs[a]], aubry.nodes[srcs[b]], cache);
            if (d < eps_class) uf.unite(static_cast<int>(a), static_cast<int>(b));
        }

    std::map<int, int> compact;
    for (std::size_t a = 0; a < srcs.size(); ++a) {
        int root = uf.find(static_cast<int>(a));
        if (!compact.count(root)) {
            int next = static_cast<int>(compact.size());
            compact[root] = next;
        }
        out.labels[srcs[a]] = compact[root];
    }
    for (std::size_t k : others) {
        TorusPoint p = aubry.grid.node_point(aubry.nodes[k]);
        double best = std::numeric_limits<double>::infinity();
        int label = -1;
        for (std::size_t a : srcs) {
            double d = torus_metric(aubry.grid.node_point(aubry.nodes[a]), p);
            if (d < best) {
                best = d;
                label = out.labels[a];
            }
        }
        out.labels[k] = label;
    }
    return out;
}

double min_interclass_distance(const PointSet& classes) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < classes.nodes.size(); ++a)
        for (std::size_t b = a + 1; b < classes.nodes.size(); ++b) {
            if (classes.labels[a] < 0 || classes.labels[b] < 0) continue;
            if (classes.labels[a] == classes.labels[b]) continue;
            best = std::min(best,
                            torus_metric(classes.grid.node_point(classes.nodes[a]),
                                         classes.grid.node_point(classes.nodes[b])));
        }
    return best;
}

DiscreteMeasure mather_lp(const SolverConfig& cfg, const LagrangianModel& model,
                          VelocityLattice vlat) {
    const int n = cfg.grid.n;
    if (cfg.grid.dim == 1 && n > 64)
        throw SolverError("mather_lp: size guard n <= 64 in d=1");
    if (cfg.grid.dim == 2 && n > 16)
        throw SolverError("mather_lp: size guard n <= 16 in d=2");
    if (vlat.bound <= 0.0) {
        vlat.bound =
            std::sqrt(2.0 * std::max(0.0, model.max_potential() - model.min_potential())) +
            1.0;
    }
    if (cfg.grid.dim == 2 && vlat.m > 9) vlat.m = 9;

    const std::size_t nodes = cfg.grid.node_count();
    const int nv = vlat.count(cfg.grid.dim);
    const int ncols = static_cast<int>(nodes) * nv;
    const int nrows = static_cast<int>(nodes) + 1;

    LpProblem lp;
    lp.rows = nrows;
    lp.cols = ncols;
    lp.objective.resize(static_cast<std::size_t>(ncols));
    lp.A.assign(static_cast<std::size_t>(nrows) * ncols, 0.0);
    lp.b.assign(static_cast<std::size_t>(nrows), 0.0);

    auto vel = [&](int j) {
        Vec v;
        v.dim = cfg.grid.dim;
        if (cfg.grid.dim == 1) {
            v[0] = vlat.v(j);
        } else {
            v[0] = vlat.v(j / vlat.m);
            v[1] = vlat.v(j % vlat.m);
        }
        return v;
    };

    for (std::size_t i = 0; i < nodes; ++i) {
        TorusPoint x = cfg.grid.node_point(i);
        for (int j = 0; j < nv; ++j)
            lp.objective[i * nv + j] = model.lagrangian(x, vel(j));
    }

    // closedness rows, one per hat function; entries are +-v components
    // (rows scaled by 2 dx for conditioning)
    for (std::size_t k = 0; k < nodes; ++k) {
        if (cfg.grid.dim == 1) {
            int km = cfg.grid.wrap_index(static_cast<long>(k) - 1);
            int kp = cfg.grid.wrap_index(static_cast<long>(k) + 1);
            for (int j = 0; j < nv; ++j) {
                double vj = vlat.v(j);
                lp.a(static_cast<int>(k), km * nv + j) += vj;
                lp.a(static_cast<int>(k), kp * nv + j) -= vj;
            }
        } else {
            int ki = static_cast<int>(k / static_cast<std::size_t>(n));
            int kj = static_cast<int>(k % static_cast<std::size_t>(n));
            for (int j = 0; j < nv; ++j) {
                Vec v = vel(j);
                lp.a(static_cast<int>(k),
                     static_cast<int>(cfg.grid.index(cfg.grid.wrap_index(ki - 1), kj)) * nv + j) += v[0];
                lp.a(static_cast<int>(k),
                     static_cast<int>(cfg.grid.index(cfg.grid.wrap_index(ki + 1), kj)) * nv + j) -= v[0];
                lp.a(static_cast<int>(k),
                     static_cast<int>(cfg.grid.index(ki, cfg.grid.wrap_index(kj - 1))) * nv + j) += v[1];
                lp.a(static_cast<int>(k),
                     static_cast<int>(cfg.grid.index(ki, cfg.grid.wrap_index(kj + 1))) * nv + j) -= v[1];
            }
        }
    }
    // normalization
    for (int j = 0; j < ncols; ++j) lp.a(nrows - 1, j) = 1.0;
    lp.b[static_cast<std::size_t>(nrows - 1)] = 1.0;

    LpResult r = solve_lp(lp);
    if (r.status == LpStatus::infeasible)
        throw SolverError("mather_lp: LP reported infeasible (should not happen: "
                          "a unit mass at any node with v = 0 is feasible)");
    if (r.status == LpStatus::unbounded)
        throw SolverError("mather_lp: LP reported unbounded (L is bounded below "
                          "on the compact lattice)");
    if (r.status != LpStatus::optimal)
        throw SolverError("mather_lp: pivot limit exceeded");

    DiscreteMeasure mu;
    mu.grid = cfg.grid;
    mu.vlat = vlat;
    mu.w = std::move(r.x);
    mu.objective = r.value;
    return mu;
}

PointSet mather_set(const DiscreteMeasure& mu, double eps_supp) {
    std::vector<double> marg = mu.x_marginal();
    double mx = 0.0;
    for (double m : marg) mx = std::max(mx, m);
    PointSet ps;
    ps.grid = mu.grid;
    ps.threshold = eps_supp * mx;
    for (std::size_t i = 0; i < marg.size(); ++i) {
        if (marg[i] > eps_supp * mx) {
            ps.nodes.push_back(i);
            ps.scores.push_back(marg[i]);
            ps.labels.push_back(-1);
        }
    }
    return ps;
}

PointSet calibrated_set(const GridField& u_minus, const GridField& u_plus,
                        double eps_G) {
    if (!(u_minus.grid == u_plus.grid))
        throw SolverError("calibrated_set: grid mismatch");
    if (u_minus.meta.lambda != u_plus.meta.lambda)
        throw SolverError("calibrated_set: lambda mismatch");
    PointSet ps;
    ps.grid = u_minus.grid;
    ps.threshold = eps_G;
    for (std::size_t i = 0; i < u_minus.v.size(); ++i) {
        double d = u_minus.v[i] - u_plus.v[i];
        if (d < eps_G) {
            ps.nodes.push_back(i);
            ps.scores.push_back(d);
            ps.labels.push_back(-1);
        }
    }
    return ps;
}

}  // namespace wkam
