#pragma once

#include <map>
#include <vector>

#include "wkam/action.hpp"
#include "wkam/config.hpp"
#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam {

/// Finite subset of grid nodes with per-node scores and class labels.
struct PointSet {
    GridSpec grid;
    std::vector<std::size_t> nodes;
    std::vector<double> scores;
    std::vector<int> labels;  // -1 = unlabeled
    double threshold = 0.0;

    bool empty() const { return nodes.empty(); }
    std::size_t size() const { return nodes.size(); }
    int num_classes() const;
    std::vector<std::size_t> class_representatives() const;  // min score per class

    /// Minimal torus distance from p to any member node.
    double distance_to(const TorusPoint& p) const;
    /// sup over members of distance to the other set (one-sided Hausdorff).
    double directed_hausdorff(const PointSet& other) const;

    void write_csv(const std::string& path) const;
};

double hausdorff_distance(const PointSet& a, const PointSet& b);

/// Nonnegative weights on the (x, v) product grid.
struct VelocityLattice {
    double bound = 4.0;
    int m = 33;  // points per dimension, odd so that v = 0 is included

    double v(int j) const { return -bound + 2.0 * bound * j / (m - 1); }
    int count(int dim) const { return dim == 1 ? m : m * m; }
};

struct DiscreteMeasure {
    GridSpec grid;
    VelocityLattice vlat;
    std::vector<double> w;  // node-major: w[node * nv + j]
    double objective = 0.0;

    double total_mass() const;
    /// max over grid hat functions of |sum w_ij <grad phi_k(x_i), v_j>|.
    double closedness_defect() const;
    std::vector<double> x_marginal() const;
    void write_csv(const std::string& path) const;
};

/// Cache of Peierls barrier tables keyed by source node.
class BarrierCache {
public:
    BarrierCache(const SolverConfig& cfg, const LagrangianModel& model,
                 double T = 16.0)
        : cfg_(cfg), model_(model), T_(T) {}

    const Barrier& get(std::size_t source_node);
    bool has(std::size_t source_node) const {
        return cache_.count(source_node) > 0;
    }
    const std::map<std::size_t, Barrier>& all() const { return cache_; }

private:
    SolverConfig cfg_;
    const LagrangianModel& model_;
    double T_;
    std::map<std::size_t, Barrier> cache_;
};

/// Projected Aubry set {x : h^inf(x,x) < eps_A}. Sources are restricted to a
/// stride-4 sub-grid with local refinement around hits; barrier tables are
/// retained in the cache for later pseudo-metric queries.
PointSet aubry_set(const SolverConfig& cfg, const LagrangianModel& model,
                   BarrierCache& cache, double eps_A = -1.0, int stride = 4);

/// d_c(x,y) = h^inf(x,y) + h^inf(y,x). Requires (computes) barrier tables
/// with both nodes as sources.
double pseudo_metric(std::size_t x_node, std::size_t y_node, BarrierCache& cache);

/// Union-find clustering of the Aubry set under d_c < eps_class. Nodes whose
/// barrier table was not computed inherit the label of the nearest source
/// within the refinement radius.
PointSet static_classes(const PointSet& aubry, BarrierCache& cache,
                        double eps_class = 0.1);

/// Smallest torus distance between nodes of different classes (infinity for
/// fewer than two classes). Used to flag near-degenerate class splits.
double min_interclass_distance(const PointSet& classes);

/// Mather measure by linear programming over discretized closed measures:
/// min sum L(x_i, v_j) mu_ij  s.t.  mu >= 0, sum mu = 1, and for every grid
/// hat function (central-difference gradient) sum mu_ij <grad phi_k, v_j> = 0.
DiscreteMeasure mather_lp(const SolverConfig& cfg, const LagrangianModel& model,
                          VelocityLattice vlat = {});

/// Projection of the measure support to grid nodes.
PointSet mather_set(const DiscreteMeasure& mu, double eps_supp = 1e-3);

/// Nodes where u_minus - u_plus < eps_G (discounted calibrated set).
PointSet calibrated_set(const GridField& u_minus, const GridField& u_plus,
                        double eps_G);

}  // namespace wkam
