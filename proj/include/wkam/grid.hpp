#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wkam/torus.hpp"

namespace wkam {

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Uniform periodic grid on T^d with n nodes per dimension (power of two).
struct GridSpec {
    int dim = 1;
    int n = 16;

    GridSpec() = default;
    GridSpec(int dim_, int n_);

    double dx() const { return 1.0 / n; }
    std::size_t node_count() const {
        std::size_t c = static_cast<std::size_t>(n);
        return dim == 1 ? c : c * c;
    }
    /// Lexicographic index; first coordinate is the major one.
    std::size_t index(int i, int j = 0) const {
        return dim == 1 ? static_cast<std::size_t>(i)
                        : static_cast<std::size_t>(i) * n + j;
    }
    TorusPoint node_point(std::size_t idx) const {
        if (dim == 1) return TorusPoint(static_cast<double>(idx) / n);
        return TorusPoint(static_cast<double>(idx / n) / n,
                          static_cast<double>(idx % n) / n);
    }
    int wrap_index(long i) const {
        long m = i % n;
        return static_cast<int>(m < 0 ? m + n : m);
    }
    bool operator==(const GridSpec& o) const { return dim == o.dim && n == o.n; }
};

struct FieldMeta {
    double lambda = 0.0;
    double c = 0.0;
    long iterations = 0;
    double last_increment = 0.0;
    bool converged = true;
};

/// Periodic scalar field sampled on a GridSpec, with multilinear
/// interpolation between nodes.
struct GridField {
    GridSpec grid;
    std::vector<double> v;
    FieldMeta meta;

    GridField() = default;
    explicit GridField(const GridSpec& g, double fill = 0.0)
        : grid(g), v(g.node_count(), fill) {}

    double& at(std::size_t i) { return v[i]; }
    double at(std::size_t i) const { return v[i]; }

    /// Periodic multilinear interpolation at arbitrary coordinates.
    double interp(const double* y) const;
    double interp(const TorusPoint& p) const {
        return interp(p.x.data());
    }

    double min_value() const;
    double max_value() const;
    bool all_finite() const;

    /// max |a_i - b_i| over nodes.
    static double sup_diff(const GridField& a, const GridField& b);

    /// Discrete Lipschitz constant: max adjacent-node difference / dx.
    double discrete_lipschitz() const;

    void write_binary(const std::string& path) const;
    static GridField read_binary(const std::string& path);
    void write_csv(const std::string& path) const;
};

}  // namespace wkam
