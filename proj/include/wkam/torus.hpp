#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace wkam {

inline constexpr int kMaxDim = 2;

/// Reduce a coordinate to the fundamental domain [0,1) of the unit circle.
inline double wrap_unit(double a) {
    double u = a - std::floor(a);
    if (u >= 1.0) u -= 1.0;  // floor rounding at the upper edge
    if (u < 0.0) u += 1.0;
    return u;
}

/// Signed displacement from a to b along the shortest arc, in [-0.5, 0.5].
inline double torus_delta(double a, double b) {
    double d = wrap_unit(b) - wrap_unit(a);
    if (d > 0.5) d -= 1.0;
    if (d < -0.5) d += 1.0;
    return d;
}

/// Small fixed-capacity vector used for velocities and covectors.
struct Vec {
    int dim = 1;
    std::array<double, kMaxDim> c{0.0, 0.0};

    Vec() = default;
    explicit Vec(double v0) : dim(1), c{v0, 0.0} {}
    Vec(double v0, double v1) : dim(2), c{v0, v1} {}

    double& operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }

    double norm() const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += c[i] * c[i];
        return std::sqrt(s);
    }
    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += c[i] * o.c[i];
        return s;
    }
};

inline Vec operator+(Vec a, const Vec& b) {
    for (int i = 0; i < a.dim; ++i) a.c[i] += b.c[i];
    return a;
}
inline Vec operator-(Vec a, const Vec& b) {
    for (int i = 0; i < a.dim; ++i) a.c[i] -= b.c[i];
    return a;
}
inline Vec operator*(double s, Vec a) {
    for (int i = 0; i < a.dim; ++i) a.c[i] *= s;
    return a;
}

using Velocity = Vec;
using Covector = Vec;

/// Point on the flat torus T^d; coordinates always reduced to [0,1).
struct TorusPoint {
    int dim = 1;
    std::array<double, kMaxDim> x{0.0, 0.0};

    TorusPoint() = default;
    explicit TorusPoint(double x0) : dim(1), x{wrap_unit(x0), 0.0} {}
    TorusPoint(double x0, double x1) : dim(2), x{wrap_unit(x0), wrap_unit(x1)} {}

    double operator[](int i) const { return x[static_cast<size_t>(i)]; }

    /// Point reached after moving with velocity v for time dt (wrapped).
    TorusPoint advanced(const Vec& v, double dt) const {
        TorusPoint p = *this;
        for (int i = 0; i < dim; ++i) p.x[i] = wrap_unit(x[i] + v[i] * dt);
        return p;
    }
};

/// Periodic Euclidean distance on the unit torus.
inline double torus_metric(const TorusPoint& a, const TorusPoint& b) {
    if (a.dim != b.dim)
        throw std::invalid_argument("torus_metric: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < a.dim; ++i) {
        double d = std::fabs(a[i] - b[i]);
        d = std::min(d, 1.0 - d);
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace wkam
