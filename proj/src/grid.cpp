#include "wkam/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace wkam {

GridSpec::GridSpec(int dim_, int n_) : dim(dim_), n(n_) {
    if (dim < 1 || dim > kMaxDim) throw GridError("grid dimension must be 1 or 2");
    if (n < 16) throw GridError("grid must have at least 16 nodes per dimension");
    if ((n & (n - 1)) != 0) throw GridError("nodes per dimension must be a power of two");
    if (node_count() > (std::size_t{1} << 22)) throw GridError("grid exceeds node budget 2^22");
}

double GridField::interp(const double* y) const {
    const int n = grid.n;
    if (grid.dim == 1) {
        double s = wrap_unit(y[0]) * n;
        int i0 = static_cast<int>(s);
        if (i0 >= n) i0 = 0;  // wrap_unit gives [0,1); guard rounding
        double th = s - i0;
        int i1 = i0 + 1 == n ? 0 : i0 + 1;
        return v[static_cast<std::size_t>(i0)] * (1.0 - th) +
               v[static_cast<std::size_t>(i1)] * th;
    }
    double s0 = wrap_unit(y[0]) * n;
    double s1 = wrap_unit(y[1]) * n;
    int i0 = static_cast<int>(s0);
    int j0 = static_cast<int>(s1);
    if (i0 >= n) i0 = 0;
    if (j0 >= n) j0 = 0;
    double a = s0 - i0, b = s1 - j0;
    int i1 = i0 + 1 == n ? 0 : i0 + 1;
    int j1 = j0 + 1 == n ? 0 : j0 + 1;
    const double* p = v.data();
    double v00 = p[grid.index(i0, j0)], v01 = p[grid.index(i0, j1)];
    double v10 = p[grid.index(i1, j0)], v11 = p[grid.index(i1, j1)];
    return (1 - a) * ((1 - b) * v00 + b * v01) + a * ((1 - b) * v10 + b * v11);
}

double GridField::min_value() const {
    double m = v[0];
    for (double x : v) m = std::min(m, x);
    return m;
}

double GridField::max_value() const {
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    return m;
}

bool GridField::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double GridField::sup_diff(const GridField& a, const GridField& b) {
    if (!(a.grid == b.grid)) throw GridError("sup_diff: grid mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i)
        m = std::max(m, std::fabs(a.v[i] - b.v[i]));
    return m;
}

double GridField::discrete_lipschitz() const {
    const int n = grid.n;
    double m = 0.0;
    if (grid.dim == 1) {
        for (int i = 0; i < n; ++i) {
            int j = i + 1 == n ? 0 : i + 1;
            m = std::max(m, std::fabs(v[static_cast<std::size_t>(j)] -
                                      v[static_cast<std::size_t>(i)]));
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double c = v[grid.index(i, j)];
                m = std::max(m, std::fabs(v[grid.index(i + 1 == n ? 0 : i + 1, j)] - c));
                m = std::max(m, std::fabs(v[grid.index(i, j + 1 == n ? 0 : j + 1)] - c));
            }
    }
    return m / grid.dx();
}

namespace {
void put_u32(std::ostream& os, std::uint32_t x) {
    unsigned char b[4] = {static_cast<unsigned char>(x & 0xff),
                          static_cast<unsigned char>((x >> 8) & 0xff),
                          static_cast<unsigned char>((x >> 16) & 0xff),
                          static_cast<unsigned char>((x >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}
std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}
void put_f64(std::ostream& os, double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}
double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &u, 8);
    return x;
}
}  // namespace

void GridField::write_binary(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw GridError("cannot open for writing: " + path);
    os.write("WKF1", 4);
    put_u32(os, static_cast<std::uint32_t>(grid.dim));
    put_u32(os, static_cast<std::uint32_t>(grid.n));
    put_f64(os, meta.lambda);
    put_f64(os, meta.c);
    for (double x : v) put_f64(os, x);
    if (!os) throw GridError("write failed: " + path);
}

GridField GridField::read_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw GridError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::strncmp(magic, "WKF1", 4) != 0)
        throw GridError("bad magic in " + path);
    int dim = static_cast<int>(get_u32(is));
    int n = static_cast<int>(get_u32(is));
    GridField f{GridSpec(dim, n)};
    f.meta.lambda = get_f64(is);
    f.meta.c = get_f64(is);
    for (double& x : f.v) x = get_f64(is);
    if (!is) throw GridError("truncated field file: " + path);
    return f;
}

void GridField::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw GridError("cannot open for writing: " + path);
    os.precision(17);
    if (grid.dim == 1) {
        os << "i,x,value\n";
        for (int i = 0; i < grid.n; ++i)
            os << i << ',' << static_cast<double>(i) / grid.n << ','
               << v[static_cast<std::size_t>(i)] << '\n';
    } else {
        os << "i,j,x,y,value\n";
        for (int i = 0; i < grid.n; ++i)
            for (int j = 0; j < grid.n; ++j)
                os << i << ',' << j << ',' << static_cast<double>(i) / grid.n << ','
                   << static_cast<double>(j) / grid.n << ',' << v[grid.index(i, j)]
                   << '\n';
    }
}

}  // namespace wkam
