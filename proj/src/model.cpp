#include "wkam/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace wkam {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double Potential::value(const TorusPoint& p, int dim) const {
    if (id == "zero") return 0.0;
    double s = 0.0;
    if (id == "cos") {
        for (int i = 0; i < dim; ++i) s += std::cos(kTwoPi * k * p[i]);
        return amp * s;
    }
    if (id == "two_bump") {
        for (int i = 0; i < dim; ++i) s += std::cos(2.0 * kTwoPi * p[i]);
        return amp * s;
    }
    if (id == "asym") {
        // single-dimensional family; extra dimensions enter additively
        for (int i = 0; i < dim; ++i)
            s += std::cos(kTwoPi * p[i]) + 0.3 * std::sin(2.0 * kTwoPi * p[i]);
        return amp * s;
    }
    throw ModelError("unknown potential id: " + id);
}

Vec Potential::gradient(const TorusPoint& p, int dim) const {
    Vec g;
    g.dim = dim;
    if (id == "zero") return g;
    for (int i = 0; i < dim; ++i) {
        if (id == "cos") {
            g[i] = -amp * kTwoPi * k * std::sin(kTwoPi * k * p[i]);
        } else if (id == "two_bump") {
            g[i] = -amp * 2.0 * kTwoPi * std::sin(2.0 * kTwoPi * p[i]);
        } else if (id == "asym") {
            g[i] = amp * (-kTwoPi * std::sin(kTwoPi * p[i]) +
                          0.6 * kTwoPi * std::cos(2.0 * kTwoPi * p[i]));
        } else {
            throw ModelError("unknown potential id: " + id);
        }
    }
    return g;
}

Vec Drift::value(const TorusPoint& p, int dim) const {
    Vec w;
    w.dim = dim;
    if (id == "zero") return w;
    if (id == "const") {
        for (int i = 0; i < dim; ++i) w[i] = v[static_cast<size_t>(i)];
        return w;
    }
    if (id == "cos") {
        for (int i = 0; i < dim; ++i) w[i] = amp * std::cos(kTwoPi * k * p[i]);
        return w;
    }
    throw ModelError("unknown drift id: " + id);
}

std::array<double, kMaxDim * kMaxDim> Drift::jacobian(const TorusPoint& p,
                                                      int dim) const {
    std::array<double, kMaxDim * kMaxDim> J{0, 0, 0, 0};
    if (id == "cos") {
        for (int i = 0; i < dim; ++i)
            J[static_cast<size_t>(i * kMaxDim + i)] =
                -amp * kTwoPi * k * std::sin(kTwoPi * k * p[i]);
    }
    return J;
}

LagrangianModel LagrangianModel::mechanical(int dim, Potential V, Potential phi,
                                            Drift omega) {
    if (dim < 1 || dim > kMaxDim)
        throw ModelError("dimension must be 1 or 2");
    LagrangianModel m;
    m.dim_ = dim;
    m.V_ = std::move(V);
    m.phi_ = std::move(phi);
    m.omega_ = std::move(omega);
    m.family_ = m.omega_.id == "zero" ? Family::mechanical : Family::mechanical_drift;
    m.finalize();
    return m;
}

LagrangianModel LagrangianModel::custom(
    int dim, std::function<double(const TorusPoint&, const Vec&)> L,
    std::function<Vec(const TorusPoint&, const Vec&)> Lx,
    std::function<Vec(const TorusPoint&, const Vec&)> Lv,
    std::function<Mat2(const TorusPoint&, const Vec&)> Lvv) {
    if (dim < 1 || dim > kMaxDim)
        throw ModelError("dimension must be 1 or 2");
    LagrangianModel m;
    m.dim_ = dim;
    m.family_ = Family::custom;
    m.cL_ = std::move(L);
    m.cLx_ = std::move(Lx);
    m.cLv_ = std::move(Lv);
    m.cLvv_ = std::move(Lvv);
    m.finalize();
    return m;
}

void LagrangianModel::finalize() {
    // Sampled bounds on a 33^d lattice.
    const int ns = 33;
    max_U_ = -1e300;
    min_U_ = 1e300;
    max_grad_U_ = 0.0;
    max_abs_drift_ = 0.0;
    max_drift_jac_ = 0.0;
    auto visit = [&](const TorusPoint& x) {
        if (is_mechanical()) {
            double u = potential_total(x);
            max_U_ = std::max(max_U_, u);
            min_U_ = std::min(min_U_, u);
            max_grad_U_ = std::max(max_grad_U_, potential_total_grad(x).norm());
            max_abs_drift_ = std::max(max_abs_drift_, drift(x).norm());
            auto J = omega_.jacobian(x, dim_);
            for (double j : J) max_drift_jac_ = std::max(max_drift_jac_, std::fabs(j));
        } else {
            Vec zero;
            zero.dim = dim_;
            double l0 = cL_(x, zero);
            max_U_ = std::max(max_U_, -l0);
            min_U_ = std::min(min_U_, -l0);
            max_grad_U_ = std::max(max_grad_U_, cLx_(x, zero).norm());
        }
    };
    if (dim_ == 1) {
        for (int i = 0; i < ns; ++i) visit(TorusPoint(i / double(ns)));
    } else {
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns; ++j)
                visit(TorusPoint(i / double(ns), j / double(ns)));
    }
    v_max_default_ = 4.0 * (1.0 + max_grad_U_ + max_abs_drift_);
    double range = std::max(0.0, max_U_ - min_U_);
    alpha0_ = max_abs_drift_ + std::sqrt(2.0 * (range + 1.0)) + 1.0;
    if (is_mechanical()) {
        C0_ = max_U_;  // -min L, attained at v = omega
    } else {
        // sample over a velocity box
        double c0 = -1e300;
        for (int i = 0; i < ns; ++i) {
            TorusPoint x(i / double(ns));
            for (int j = -16; j <= 16; ++j) {
                Vec v(j / 4.0);
                v.dim = dim_;
                c0 = std::max(c0, -cL_(x, v));
            }
        }
        C0_ = c0;
    }
}

double LagrangianModel::lagrangian(const TorusPoint& x, const Vec& v) const {
    if (family_ == Family::custom) return cL_(x, v);
    Vec w = drift(x);
    double k = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double d = v[i] - w[i];
        k += d * d;
    }
    return 0.5 * k - potential_total(x);
}

Vec LagrangianModel::dL_dv(const TorusPoint& x, const Vec& v) const {
    if (family_ == Family::custom) return cLv_(x, v);
    Vec w = drift(x);
    Vec g;
    g.dim = dim_;
    for (int i = 0; i < dim_; ++i) g[i] = v[i] - w[i];
    return g;
}

Vec LagrangianModel::dL_dx(const TorusPoint& x, const Vec& v) const {
    if (family_ == Family::custom) return cLx_(x, v);
    Vec gU = potential_total_grad(x);
    Vec w = drift(x);
    auto J = omega_.jacobian(x, dim_);
    Vec g;
    g.dim = dim_;
    for (int i = 0; i < dim_; ++i) {
        double s = -gU[i];
        for (int kk = 0; kk < dim_; ++kk)
            s -= (v[kk] - w[kk]) * J[static_cast<size_t>(kk * kMaxDim + i)];
        g[i] = s;
    }
    return g;
}

Mat2 LagrangianModel::d2L_dv2(const TorusPoint& x, const Vec& v) const {
    if (family_ == Family::custom) return cLvv_(x, v);
    return dim_ == 1 ? Mat2{1.0, 0.0, 0.0, 0.0} : Mat2{1.0, 0.0, 0.0, 1.0};
}

double LagrangianModel::energy(const TorusPoint& x, const Vec& v) const {
    return dL_dv(x, v).dot(v) - lagrangian(x, v);
}

double LagrangianModel::potential_total(const TorusPoint& x) const {
    return V_.value(x, dim_) - phi_.value(x, dim_);
}

Vec LagrangianModel::potential_total_grad(const TorusPoint& x) const {
    Vec g = V_.gradient(x, dim_);
    Vec h = phi_.gradient(x, dim_);
    for (int i = 0; i < dim_; ++i) g[i] -= h[i];
    return g;
}

Vec LagrangianModel::drift(const TorusPoint& x) const {
    return omega_.value(x, dim_);
}

LagrangianModel LagrangianModel::velocity_reversed() const {
    if (!is_mechanical())
        throw ModelError("velocity_reversed: mechanical families only");
    Drift d = omega_;
    if (d.id == "const") {
        for (auto& c : d.v) c = -c;
    } else if (d.id == "cos") {
        d.amp = -d.amp;
    }
    return mechanical(dim_, V_, phi_, d);
}

double LagrangianModel::C_of(double r) const {
    if (is_mechanical()) {
        double rr = r + max_abs_drift_;
        return 0.5 * rr * rr - min_U_;
    }
    double c = -1e300;
    const int ns = 17;
    for (int i = 0; i < ns; ++i) {
        TorusPoint x(i / double(ns));
        for (int j = -24; j <= 24; ++j) {
            Vec v(r * j / 24.0);
            v.dim = dim_;
            c = std::max(c, cL_(x, v));
        }
    }
    return c;
}

double LagrangianModel::lipschitz_kappa() const {
    return C_of(alpha0_ + 1.0) + C0_ + 1.0;
}

HamiltonianValue LagrangianModel::hamiltonian(const TorusPoint& x,
                                              const Covector& p) const {
    HamiltonianValue hv;
    if (is_mechanical()) {
        Vec w = drift(x);
        hv.argmax_v.dim = dim_;
        double h = 0.0;
        for (int i = 0; i < dim_; ++i) {
            hv.argmax_v[i] = p[i] + w[i];
            h += 0.5 * p[i] * p[i] + p[i] * w[i];
        }
        hv.value = h + potential_total(x);
        return hv;
    }
    // damped Newton on g(v) = Lv(x,v) - p, start at v = p
    Vec v = p;
    v.dim = dim_;
    auto gnorm = [&](const Vec& vv) {
        Vec g = cLv_(x, vv);
        for (int i = 0; i < dim_; ++i) g[i] -= p[i];
        return g;
    };
    Vec g = gnorm(v);
    for (int it = 0; it < 100; ++it) {
        if (g.norm() <= 1e-10) {
            hv.argmax_v = v;
            hv.value = p.dot(v) - cL_(x, v);
            return hv;
        }
        Mat2 Hm = cLvv_(x, v);
        Vec dv;
        dv.dim = dim_;
        if (dim_ == 1) {
            if (Hm[0] <= 0) break;
            dv[0] = -g[0] / Hm[0];
        } else {
            double det = Hm[0] * Hm[3] - Hm[1] * Hm[2];
            if (det <= 0) break;
            dv[0] = -(Hm[3] * g[0] - Hm[1] * g[1]) / det;
            dv[1] = -(-Hm[2] * g[0] + Hm[0] * g[1]) / det;
        }
        double step = 1.0;
        bool ok = false;
        for (int h = 0; h < 40; ++h) {
            Vec vt = v + step * dv;
            Vec gt = gnorm(vt);
            if (gt.norm() < g.norm()) {
                v = vt;
                g = gt;
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) break;
    }
    if (dim_ == 1) {
        // bisection fallback: Lv is strictly increasing in v
        double lo = -1.0, hi = 1.0;
        auto gv = [&](double vv) { return cLv_(x, Vec(vv))[0] - p[0]; };
        for (int e = 0; e < 80 && gv(lo) > 0; ++e) lo *= 2.0;
        for (int e = 0; e < 80 && gv(hi) < 0; ++e) hi *= 2.0;
        if (gv(lo) <= 0 && gv(hi) >= 0) {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (gv(mid) < 0 ? lo : hi) = mid;
            }
            Vec vb(0.5 * (lo + hi));
            hv.argmax_v = vb;
            hv.value = p.dot(vb) - cL_(x, vb);
            return hv;
        }
    }
    throw ModelError("hamiltonian: Newton failed to converge (non-Tonelli model?)");
}

void LagrangianModel::validate() const {
    const int nx = 16;
    auto check_at = [&](const TorusPoint& x) {
        for (int j = -8; j <= 8; ++j) {
            Vec v(j / 2.0);
            v.dim = dim_;
            if (dim_ == 2) v[1] = -j / 4.0;
            Mat2 Hm = d2L_dv2(x, v);
            bool ok = dim_ == 1
                          ? Hm[0] >= -1e-12
                          : (Hm[0] >= -1e-12 && Hm[3] >= -1e-12 &&
                             Hm[0] * Hm[3] - Hm[1] * Hm[2] >= -1e-12);
            if (!ok)
                throw ModelError("convexity check failed: d2L/dv2 indefinite on "
                                 "the sample lattice");
        }
        // strict convexity along a fiber segment (catches flat directions)
        for (int j = 1; j <= 8; ++j) {
            Vec v1(j / 2.0), v2(-j / 2.0);
            v1.dim = v2.dim = dim_;
            Vec mid;
            mid.dim = dim_;
            double gap = 0.5 * lagrangian(x, v1) + 0.5 * lagrangian(x, v2) -
                         lagrangian(x, mid);
            if (gap <= 1e-12)
                throw ModelError("convexity check failed: L not strictly convex "
                                 "along the fiber");
        }
        // superlinearity along each axis direction
        for (int axis = 0; axis < dim_; ++axis) {
            for (double sgn : {1.0, -1.0}) {
                double prev = -1e300;
                for (double R : {10.0, 100.0, 1000.0}) {
                    Vec v;
                    v.dim = dim_;
                    v[axis] = sgn * R;
                    double ratio = lagrangian(x, v) / R;
                    if (ratio <= prev * 1.5 + 1.0)
                        throw ModelError("superlinearity check failed");
                    prev = ratio;
                }
            }
        }
    };
    if (dim_ == 1) {
        for (int i = 0; i < nx; ++i) check_at(TorusPoint(i / double(nx)));
    } else {
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nx; ++j)
                check_at(TorusPoint(i / double(nx), j / double(nx)));
    }
}

LagrangianModel build_model(const nlohmann::json& spec) {
    if (!spec.contains("family"))
        throw ModelError("model spec: missing family tag");
    std::string family = spec.at("family").get<std::string>();
    int dim = spec.value("dim", 1);
    if (dim < 1 || dim > kMaxDim)
        throw ModelError("model spec: dim must be 1 or 2");

    auto parse_potential = [](const nlohmann::json& j) {
        Potential p;
        if (j.is_null()) return p;
        p.id = j.value("id", "zero");
        p.k = j.value("k", 1);
        p.amp = j.value("amp", 1.0);
        if (p.id != "zero" && p.id != "cos" && p.id != "two_bump" && p.id != "asym")
            throw ModelError("unknown potential id: " + p.id);
        return p;
    };

    Potential V, phi;
    if (spec.contains("potential")) V = parse_potential(spec.at("potential"));
    if (spec.contains("perturbation") && !spec.at("perturbation").is_null())
        phi = parse_potential(spec.at("perturbation"));

    Drift omega;
    if (spec.contains("drift") && !spec.at("drift").is_null()) {
        const auto& j = spec.at("drift");
        omega.id = j.value("id", "zero");
        if (omega.id == "const") {
            auto vv = j.at("v");
            for (size_t i = 0; i < vv.size() && i < kMaxDim; ++i)
                omega.v[i] = vv[i].get<double>();
        } else if (omega.id == "cos") {
            omega.amp = j.value("amp", 0.0);
            omega.k = j.value("k", 1);
        } else if (omega.id != "zero") {
            throw ModelError("unknown drift id: " + omega.id);
        }
    }

    if (family == "mechanical") {
        if (omega.id != "zero")
            throw ModelError("mechanical family must have zero drift");
    } else if (family == "mechanical-with-drift" || family == "mechanical_drift") {
        // drift may still be zero; tag is what matters
    } else if (family == "custom") {
        throw ModelError("custom models cannot be built from JSON; supply "
                         "evaluators programmatically");
    } else {
        throw ModelError("unknown family tag: " + family);
    }

    LagrangianModel m = LagrangianModel::mechanical(dim, V, phi, omega);
    m.validate();
    return m;
}

}  // namespace wkam
