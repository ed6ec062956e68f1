#pragma once

#include <array>
#include <functional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "wkam/torus.hpp"

namespace wkam {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Family { mechanical, mechanical_drift, custom };

/// Built-in scalar field on the torus: amp * f(2*pi*k*x), summed over
/// dimensions where the formula is one-dimensional.
struct Potential {
    std::string id = "zero";  // zero | cos | two_bump | asym
    int k = 1;
    double amp = 1.0;

    double value(const TorusPoint& p, int dim) const;
    Vec gradient(const TorusPoint& p, int dim) const;
};

struct Drift {
    std::string id = "zero";  // zero | const | cos
    std::array<double, kMaxDim> v{0.0, 0.0};
    double amp = 0.0;
    int k = 1;

    Vec value(const TorusPoint& p, int dim) const;
    // d omega_i / d x_j
    std::array<double, kMaxDim * kMaxDim> jacobian(const TorusPoint& p, int dim) const;
};

struct HamiltonianValue {
    double value = 0.0;
    Velocity argmax_v;
};

/// 2x2 symmetric matrix (row major), used for d2L/dv2.
using Mat2 = std::array<double, 4>;

/// Tonelli Lagrangian on the flat torus T^d, d in {1,2}.
///
/// Built-in families are mechanical:
///   L(x,v) = |v - omega(x)|^2 / 2 - V(x) + phi(x)
/// with drift omega == 0 for the plain mechanical family and phi an
/// optional additive perturbation. Custom models supply their own
/// evaluators, including derivatives.
class LagrangianModel {
public:
    static LagrangianModel mechanical(int dim, Potential V, Potential phi = {},
                                      Drift omega = {});
    static LagrangianModel custom(
        int dim, std::function<double(const TorusPoint&, const Vec&)> L,
        std::function<Vec(const TorusPoint&, const Vec&)> Lx,
        std::function<Vec(const TorusPoint&, const Vec&)> Lv,
        std::function<Mat2(const TorusPoint&, const Vec&)> Lvv);

    int dim() const { return dim_; }
    Family family() const { return family_; }
    bool is_mechanical() const { return family_ != Family::custom; }

    double lagrangian(const TorusPoint& x, const Vec& v) const;
    Vec dL_dv(const TorusPoint& x, const Vec& v) const;
    Vec dL_dx(const TorusPoint& x, const Vec& v) const;
    Mat2 d2L_dv2(const TorusPoint& x, const Vec& v) const;

    /// Legendre transform H(x,p) = sup_v <p,v> - L(x,v). Closed form for
    /// mechanical families; damped Newton (bisection fallback in d=1) for
    /// custom models. Throws ModelError after 100 iterations.
    HamiltonianValue hamiltonian(const TorusPoint& x, const Covector& p) const;

    /// Energy L_v.v - L, conserved by the undiscounted E-L flow.
    double energy(const TorusPoint& x, const Vec& v) const;

    // mechanical data (valid when is_mechanical())
    double potential_total(const TorusPoint& x) const;  // U = V - phi
    Vec potential_total_grad(const TorusPoint& x) const;
    Vec drift(const TorusPoint& x) const;
    const Drift& drift_spec() const { return omega_; }
    const Potential& potential_spec() const { return V_; }
    const Potential& perturbation_spec() const { return phi_; }

    /// Model with velocities reversed (drift negated); the action from x to y
    /// under the reversed model equals the action from y to x under this one.
    /// Mechanical families only.
    LagrangianModel velocity_reversed() const;

    // sampled bounds, fixed at construction
    double v_max_default() const { return v_max_default_; }
    double max_abs_drift() const { return max_abs_drift_; }
    double max_potential() const { return max_U_; }   // max of V - phi
    double min_potential() const { return min_U_; }
    double alpha0() const { return alpha0_; }         // minimizer speed bound
    double C_of(double r) const;                      // max L over |v| <= r
    double C0() const { return C0_; }                 // -min L
    double lipschitz_kappa() const;                   // C_{alpha0+1} + C0 + 1

    /// Convexity and superlinearity sampling; throws ModelError on failure.
    void validate() const;

private:
    LagrangianModel() = default;
    void finalize();

    int dim_ = 1;
    Family family_ = Family::mechanical;
    Potential V_, phi_;
    Drift omega_;

    std::function<double(const TorusPoint&, const Vec&)> cL_;
    std::function<Vec(const TorusPoint&, const Vec&)> cLx_, cLv_;
    std::function<Mat2(const TorusPoint&, const Vec&)> cLvv_;

    double max_U_ = 0, min_U_ = 0, max_grad_U_ = 0;
    double max_abs_drift_ = 0, max_drift_jac_ = 0;
    double v_max_default_ = 4.0;
    double alpha0_ = 1.0;
    double C0_ = 0.0;
};

/// Build a model from its JSON description, e.g.
/// {"family":"mechanical","dim":1,"potential":{"id":"cos","k":1,"amp":1.0},
///  "perturbation":null}
LagrangianModel build_model(const nlohmann::json& spec);

}  // namespace wkam
