#pragma once

// Retractions and reference exponential maps.
//
// Two production retractions: a second-order chart step through the
// Christoffel correction (p_ret) and closest-point Newton projection
// (pi_ret).  Reference exponentials (closed forms where known, high-order
// ODE integration otherwise) serve as oracles for convergence checks.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "manifoldwalk/geometry.hpp"

namespace mwalk {

enum class RetractionKind {
    ParamChristoffel,  // chart step with curvature correction
    ProjectNewton,     // ambient step followed by closest-point projection
    ExactExp,          // closed-form exponential (sphere, flat torus)
    GeodesicODE,       // numerically integrated exponential
};

// Accepts pret | piret | exact | ode.
RetractionKind retraction_from_string(const std::string& text);
std::string to_string(RetractionKind kind);

// Residuals are measured as ‖f(z)‖ / σ_min(df(z)), a first-order distance to
// the level set; convergence demands max(threshold_scale³, kProjectionFloor).
// The floor keeps tiny scales from demanding sub-roundoff residuals.
inline constexpr double kProjectionFloor = 1e-14;

struct ProjectionSettings {
    enum class Variant { FullNewton, GaussNewton };
    int max_iters = 50;
    double threshold_scale = 1e-4;
    Variant variant = Variant::FullNewton;
};

// u + v − ½ Γ(v, v) in chart coordinates, wrapped for periodic charts.
// Throws ChartDomainViolation when the input or result leaves the domain.
ChartPoint p_ret(const Manifold& m, const ChartPoint& x, const Vec& v_chart);

struct ProjectionResult {
    Vec point;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;  // includes the pre-iteration residual
};

// Newton iteration on the closest-point Lagrangian stationarity conditions
//   z − y − (df)ᵀ λ = 0,  f(z) = 0
// started at z = y, λ = 0.  GaussNewton drops the constraint Hessians from
// the linearization.  Throws NoConvergence.
ProjectionResult project_to_manifold_info(const Manifold& m, const Vec& y,
                                          const ProjectionSettings& settings = {});
Vec project_to_manifold(const Manifold& m, const Vec& y,
                        const ProjectionSettings& settings = {});

// project(x + v); expects x on the manifold and v tangent at x.
Vec pi_ret(const Manifold& m, const Vec& x, const Vec& v_ambient,
           const ProjectionSettings& settings = {});

inline constexpr int kOdeSubsteps = 256;

// Geodesic equation ü = −Γ(u̇, u̇) integrated with RK4 in τ/kOdeSubsteps
// increments.
ChartPoint exp_chart_ode(const Manifold& m, const ChartPoint& x, const Vec& v_chart,
                         double tau);

// Ambient geodesic for implicit manifolds: ẍ = −Σ μ_i ∇f_i with
// (df dfᵀ) μ = (ẋᵀ Hess f_i ẋ)_i, integrated with RK4.
Vec exp_ambient_ode(const Manifold& m, const Vec& x, const Vec& v_ambient, double tau);

// Closed form when the manifold has one, otherwise an ODE route; ambient in,
// ambient out.  Throws OracleUnavailable when no route exists.
Vec exp_reference(const Manifold& m, const Vec& x, const Vec& v_ambient, double tau);

// Uniform ambient interface: x, unit tangent v, scale τ ↦ new ambient point.
// Signed τ is allowed.  τ = 0 returns x exactly.
using StepMap = std::function<Vec(const Vec& x, const Vec& v, double tau)>;

StepMap make_step_map(std::shared_ptr<const Manifold> m, RetractionKind kind,
                      ProjectionSettings settings = {});
// Exact exponential if the manifold has one, else the ODE route.
StepMap make_exp_oracle(std::shared_ptr<const Manifold> m);

}  // namespace mwalk
