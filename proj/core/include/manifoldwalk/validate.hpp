#pragma once

// Empirical checks of walks and retractions against closed-form references:
// acceleration splitting, endpoint-error order fits, transition-operator and
// generator consistency, spherical-harmonic decay, stationary density, and
// cover-time step counts.

#include <functional>
#include <memory>
#include <vector>

#include "manifoldwalk/geometry.hpp"
#include "manifoldwalk/retraction.hpp"
#include "manifoldwalk/rng.hpp"
#include "manifoldwalk/walk.hpp"

namespace mwalk {

// Scalar observable on the ambient space.
using AmbientFn = std::function<double(const Vec&)>;

struct CovariantAccel {
    Vec total;       // second difference of t ↦ step(x, v, t) at t = 0
    Vec tangential;  // component inside T_x M
    Vec normal;      // remainder, orthogonal to T_x M
    double tangential_norm = 0.0;
    double normal_norm = 0.0;
};

// Initial acceleration of the step curve, split against the tangent space at
// x.  Geodesics have zero tangential part; embedded ones curve only along the
// normal directions.
CovariantAccel covariant_acceleration(const Manifold& m, const StepMap& step,
                                      const Vec& x, const Vec& v, double h = 1e-4);

// Mean tangential-acceleration norm over random (point, direction) probes.
double averaged_covariant_acceleration(const Manifold& m, const StepMap& step,
                                       int trials, RandomStream& rng,
                                       double h = 1e-4);

struct HarmonicityDefect {
    Vec mean;                // direction-averaged tangential acceleration
    double mean_norm = 0.0;
    double std_error = 0.0;  // Monte Carlo error of the vector mean
};

// Average of the tangential acceleration over random unit tangents at a
// fixed point.  Zero (up to sampling noise) exactly when the step map is
// harmonic, which is what makes the walk limit driftless.
HarmonicityDefect harmonicity_defect(const Manifold& m, const StepMap& step,
                                     const Vec& x, long long samples,
                                     RandomStream& rng, double h = 1e-4);

struct OrderFit {
    std::vector<double> taus;
    std::vector<double> errors;  // worst endpoint error over the probe set
    double slope = 0.0;          // log-log least-squares fit; NaN if degenerate
    double intercept = 0.0;
};

// Endpoint distance between `step` and the exponential oracle across the
// given scales, using one shared set of random (point, direction) probes.
OrderFit retraction_order_fit(std::shared_ptr<const Manifold> m, const StepMap& step,
                              const std::vector<double>& taus, int probes,
                              RandomStream& rng);

struct TransitionEstimate {
    double value = 0.0;
    double std_error = 0.0;  // zero for quadrature estimates
    long long samples = 0;
};

// One-step averaging operator (U_eps f)(x) = E_v f(step(x, v, eps)) over
// metric-uniform unit tangents v.  Two-dimensional manifolds use an
// equal-angle quadrature rule in an orthonormal tangent frame (exact for
// the trigonometric-polynomial integrands that arise here); higher
// dimensions fall back to Monte Carlo with mc_samples draws.
TransitionEstimate transition_operator(const Manifold& m, const StepMap& step,
                                       const AmbientFn& f, const ManifoldPoint& x,
                                       double eps, RandomStream& rng,
                                       long long mc_samples = 200000);

// Laplace-Beltrami operator of an ambient observable at a chart point:
// g^{ij} (∂_i ∂_j F − Γ^k_{ij} ∂_k F) with F = f ∘ φ, derivatives of F by
// central differences.
double laplace_beltrami(const Manifold& m, const AmbientFn& f, const ChartPoint& u);

struct GeneratorError {
    double estimate = 0.0;  // eps^{-2} ((U_eps f)(x) − f(x))
    double target = 0.0;    // Δf(x) / (2 dim)
    double abs_error = 0.0;
    double std_error = 0.0; // propagated from the transition estimate
};

// Difference quotient of the transition operator against its diffusion limit.
// Unit-speed steps average the Hessian over the unit tangent sphere, which
// carries a 1/dim factor relative to the trace, hence the Δ/(2 dim) target.
GeneratorError generator_error(const Manifold& m, const StepMap& step,
                               const AmbientFn& f, const ChartPoint& u, double eps,
                               RandomStream& rng, long long mc_samples = 200000);

struct HeatDecay {
    double empirical = 0.0;  // ensemble mean of the harmonic at the final step
    double predicted = 0.0;  // exp(−ℓ(ℓ+dim−1) t / (2 dim)) · Y_ℓ(x₀)
    double abs_error = 0.0;
    double std_error = 0.0;
    double time = 0.0;
};

// Decay of low spherical harmonics on the unit sphere S^dim, read off the
// final sample of each walker.  ell = 1 uses Y = z (last ambient
// coordinate); ell = 2 uses Y = z² − 1/(dim+1).
HeatDecay heat_kernel_decay(const Manifold& m, const std::vector<WalkResult>& runs,
                            int ell, const Vec& x0);

struct DensityTest {
    std::vector<long long> counts;  // flattened histogram, first axis slowest
    std::vector<double> expected;   // Riemannian volume share per cell
    double total_variation = 0.0;
    double chi_square = 0.0;
    long long samples_used = 0;
    long long burn_in_steps = 0;
};

// Occupancy of coordinate boxes in a periodic chart versus the normalized
// Riemannian volume (the walk's stationary law).  An axis with one bin is
// marginalized out.  Burn-in discards the larger of 10% of the walk and a
// cover-time estimate.  Throws InsufficientSamples when a cell expects
// fewer than 5 hits.
DensityTest stationary_density_test(const Manifold& m, const WalkResult& walk,
                                    const std::vector<int>& bins_per_axis);

// Steps after which an eps-walk on a manifold of the given dimension and
// volume is delta-close to every point with probability at least 1 − delta.
// Grows like (log delta)²/eps² for dim 2 and delta^{2−dim}/eps² above.
long long cover_time_steps(int dim, double volume, double delta, double eps);

// Unit-sphere step with a deliberate drift 0.1‖τv‖² e₁ folded into the
// renormalization: a first-order retraction whose tangential acceleration
// does not vanish.  Used to confirm the order fit detects the defect.
StepMap make_broken_sphere_step(std::shared_ptr<const Manifold> m);

// A point suitable for probing: uniform in a periodic chart box, a
// normalized Gaussian on the unit sphere, or a projected Gaussian for other
// implicit manifolds.
ManifoldPoint random_manifold_point(const Manifold& m, RandomStream& rng);

// Metric-unit tangent vector at p, in ambient coordinates.
Vec random_unit_tangent(const Manifold& m, const ManifoldPoint& p, RandomStream& rng);

}  // namespace mwalk
