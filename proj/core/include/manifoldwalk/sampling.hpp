#pragma once

// Tangent direction sampling, uniform with respect to the Riemannian metric.

#include "manifoldwalk/geometry.hpp"
#include "manifoldwalk/linalg.hpp"
#include "manifoldwalk/rng.hpp"

namespace mwalk {

// Uniform direction on S^{m−1}: m standard normals, normalized (redrawn in
// the vanishing-norm corner case).  m = 1 yields ±1.
Vec sample_unit_sphere(int m, RandomStream& rng);

// Chart-coordinate direction ṽ with ‖ṽ‖_g = 1, uniform in the metric sense:
// eigendecompose g = VΣVᵀ and map a euclidean-uniform z through Σ^{-1/2}V.
// Throws DegenerateMetric when g fails the rank tolerance.
Vec sample_tangent_param(const Mat& metric, RandomStream& rng);

// Ambient unit tangent at an implicit-manifold point: a euclidean-uniform
// direction with its normal component (row space of df) removed, normalized.
// Throws RankDeficient / EmptyTangent via the tangent-space machinery.
Vec sample_tangent_implicit(const Manifold& m, const Vec& x, RandomStream& rng);

}  // namespace mwalk
