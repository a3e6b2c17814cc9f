#include "manifoldwalk/sampling.hpp"

#include <cmath>

#include "manifoldwalk/errors.hpp"

namespace mwalk {

Vec sample_unit_sphere(int m, RandomStream& rng) {
    if (m < 1) throw DimensionError("sample_unit_sphere: dimension must be >= 1");
    Vec z(m);
    for (;;) {
        for (int i = 0; i < m; ++i) z[i] = rng.normal();
        double n = norm(z);
        if (n > 1e-8) {
            for (double& c : z) c /= n;
            return z;
        }
    }
}

Vec sample_tangent_param(const Mat& metric, RandomStream& rng) {
    const int m = metric.rows();
    SymEig eig = jacobi_eigensolve(metric);
    if (!(eig.values.front() > kRankTolerance * std::max(eig.values.back(), 0.0)))
        throw DegenerateMetric("sample_tangent_param: metric fails rank tolerance");
    Vec z = sample_unit_sphere(m, rng);
    Vec v(m, 0.0);
    for (int i = 0; i < m; ++i)
        axpy(v, z[i] / std::sqrt(eig.values[i]), eig.vectors.col(i));
    return v;
}

Vec sample_tangent_implicit(const Manifold& m, const Vec& x, RandomStream& rng) {
    if (!m.has_constraint())
        throw Error("sample_tangent_implicit: manifold has no implicit form");
    const Constraint& f = *m.constraint;
    const int n = f.ambient_dim(), k = f.codim();
    if (n - k <= 0) throw EmptyTangent("sample_tangent_implicit: no tangent directions");

    Mat jac = f.jacobian(x);
    Vec sv = singular_values(jac);
    if (!(sv.back() > kRankTolerance * sv.front()))
        throw RankDeficient("sample_tangent_implicit: df is rank deficient");
    Mat q = orthonormal_columns(transpose(jac));

    for (;;) {
        Vec u = sample_unit_sphere(n, rng);
        // Remove the normal-space component of u.
        for (int c = 0; c < k; ++c) {
            Vec qc = q.col(c);
            axpy(u, -dot(qc, u), qc);
        }
        double nu = norm(u);
        if (nu > 1e-8) return scale(u, 1.0 / nu);
    }
}

}  // namespace mwalk
