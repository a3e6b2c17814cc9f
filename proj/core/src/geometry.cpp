#include "manifoldwalk/geometry.hpp"

#include <cmath>
#include <limits>

#include "manifoldwalk/errors.hpp"

namespace mwalk {

ExpressionChart::ExpressionChart(VectorExpr phi, Vec periods, double radius, InvertFn invert)
    : phi_(std::move(phi)), periods_(std::move(periods)), radius_(radius),
      invert_(std::move(invert)) {}

std::shared_ptr<const ExpressionChart> ExpressionChart::periodic_chart(
    VectorExpr phi, Vec periods, InvertFn invert) {
    if (static_cast<int>(periods.size()) != phi.arity())
        throw DimensionError("periodic_chart: one period per coordinate required");
    for (double p : periods)
        if (!(p > 0.0)) throw ConfigError("periodic_chart: periods must be positive");
    return std::shared_ptr<const ExpressionChart>(
        new ExpressionChart(std::move(phi), std::move(periods), 0.0, std::move(invert)));
}

std::shared_ptr<const ExpressionChart> ExpressionChart::ball_chart(
    VectorExpr phi, double radius, InvertFn invert) {
    if (!(radius > 0.0)) throw ConfigError("ball_chart: radius must be positive");
    return std::shared_ptr<const ExpressionChart>(
        new ExpressionChart(std::move(phi), Vec{}, radius, std::move(invert)));
}

bool ExpressionChart::contains(const Vec& u, double margin) const {
    if (static_cast<int>(u.size()) != dim()) return false;
    if (periodic()) return true;
    return norm(u) < radius_ - margin;
}

Vec ExpressionChart::wrap(Vec u) const {
    if (!periodic()) return u;
    for (size_t i = 0; i < u.size(); ++i) {
        double p = periods_[i];
        u[i] -= p * std::floor(u[i] / p);
        if (u[i] >= p) u[i] = 0.0;  // guard against floor rounding at the seam
    }
    return u;
}

std::optional<Vec> ExpressionChart::invert(const Vec& x) const {
    if (!invert_) return std::nullopt;
    return invert_(x);
}

const Chart& chart_of(const Manifold& m, int chart_id) {
    if (chart_id < 0 || chart_id >= static_cast<int>(m.charts.size()))
        throw DimensionError("chart_of: no chart " + std::to_string(chart_id));
    return *m.charts[chart_id];
}

namespace {

Mat gram(const Mat& j) {
    Mat g(j.cols(), j.cols());
    for (int a = 0; a < j.cols(); ++a)
        for (int b = a; b < j.cols(); ++b) {
            double s = 0.0;
            for (int r = 0; r < j.rows(); ++r) s += j(r, a) * j(r, b);
            g(a, b) = s;
            g(b, a) = s;
        }
    return g;
}

void check_spd(const Mat& g) {
    SymEig eig = jacobi_eigensolve(g);
    double lo = eig.values.front(), hi = eig.values.back();
    if (!(lo > kRankTolerance * std::max(hi, 0.0)))
        throw DegenerateMetric("metric eigenvalue " + std::to_string(lo) +
                               " below rank tolerance");
}

// Γ^l_ij = ½ g^{lm} (∂_i g_jm + ∂_j g_im − ∂_m g_ij), dg(k,i,j) = ∂_k g_ij.
Tensor3 assemble_christoffel(const Mat& g, const Tensor3& dg) {
    const int m = g.rows();
    Mat ginv = inverse(g);
    Tensor3 gamma(m, m, m);
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                double s = 0.0;
                for (int mm = 0; mm < m; ++mm)
                    s += ginv(l, mm) *
                         (dg(i, j, mm) + dg(j, i, mm) - dg(mm, i, j));
                gamma(l, i, j) = 0.5 * s;
                gamma(l, j, i) = 0.5 * s;
            }
    return gamma;
}

}  // namespace

Mat metric_at(const Manifold& m, const ChartPoint& p) {
    const Chart& chart = chart_of(m, p.chart_id);
    if (!chart.contains(p.coords, 0.0))
        throw ChartDomainViolation("metric_at: coordinates outside chart " +
                                   std::to_string(p.chart_id));
    Mat g = gram(chart.jacobian(p.coords));
    check_spd(g);
    return g;
}

Tensor3 christoffel_at(const Manifold& m, const ChartPoint& p) {
    const Chart& chart = chart_of(m, p.chart_id);
    if (!chart.has_exact_hessians()) return christoffel_fd(m, p);
    if (!chart.contains(p.coords, 0.0))
        throw ChartDomainViolation("christoffel_at: coordinates outside chart " +
                                   std::to_string(p.chart_id));
    const int dim = chart.dim();
    Mat j = chart.jacobian(p.coords);
    Mat g = gram(j);
    check_spd(g);
    std::vector<Mat> h = chart.hessians(p.coords);

    // ∂_k g_ij = Σ_a H_a(k,i) J(a,j) + J(a,i) H_a(k,j)
    Tensor3 dg(dim, dim, dim);
    for (int k = 0; k < dim; ++k)
        for (int i = 0; i < dim; ++i)
            for (int jj = 0; jj < dim; ++jj) {
                double s = 0.0;
                for (int a = 0; a < chart.ambient_dim(); ++a)
                    s += h[a](k, i) * j(a, jj) + j(a, i) * h[a](k, jj);
                dg(k, i, jj) = s;
            }
    return assemble_christoffel(g, dg);
}

Tensor3 christoffel_fd(const Manifold& m, const ChartPoint& p) {
    const Chart& chart = chart_of(m, p.chart_id);
    const int dim = chart.dim();
    Mat g = metric_at(m, p);
    const double cbrt_eps = std::cbrt(2.220446049250313e-16);
    Tensor3 dg(dim, dim, dim);
    for (int k = 0; k < dim; ++k) {
        double h = cbrt_eps * (1.0 + std::abs(p.coords[k]));
        ChartPoint up = p, dn = p;
        up.coords[k] += h;
        dn.coords[k] -= h;
        Mat gu = metric_at(m, up), gd = metric_at(m, dn);
        for (int i = 0; i < dim; ++i)
            for (int jj = 0; jj < dim; ++jj)
                dg(k, i, jj) = (gu(i, jj) - gd(i, jj)) / (2.0 * h);
    }
    return assemble_christoffel(g, dg);
}

std::vector<Vec> tangent_frame_implicit(const Manifold& m, const Vec& x) {
    if (!m.has_constraint())
        throw Error("tangent_frame_implicit: manifold has no implicit form");
    const Constraint& f = *m.constraint;
    const int n = f.ambient_dim(), k = f.codim();
    if (static_cast<int>(x.size()) != n)
        throw DimensionError("tangent_frame_implicit: wrong point size");
    if (n - k <= 0)
        throw EmptyTangent("tangent_frame_implicit: codim equals ambient dim");

    Mat j = f.jacobian(x);
    Vec sv = singular_values(j);
    if (!(sv.back() > kRankTolerance * sv.front()))
        throw RankDeficient("tangent_frame_implicit: df is rank deficient");

    // Orthonormal basis Q of the normal space (row space of df), then a
    // greedy orthonormal completion of [Q | e_1 .. e_n] gives the tangent.
    Mat q = orthonormal_columns(transpose(j));
    std::vector<Vec> frame;
    frame.reserve(n - k);
    for (int e = 0; e < n && static_cast<int>(frame.size()) < n - k; ++e) {
        Vec v(n, 0.0);
        v[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (int c = 0; c < k; ++c) {
                Vec qc = q.col(c);
                axpy(v, -dot(qc, v), qc);
            }
            for (const Vec& t : frame) axpy(v, -dot(t, v), t);
        }
        double nv = norm(v);
        if (nv > 1e-6) frame.push_back(scale(v, 1.0 / nv));
    }
    if (static_cast<int>(frame.size()) != n - k)
        throw RankDeficient("tangent_frame_implicit: completion failed");
    return frame;
}

int select_chart(const Manifold& m, const Vec& x_ambient, double margin) {
    if (!m.has_charts())
        throw NoChartWithMargin("select_chart: manifold has no charts");
    for (int id = 0; id < static_cast<int>(m.charts.size()); ++id) {
        const Chart& c = *m.charts[id];
        if (c.periodic()) return id;
        std::optional<Vec> u = c.invert(x_ambient);
        if (u && c.contains(*u, margin)) return id;
    }
    throw NoChartWithMargin("select_chart: no chart holds the point with margin " +
                            std::to_string(margin));
}

Vec chart_to_ambient(const Manifold& m, const ChartPoint& p) {
    return chart_of(m, p.chart_id).value(p.coords);
}

std::optional<ChartPoint> ambient_to_chart(const Manifold& m, const Vec& x, int chart_id) {
    std::optional<Vec> u = chart_of(m, chart_id).invert(x);
    if (!u) return std::nullopt;
    return ChartPoint{chart_id, chart_of(m, chart_id).wrap(*u)};
}

double constraint_residual(const Manifold& m, const Vec& x) {
    if (!m.has_constraint())
        throw Error("constraint_residual: manifold has no implicit form");
    const Constraint& f = *m.constraint;
    double fn = norm(f.value(x));
    double smin = smallest_singular_value(f.jacobian(x));
    if (smin == 0.0) return fn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return fn / smin;
}

bool on_manifold(const Manifold& m, const Vec& x, double tol) {
    if (m.has_constraint()) return constraint_residual(m, x) <= tol;
    for (int id = 0; id < static_cast<int>(m.charts.size()); ++id) {
        auto p = ambient_to_chart(m, x, id);
        if (p && chart_of(m, id).contains(p->coords, 0.0) &&
            distance(chart_to_ambient(m, *p), x) <= tol)
            return true;
    }
    return false;
}

double margin_scale(const Mat& metric) {
    SymEig eig = jacobi_eigensolve(metric);
    return 2.0 / std::sqrt(eig.values.front());
}

double chart_volume(const Manifold& m, int chart_id, int grid_per_axis) {
    const Chart& c = chart_of(m, chart_id);
    if (!c.periodic())
        throw Error("chart_volume: requires a periodic chart");
    const Vec periods = c.periods();
    const int dim = c.dim();
    long long total = 1;
    for (int i = 0; i < dim; ++i) total *= grid_per_axis;

    double cell = 1.0;
    for (int i = 0; i < dim; ++i) cell *= periods[i] / grid_per_axis;

    double sum = 0.0;
    Vec u(dim);
    for (long long idx = 0; idx < total; ++idx) {
        long long rest = idx;
        for (int i = 0; i < dim; ++i) {
            long long gi = rest % grid_per_axis;
            rest /= grid_per_axis;
            u[i] = (gi + 0.5) * periods[i] / grid_per_axis;
        }
        Mat g = gram(c.jacobian(u));
        double det;
        if (dim == 1) det = g(0, 0);
        else if (dim == 2) det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
        else {
            det = 1.0;
            for (double ev : jacobi_eigensolve(g).values) det *= ev;
        }
        sum += std::sqrt(std::max(0.0, det));
    }
    return sum * cell;
}

}  // namespace mwalk
