#pragma once

// Manifold representations and chart-level differential geometry.
//
// A manifold may carry a parameterized representation (an atlas of charts
// with exact first and second derivatives), an implicit representation (a
// constraint map f with df and Hessians), or both.  Metric, Christoffel and
// tangent-space operations are derived from those derivatives; nothing here
// assumes a particular manifold.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "manifoldwalk/expr.hpp"
#include "manifoldwalk/linalg.hpp"

namespace mwalk {

// Relative threshold deciding when eigenvalues/singular values count as zero.
inline constexpr double kRankTolerance = 1e-8;
// Constraint-residual tolerance for membership checks outside a walk; walks
// use the stepsize-derived tolerance instead.
inline constexpr double kOnManifoldTolerance = 1e-10;

struct ChartPoint {
    int chart_id = 0;
    Vec coords;
};

// A point in whichever representations are available.  `ambient` is always
// set; `chart` is set when the point came from a parameterized walk.
struct ManifoldPoint {
    std::optional<ChartPoint> chart;
    Vec ambient;
};

class Chart {
public:
    virtual ~Chart() = default;

    virtual int dim() const = 0;          // m, chart coordinates
    virtual int ambient_dim() const = 0;  // n, embedding target

    virtual Vec value(const Vec& u) const = 0;
    virtual Mat jacobian(const Vec& u) const = 0;           // n × m
    virtual std::vector<Mat> hessians(const Vec& u) const = 0;  // n entries, m × m
    virtual bool has_exact_hessians() const { return true; }

    // Whether u lies in the domain with at least `margin` euclidean distance
    // (in chart coordinates) to the boundary.  Periodic charts have no
    // boundary and contain everything.
    virtual bool contains(const Vec& u, double margin) const = 0;

    virtual bool periodic() const { return false; }
    virtual Vec periods() const { return {}; }
    // Canonical representative of u (mod periods for periodic charts).
    virtual Vec wrap(Vec u) const { return u; }

    // Chart coordinates of an ambient point, when a closed form is known.
    virtual std::optional<Vec> invert(const Vec&) const { return std::nullopt; }
};

class Constraint {
public:
    virtual ~Constraint() = default;

    virtual int ambient_dim() const = 0;  // n
    virtual int codim() const = 0;        // k, number of constraint components

    virtual Vec value(const Vec& x) const = 0;
    virtual Mat jacobian(const Vec& x) const = 0;           // k × n
    virtual std::vector<Mat> hessians(const Vec& x) const = 0;  // k entries, n × n
};

// Chart whose component functions are parsed expressions; derivatives are
// exact (hyper-dual evaluation).
class ExpressionChart : public Chart {
public:
    using InvertFn = std::function<std::optional<Vec>(const Vec&)>;

    static std::shared_ptr<const ExpressionChart> periodic_chart(
        VectorExpr phi, Vec periods, InvertFn invert = {});
    static std::shared_ptr<const ExpressionChart> ball_chart(
        VectorExpr phi, double radius, InvertFn invert = {});

    int dim() const override { return phi_.arity(); }
    int ambient_dim() const override { return phi_.size(); }
    Vec value(const Vec& u) const override { return phi_.value(u); }
    Mat jacobian(const Vec& u) const override { return phi_.jacobian(u); }
    std::vector<Mat> hessians(const Vec& u) const override { return phi_.hessians(u); }
    bool contains(const Vec& u, double margin) const override;
    bool periodic() const override { return !periods_.empty(); }
    Vec periods() const override { return periods_; }
    Vec wrap(Vec u) const override;
    std::optional<Vec> invert(const Vec& x) const override;

private:
    ExpressionChart(VectorExpr phi, Vec periods, double radius, InvertFn invert);

    VectorExpr phi_;
    Vec periods_;       // empty for non-periodic charts
    double radius_ = 0; // open-ball domain radius for non-periodic charts
    InvertFn invert_;
};

class ExpressionConstraint : public Constraint {
public:
    explicit ExpressionConstraint(VectorExpr f) : f_(std::move(f)) {}

    int ambient_dim() const override { return f_.arity(); }
    int codim() const override { return f_.size(); }
    Vec value(const Vec& x) const override { return f_.value(x); }
    Mat jacobian(const Vec& x) const override { return f_.jacobian(x); }
    std::vector<Mat> hessians(const Vec& x) const override { return f_.hessians(x); }

private:
    VectorExpr f_;
};

class Manifold {
public:
    // Manifolds with a closed-form exponential map used as a reference.
    enum class ExactExpForm { None, UnitSphere, FlatTorus };

    std::string name;
    int intrinsic_dim = 0;
    int ambient_dim = 0;
    std::vector<std::shared_ptr<const Chart>> charts;
    std::shared_ptr<const Constraint> constraint;
    ExactExpForm exact_exp = ExactExpForm::None;
    ManifoldPoint default_start;

    bool has_charts() const { return !charts.empty(); }
    bool has_constraint() const { return constraint != nullptr; }
};

const Chart& chart_of(const Manifold& m, int chart_id);

// Pullback metric g = (dφ)ᵀ dφ at chart coordinates u.  Throws
// ChartDomainViolation if u is outside the chart and DegenerateMetric if the
// smallest eigenvalue is at most kRankTolerance times the largest.
Mat metric_at(const Manifold& m, const ChartPoint& p);

// Christoffel symbols Γ^k_ij, indexed (k, i, j), from exact second
// derivatives of the chart (falls back to christoffel_fd when the chart has
// no exact Hessians).
Tensor3 christoffel_at(const Manifold& m, const ChartPoint& p);

// Same symbols with ∂g estimated by central differences of the metric, step
// cbrt(machine epsilon) · (1 + |coordinate|).
Tensor3 christoffel_fd(const Manifold& m, const ChartPoint& p);

// Orthonormal basis of ker df(x) (the tangent space at an on-manifold point).
// Throws RankDeficient when df loses row rank, EmptyTangent when codim == n.
std::vector<Vec> tangent_frame_implicit(const Manifold& m, const Vec& x);

// Lowest-id chart containing x with the requested margin.  Periodic charts
// always qualify; bounded charts qualify when a closed-form inverse exists
// and the coordinates keep the margin.  Throws NoChartWithMargin otherwise.
int select_chart(const Manifold& m, const Vec& x_ambient, double margin);

Vec chart_to_ambient(const Manifold& m, const ChartPoint& p);
std::optional<ChartPoint> ambient_to_chart(const Manifold& m, const Vec& x, int chart_id);

// ‖f(x)‖₂ / σ_min(df(x)): first-order distance estimate to the zero set.
double constraint_residual(const Manifold& m, const Vec& x);

// Membership test: constraint residual for implicit manifolds, chart
// round-trip distance for parameterized-only manifolds.
bool on_manifold(const Manifold& m, const Vec& x, double tol = kOnManifoldTolerance);

// Coordinate-ball radius around chart coordinates that a step of euclidean
// ambient length `len` cannot leave: 2 / sqrt(λ_min(g)) per unit length.
double margin_scale(const Mat& metric);

// ∫ √det g over a periodic chart's fundamental domain by the midpoint rule
// (spectrally accurate for smooth periodic integrands).
double chart_volume(const Manifold& m, int chart_id, int grid_per_axis = 128);

}  // namespace mwalk
