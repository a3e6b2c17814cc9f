#include "manifoldwalk/retraction.hpp"

#include <cmath>

#include "manifoldwalk/errors.hpp"

namespace mwalk {

RetractionKind retraction_from_string(const std::string& text) {
    if (text == "pret") return RetractionKind::ParamChristoffel;
    if (text == "piret") return RetractionKind::ProjectNewton;
    if (text == "exact") return RetractionKind::ExactExp;
    if (text == "ode") return RetractionKind::GeodesicODE;
    throw ConfigError("unknown retraction '" + text +
                      "'; expected pret, piret, exact or ode");
}

std::string to_string(RetractionKind kind) {
    switch (kind) {
        case RetractionKind::ParamChristoffel: return "pret";
        case RetractionKind::ProjectNewton: return "piret";
        case RetractionKind::ExactExp: return "exact";
        case RetractionKind::GeodesicODE: return "ode";
    }
    return "?";
}

ChartPoint p_ret(const Manifold& m, const ChartPoint& x, const Vec& v_chart) {
    const Chart& chart = chart_of(m, x.chart_id);
    if (static_cast<int>(v_chart.size()) != chart.dim())
        throw DimensionError("p_ret: tangent size differs from chart dim");
    Tensor3 gamma = christoffel_at(m, x);
    Vec u = x.coords;
    const int dim = chart.dim();
    for (int k = 0; k < dim; ++k) {
        double corr = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) corr += gamma(k, i, j) * v_chart[i] * v_chart[j];
        u[k] += v_chart[k] - 0.5 * corr;
    }
    u = chart.wrap(std::move(u));
    if (!chart.contains(u, 0.0))
        throw ChartDomainViolation("p_ret: step left the chart domain");
    return ChartPoint{x.chart_id, std::move(u)};
}

namespace {

double projection_residual(const Constraint& f, const Vec& z) {
    double fn = norm(f.value(z));
    double smin = smallest_singular_value(f.jacobian(z));
    if (smin == 0.0) return fn == 0.0 ? 0.0 : 1e308;
    return fn / smin;
}

}  // namespace

ProjectionResult project_to_manifold_info(const Manifold& m, const Vec& y,
                                          const ProjectionSettings& settings) {
    if (!m.has_constraint())
        throw ConfigError("project_to_manifold: manifold has no implicit form");
    const Constraint& f = *m.constraint;
    const int n = f.ambient_dim(), k = f.codim();
    if (static_cast<int>(y.size()) != n)
        throw DimensionError("project_to_manifold: wrong point size");

    const double tol =
        std::max(settings.threshold_scale * settings.threshold_scale *
                     settings.threshold_scale,
                 kProjectionFloor);

    ProjectionResult out;
    out.point = y;
    Vec lambda(k, 0.0);
    out.residual = projection_residual(f, out.point);
    out.residual_history.push_back(out.residual);

    while (!(out.residual < tol)) {
        if (out.iterations >= settings.max_iters)
            throw NoConvergence("projection stalled at residual " +
                                    std::to_string(out.residual),
                                out.iterations, out.residual);
        Vec fval = f.value(out.point);
        Mat jac = f.jacobian(out.point);

        // r = [z − y − (df)ᵀλ; f(z)]
        Vec rhs(n + k);
        Vec jtl = matvec_t(jac, lambda);
        for (int i = 0; i < n; ++i) rhs[i] = -(out.point[i] - y[i] - jtl[i]);
        for (int i = 0; i < k; ++i) rhs[n + i] = -fval[i];

        // M = [[I − Σ λ_i Hess f_i, −(df)ᵀ], [df, 0]]
        Mat big(n + k, n + k);
        for (int i = 0; i < n; ++i) big(i, i) = 1.0;
        if (settings.variant == ProjectionSettings::Variant::FullNewton) {
            std::vector<Mat> hess = f.hessians(out.point);
            for (int c = 0; c < k; ++c)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) big(i, j) -= lambda[c] * hess[c](i, j);
        }
        for (int c = 0; c < k; ++c)
            for (int i = 0; i < n; ++i) {
                big(i, n + c) = -jac(c, i);
                big(n + c, i) = jac(c, i);
            }

        Vec delta;
        try {
            delta = solve(std::move(big), std::move(rhs));
        } catch (const Error&) {
            throw NoConvergence("projection linearization is singular",
                                out.iterations, out.residual);
        }
        for (int i = 0; i < n; ++i) out.point[i] += delta[i];
        for (int i = 0; i < k; ++i) lambda[i] += delta[n + i];

        ++out.iterations;
        out.residual = projection_residual(f, out.point);
        out.residual_history.push_back(out.residual);
    }
    return out;
}

Vec project_to_manifold(const Manifold& m, const Vec& y,
                        const ProjectionSettings& settings) {
    return project_to_manifold_info(m, y, settings).point;
}

Vec pi_ret(const Manifold& m, const Vec& x, const Vec& v_ambient,
           const ProjectionSettings& settings) {
    return project_to_manifold(m, add(x, v_ambient), settings);
}

namespace {

struct ChartOdeState {
    Vec u;  // coordinates
    Vec w;  // coordinate velocity
};

ChartOdeState chart_ode_rhs(const Manifold& m, int chart_id, const ChartOdeState& s) {
    Tensor3 gamma = christoffel_at(m, ChartPoint{chart_id, s.u});
    const int dim = static_cast<int>(s.u.size());
    ChartOdeState d;
    d.u = s.w;
    d.w.assign(dim, 0.0);
    for (int k = 0; k < dim; ++k) {
        double acc = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) acc += gamma(k, i, j) * s.w[i] * s.w[j];
        d.w[k] = -acc;
    }
    return d;
}

ChartOdeState axpy_state(const ChartOdeState& a, double h, const ChartOdeState& b) {
    ChartOdeState r = a;
    axpy(r.u, h, b.u);
    axpy(r.w, h, b.w);
    return r;
}

struct AmbientOdeState {
    Vec x;
    Vec w;
};

AmbientOdeState ambient_ode_rhs(const Constraint& f, const AmbientOdeState& s) {
    const int n = f.ambient_dim(), k = f.codim();
    Mat jac = f.jacobian(s.x);
    std::vector<Mat> hess = f.hessians(s.x);
    // (df dfᵀ) μ = (ẋᵀ Hess f_i ẋ)_i keeps the acceleration normal to T_xM.
    Mat gram(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += jac(a, i) * jac(b, i);
            gram(a, b) = sum;
        }
    Vec rhs(k);
    for (int a = 0; a < k; ++a) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) sum += s.w[i] * hess[a](i, j) * s.w[j];
        rhs[a] = sum;
    }
    Vec mu = solve(std::move(gram), std::move(rhs));
    AmbientOdeState d;
    d.x = s.w;
    d.w.assign(n, 0.0);
    for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) d.w[i] -= mu[a] * jac(a, i);
    return d;
}

AmbientOdeState axpy_state(const AmbientOdeState& a, double h, const AmbientOdeState& b) {
    AmbientOdeState r = a;
    axpy(r.x, h, b.x);
    axpy(r.w, h, b.w);
    return r;
}

template <class State, class Rhs>
State rk4(State s, double tau, int steps, const Rhs& rhs) {
    const double h = tau / steps;
    for (int i = 0; i < steps; ++i) {
        State k1 = rhs(s);
        State k2 = rhs(axpy_state(s, 0.5 * h, k1));
        State k3 = rhs(axpy_state(s, 0.5 * h, k2));
        State k4 = rhs(axpy_state(s, h, k3));
        s = axpy_state(s, h / 6.0, k1);
        s = axpy_state(s, h / 3.0, k2);
        s = axpy_state(s, h / 3.0, k3);
        s = axpy_state(s, h / 6.0, k4);
    }
    return s;
}

}  // namespace

ChartPoint exp_chart_ode(const Manifold& m, const ChartPoint& x, const Vec& v_chart,
                         double tau) {
    const Chart& chart = chart_of(m, x.chart_id);
    if (!chart.contains(x.coords, 0.0))
        throw ChartDomainViolation("exp_chart_ode: start outside chart domain");
    ChartOdeState s{x.coords, v_chart};
    s = rk4(std::move(s), tau, kOdeSubsteps,
            [&](const ChartOdeState& st) { return chart_ode_rhs(m, x.chart_id, st); });
    Vec u = chart.wrap(std::move(s.u));
    if (!chart.contains(u, 0.0))
        throw ChartDomainViolation("exp_chart_ode: geodesic left the chart domain");
    return ChartPoint{x.chart_id, std::move(u)};
}

Vec exp_ambient_ode(const Manifold& m, const Vec& x, const Vec& v_ambient, double tau) {
    if (!m.has_constraint())
        throw OracleUnavailable("exp_ambient_ode: manifold has no implicit form");
    AmbientOdeState s{x, v_ambient};
    s = rk4(std::move(s), tau, kOdeSubsteps,
            [&](const AmbientOdeState& st) { return ambient_ode_rhs(*m.constraint, st); });
    return s.x;
}

namespace {

Vec exp_unit_sphere(const Vec& x, const Vec& v, double tau) {
    double speed = norm(v);
    if (speed == 0.0) return x;
    double theta = tau * speed;
    Vec out = scale(x, std::cos(theta));
    axpy(out, std::sin(theta) / speed, v);
    return out;
}

// Chart-route step used by both the ODE oracle and p_ret's ambient facade.
ChartPoint locate_chart_point(const Manifold& m, const Vec& x, double margin) {
    int id = select_chart(m, x, margin);
    auto p = ambient_to_chart(m, x, id);
    if (!p)
        throw NoChartWithMargin(
            "chart " + std::to_string(id) + " has no closed-form inverse");
    return *p;
}

// Chart tangent ṽ with dφ ṽ = v: ṽ = g⁻¹ (dφ)ᵀ v.
Vec pull_tangent(const Manifold& m, const ChartPoint& p, const Vec& v) {
    Mat j = chart_of(m, p.chart_id).jacobian(p.coords);
    Mat g = metric_at(m, p);
    return solve(std::move(g), matvec_t(j, v));
}

Vec exp_by_charts(const Manifold& m, const Vec& x, const Vec& v, double tau) {
    ChartPoint p = locate_chart_point(m, x, 0.0);
    Vec vt = pull_tangent(m, p, v);
    ChartPoint q = exp_chart_ode(m, p, vt, tau);
    return chart_to_ambient(m, q);
}

}  // namespace

Vec exp_reference(const Manifold& m, const Vec& x, const Vec& v_ambient, double tau) {
    switch (m.exact_exp) {
        case Manifold::ExactExpForm::UnitSphere:
            return exp_unit_sphere(x, v_ambient, tau);
        case Manifold::ExactExpForm::FlatTorus:
            return chart_of(m, 0).wrap(add(x, scale(v_ambient, tau)));
        case Manifold::ExactExpForm::None:
            break;
    }
    if (m.has_charts()) return exp_by_charts(m, x, v_ambient, tau);
    if (m.has_constraint()) return exp_ambient_ode(m, x, v_ambient, tau);
    throw OracleUnavailable("exp_reference: manifold has no usable representation");
}

StepMap make_step_map(std::shared_ptr<const Manifold> m, RetractionKind kind,
                      ProjectionSettings settings) {
    switch (kind) {
        case RetractionKind::ParamChristoffel: {
            if (!m->has_charts())
                throw ConfigError("pret requires a parameterized manifold");
            return [m](const Vec& x, const Vec& v, double tau) -> Vec {
                if (tau == 0.0) return x;
                ChartPoint p = locate_chart_point(*m, x, 0.0);
                Vec vt = pull_tangent(*m, p, v);
                // Re-locate with the coordinate ball the step needs.
                double need = margin_scale(metric_at(*m, p)) * std::abs(tau) * norm(v);
                if (!chart_of(*m, p.chart_id).contains(p.coords, need)) {
                    p = locate_chart_point(*m, x, need);
                    vt = pull_tangent(*m, p, v);
                }
                ChartPoint q = p_ret(*m, p, scale(vt, tau));
                return chart_to_ambient(*m, q);
            };
        }
        case RetractionKind::ProjectNewton: {
            if (!m->has_constraint())
                throw ConfigError("piret requires an implicit manifold");
            return [m, settings](const Vec& x, const Vec& v, double tau) -> Vec {
                if (tau == 0.0) return x;
                return pi_ret(*m, x, scale(v, tau), settings);
            };
        }
        case RetractionKind::ExactExp: {
            if (m->exact_exp == Manifold::ExactExpForm::None)
                throw OracleUnavailable("no closed-form exponential for " + m->name);
            return [m](const Vec& x, const Vec& v, double tau) -> Vec {
                if (tau == 0.0) return x;
                return exp_reference(*m, x, v, tau);
            };
        }
        case RetractionKind::GeodesicODE: {
            if (m->has_charts())
                return [m](const Vec& x, const Vec& v, double tau) -> Vec {
                    if (tau == 0.0) return x;
                    return exp_by_charts(*m, x, v, tau);
                };
            if (m->has_constraint())
                return [m](const Vec& x, const Vec& v, double tau) -> Vec {
                    if (tau == 0.0) return x;
                    return exp_ambient_ode(*m, x, v, tau);
                };
            throw OracleUnavailable("ode retraction needs charts or a constraint");
        }
    }
    throw ConfigError("make_step_map: invalid retraction kind");
}

StepMap make_exp_oracle(std::shared_ptr<const Manifold> m) {
    if (m->exact_exp != Manifold::ExactExpForm::None)
        return make_step_map(m, RetractionKind::ExactExp);
    return make_step_map(m, RetractionKind::GeodesicODE);
}

}  // namespace mwalk
