#include "manifoldwalk/catalog.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/retraction.hpp"

namespace mwalk {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// "x1^2 + x2^2 + ... + xm^2"
std::string radius_sq(int m) {
    std::string s;
    for (int i = 1; i <= m; ++i) {
        if (i > 1) s += " + ";
        s += "x" + std::to_string(i) + "^2";
    }
    return s;
}

VectorExpr parse_components(const std::vector<std::string>& texts, int arity) {
    std::vector<Ast> parts;
    parts.reserve(texts.size());
    for (const std::string& t : texts) parts.push_back(parse_expression(t, arity));
    return VectorExpr(std::move(parts));
}

// Stereographic charts of the unit m-sphere in R^{m+1}, domain radius 2.
// Chart 0 projects from the south pole (covers the north cap and beyond),
// chart 1 from the north pole; they overlap in the band |x_n| < 3/5.
std::shared_ptr<const Manifold> make_sphere(int m) {
    if (m < 1) throw ConfigError("sphere: dim must be >= 1");
    const int n = m + 1;
    std::string r2 = "(" + radius_sq(m) + ")";
    std::string denom = "(1 + " + r2 + ")";
    std::vector<std::string> north, south;
    for (int i = 1; i <= m; ++i) {
        north.push_back("2 x" + std::to_string(i) + " / " + denom);
        south.push_back("2 x" + std::to_string(i) + " / " + denom);
    }
    north.push_back("(1 - " + r2 + ") / " + denom);
    south.push_back("(" + r2 + " - 1) / " + denom);

    auto invert_with = [n](double sign) {
        return [n, sign](const Vec& x) -> std::optional<Vec> {
            double denom = 1.0 + sign * x[n - 1];
            if (denom <= 1e-9) return std::nullopt;
            Vec u(x.begin(), x.end() - 1);
            for (double& c : u) c /= denom;
            return u;
        };
    };

    auto mf = std::make_shared<Manifold>();
    mf->name = "sphere:dim=" + std::to_string(m);
    mf->intrinsic_dim = m;
    mf->ambient_dim = n;
    mf->charts.push_back(
        ExpressionChart::ball_chart(parse_components(north, m), 2.0, invert_with(+1.0)));
    mf->charts.push_back(
        ExpressionChart::ball_chart(parse_components(south, m), 2.0, invert_with(-1.0)));
    mf->constraint = std::make_shared<ExpressionConstraint>(
        parse_components({radius_sq(n) + " - 1"}, n));
    mf->exact_exp = Manifold::ExactExpForm::UnitSphere;
    mf->default_start.chart = ChartPoint{0, Vec(m, 0.0)};
    mf->default_start.ambient = Vec(n, 0.0);
    mf->default_start.ambient[n - 1] = 1.0;
    return mf;
}

std::shared_ptr<const Manifold> make_flat_torus(int m, double period) {
    if (m < 1) throw ConfigError("flat-torus: dim must be >= 1");
    if (!(period > 0.0)) throw ConfigError("flat-torus: period must be positive");
    std::vector<std::string> ident;
    for (int i = 1; i <= m; ++i) ident.push_back("x" + std::to_string(i));

    auto mf = std::make_shared<Manifold>();
    mf->name = "flat-torus:dim=" + std::to_string(m) + ",period=" + fmt(period);
    mf->intrinsic_dim = m;
    mf->ambient_dim = m;
    auto chart = ExpressionChart::periodic_chart(
        parse_components(ident, m), Vec(m, period),
        [](const Vec& x) -> std::optional<Vec> { return x; });
    mf->charts.push_back(chart);
    mf->exact_exp = Manifold::ExactExpForm::FlatTorus;
    mf->default_start.chart = ChartPoint{0, Vec(m, 0.0)};
    mf->default_start.ambient = Vec(m, 0.0);
    return mf;
}

std::shared_ptr<const Manifold> make_torus(double R, double r) {
    if (!(R > r) || !(r > 0.0))
        throw ConfigError("torus: needs R > r > 0");
    std::vector<std::string> phi = {
        "(" + fmt(R) + " + " + fmt(r) + " cos(x1)) cos(x2)",
        "(" + fmt(R) + " + " + fmt(r) + " cos(x1)) sin(x2)",
        fmt(r) + " sin(x1)",
    };
    std::string f = "(sqrt(x^2 + y^2) - " + fmt(R) + ")^2 + z^2 - " + fmt(r * r);

    auto mf = std::make_shared<Manifold>();
    mf->name = "torus:R=" + fmt(R) + ",r=" + fmt(r);
    mf->intrinsic_dim = 2;
    mf->ambient_dim = 3;
    mf->charts.push_back(ExpressionChart::periodic_chart(
        parse_components(phi, 2), Vec{kTwoPi, kTwoPi},
        [R, r](const Vec& x) -> std::optional<Vec> {
            double rho = std::hypot(x[0], x[1]);
            double s = std::atan2(x[2] / r, (rho - R) / r);
            double t = std::atan2(x[1], x[0]);
            return Vec{s, t};
        }));
    mf->constraint = std::make_shared<ExpressionConstraint>(parse_components({f}, 3));
    mf->default_start.chart = ChartPoint{0, Vec{0.0, 0.0}};
    mf->default_start.ambient = Vec{R + r, 0.0, 0.0};
    return mf;
}

std::shared_ptr<const Manifold> make_genus2() {
    std::string f = "(x^2 (1 - x^2) - y^2)^2 + z^2 - 0.01";
    auto mf = std::make_shared<Manifold>();
    mf->name = "genus2";
    mf->intrinsic_dim = 2;
    mf->ambient_dim = 3;
    mf->constraint = std::make_shared<ExpressionConstraint>(parse_components({f}, 3));
    mf->default_start.ambient = Vec{0.0, 0.0, 0.1};
    return mf;
}

// Axis-scaled stereographic charts: the unit-sphere chart composed with
// diag(a, b, c).  Same domains and overlap band as the sphere's atlas.
std::shared_ptr<const Manifold> make_ellipsoid(double a, double b, double c) {
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
        throw ConfigError("ellipsoid: semi-axes must be positive");
    std::string f = "(x / " + fmt(a) + ")^2 + (y / " + fmt(b) + ")^2 + (z / " +
                    fmt(c) + ")^2 - 1";
    std::string r2 = "(x1^2 + x2^2)";
    std::string denom = "(1 + " + r2 + ")";
    std::vector<std::string> north = {
        fmt(a) + " 2 x1 / " + denom,
        fmt(b) + " 2 x2 / " + denom,
        fmt(c) + " (1 - " + r2 + ") / " + denom,
    };
    std::vector<std::string> south = north;
    south[2] = fmt(c) + " (" + r2 + " - 1) / " + denom;

    Vec axes{a, b, c};
    auto invert_with = [axes](double sign) {
        return [axes, sign](const Vec& x) -> std::optional<Vec> {
            double z = x[2] / axes[2];
            double denom = 1.0 + sign * z;
            if (denom <= 1e-9) return std::nullopt;
            return Vec{x[0] / axes[0] / denom, x[1] / axes[1] / denom};
        };
    };

    auto mf = std::make_shared<Manifold>();
    mf->name = "ellipsoid:a=" + fmt(a) + ",b=" + fmt(b) + ",c=" + fmt(c);
    mf->intrinsic_dim = 2;
    mf->ambient_dim = 3;
    mf->charts.push_back(
        ExpressionChart::ball_chart(parse_components(north, 2), 2.0, invert_with(+1.0)));
    mf->charts.push_back(
        ExpressionChart::ball_chart(parse_components(south, 2), 2.0, invert_with(-1.0)));
    mf->constraint = std::make_shared<ExpressionConstraint>(parse_components({f}, 3));
    mf->default_start.chart = ChartPoint{0, Vec{0.0, 0.0}};
    mf->default_start.ambient = Vec{0.0, 0.0, c};
    return mf;
}

std::map<std::string, double> parse_params(const std::string& text,
                                           const std::string& where) {
    std::map<std::string, double> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        std::string item = text.substr(pos, next - pos);
        size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError(where + ": expected key=value, got '" + item + "'");
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        char* end = nullptr;
        double v = std::strtod(val.c_str(), &end);
        if (end == val.c_str() || *end != '\0')
            throw ConfigError(where + ": bad numeric value '" + val + "' for " + key);
        if (!out.emplace(key, v).second)
            throw ConfigError(where + ": duplicate key '" + key + "'");
        pos = next + 1;
    }
    return out;
}

double take_param(std::map<std::string, double>& params, const std::string& key,
                  double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    double v = it->second;
    params.erase(it);
    return v;
}

void reject_leftovers(const std::map<std::string, double>& params,
                      const std::string& where) {
    if (!params.empty())
        throw ConfigError(where + ": unknown parameter '" + params.begin()->first + "'");
}

// Projects a fixed sequence of candidate seeds onto the level set and keeps
// the first that converges.  Seeds sitting at critical points of the
// constraint (zero or rank-deficient jacobian) are skipped, not fatal.
ManifoldPoint locate_level_set_point(const Manifold& m) {
    std::vector<Vec> seeds;
    seeds.emplace_back(m.ambient_dim, 0.0);
    for (int i = 0; i < m.ambient_dim; ++i) {
        Vec e(m.ambient_dim, 0.0);
        e[i] = 1.0;
        seeds.push_back(e);
        e[i] = -1.0;
        seeds.push_back(e);
    }
    seeds.emplace_back(m.ambient_dim, 1.0 / std::sqrt(double(m.ambient_dim)));
    for (const Vec& s : seeds) {
        try {
            ProjectionResult pr = project_to_manifold_info(m, s, {});
            if (on_manifold(m, pr.point)) {
                ManifoldPoint p;
                p.ambient = pr.point;
                return p;
            }
        } catch (const Error&) {
        }
    }
    throw ConfigError(m.name +
                      ": could not locate a point on the level set; supply a start");
}

}  // namespace

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = {
        {"sphere", "dim=2", "unit sphere S^m in R^{m+1}; two stereographic charts"},
        {"flat-torus", "dim=2,period=1", "R^m mod period with the euclidean metric"},
        {"torus", "R=1.1,r=1", "torus of revolution in R^3; angle chart and level set"},
        {"genus2", "", "genus-2 level set (x^2(1-x^2)-y^2)^2 + z^2 = 0.01"},
        {"ellipsoid", "a=1.5,b=1,c=0.75",
         "triaxial ellipsoid; scaled stereographic charts and level set"},
    };
    return entries;
}

std::shared_ptr<const Manifold> make_manifold(const std::string& descriptor) {
    std::string name = descriptor;
    std::string params_text;
    size_t colon = descriptor.find(':');
    if (colon != std::string::npos) {
        name = descriptor.substr(0, colon);
        params_text = descriptor.substr(colon + 1);
    }
    auto params = parse_params(params_text, name);

    if (name == "sphere") {
        int dim = static_cast<int>(take_param(params, "dim", 2));
        reject_leftovers(params, name);
        return make_sphere(dim);
    }
    if (name == "flat-torus") {
        int dim = static_cast<int>(take_param(params, "dim", 2));
        double period = take_param(params, "period", 1.0);
        reject_leftovers(params, name);
        return make_flat_torus(dim, period);
    }
    if (name == "torus") {
        double R = take_param(params, "R", 1.1);
        double r = take_param(params, "r", 1.0);
        reject_leftovers(params, name);
        return make_torus(R, r);
    }
    if (name == "genus2") {
        reject_leftovers(params, name);
        return make_genus2();
    }
    if (name == "ellipsoid") {
        double a = take_param(params, "a", 1.5);
        double b = take_param(params, "b", 1.0);
        double c = take_param(params, "c", 0.75);
        reject_leftovers(params, name);
        return make_ellipsoid(a, b, c);
    }
    throw ConfigError("unknown manifold '" + name + "'; see list-manifolds");
}

std::shared_ptr<const Manifold> make_implicit_manifold(
    int ambient_dim, const std::vector<std::string>& components,
    const std::string& name) {
    if (ambient_dim < 1) throw ConfigError(name + ": dim_ambient must be >= 1");
    if (components.empty()) throw ConfigError(name + ": needs at least one component");
    if (static_cast<int>(components.size()) >= ambient_dim)
        throw ConfigError(name + ": codim must be below the ambient dimension");
    auto mf = std::make_shared<Manifold>();
    mf->name = name;
    mf->ambient_dim = ambient_dim;
    mf->intrinsic_dim = ambient_dim - static_cast<int>(components.size());
    mf->constraint = std::make_shared<ExpressionConstraint>(
        parse_components(components, ambient_dim));
    mf->default_start = locate_level_set_point(*mf);
    return mf;
}

std::shared_ptr<const Manifold> make_parametric_manifold(
    int dim, const std::vector<std::string>& components, const Vec& periods,
    const std::string& name) {
    if (dim < 1) throw ConfigError(name + ": dim must be >= 1");
    if (static_cast<int>(components.size()) < dim)
        throw ConfigError(name + ": needs at least dim ambient components");
    if (static_cast<int>(periods.size()) != dim)
        throw ConfigError(name + ": needs one period per coordinate");
    auto mf = std::make_shared<Manifold>();
    mf->name = name;
    mf->intrinsic_dim = dim;
    mf->ambient_dim = static_cast<int>(components.size());
    auto chart =
        ExpressionChart::periodic_chart(parse_components(components, dim), periods);
    mf->charts.push_back(chart);
    mf->default_start.chart = ChartPoint{0, Vec(dim, 0.0)};
    mf->default_start.ambient = chart->value(Vec(dim, 0.0));
    return mf;
}

}  // namespace mwalk
