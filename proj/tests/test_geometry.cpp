#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "manifoldwalk/catalog.hpp"
#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/geometry.hpp"

using namespace mwalk;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("sphere charts round-trip and land on the sphere") {
    auto m = make_manifold("sphere:dim=2");
    REQUIRE(m->charts.size() == 2);
    REQUIRE(m->intrinsic_dim == 2);
    REQUIRE(m->ambient_dim == 3);

    const Chart& c0 = chart_of(*m, 0);
    Vec u = {0.3, -0.2};
    Vec x = c0.value(u);
    CHECK(norm(x) == doctest::Approx(1.0).epsilon(1e-14));
    auto back = c0.invert(x);
    REQUIRE(back.has_value());
    CHECK((*back)[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK((*back)[1] == doctest::Approx(-0.2).epsilon(1e-14));
}

TEST_CASE("chart selection prefers the lowest id and honors margins") {
    auto m = make_manifold("sphere:dim=2");
    CHECK(select_chart(*m, {0.0, 0.0, 1.0}, 0.5) == 0);
    CHECK(select_chart(*m, {0.0, 0.0, -1.0}, 0.5) == 1);
    // No chart keeps a margin wider than its whole domain.
    CHECK_THROWS_AS(select_chart(*m, {0.0, 0.0, 1.0}, 5.0), NoChartWithMargin);
}

TEST_CASE("sphere metric at the chart center is conformal with factor 4") {
    auto m = make_manifold("sphere:dim=2");
    Mat g = metric_at(*m, ChartPoint{0, {0.0, 0.0}});
    CHECK(g(0, 0) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(g(1, 1) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(g(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("torus metric and christoffel symbols match closed forms") {
    // Coordinates (s, t): phi = ((R + r cos s) cos t, (R + r cos s) sin t,
    // r sin s) with R = 1.1, r = 1.  g = diag(r^2, (R + r cos s)^2);
    // nonzero symbols: G^s_tt = (R + r cos s) sin s / r,
    // G^t_st = -r sin s / (R + r cos s).
    auto m = make_manifold("torus:R=1.1,r=1.0");
    ChartPoint p{0, {kPi / 2.0, 0.7}};
    Mat g = metric_at(*m, p);
    CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g(1, 1) == doctest::Approx(1.21).epsilon(1e-12));
    CHECK(g(0, 1) == doctest::Approx(0.0));

    Tensor3 gamma = christoffel_at(*m, p);
    CHECK(gamma(0, 1, 1) == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(gamma(1, 0, 1) == doctest::Approx(-1.0 / 1.1).epsilon(1e-12));
    CHECK(gamma(1, 1, 0) == doctest::Approx(-1.0 / 1.1).epsilon(1e-12));
    CHECK(gamma(0, 0, 0) == doctest::Approx(0.0));
    CHECK(gamma(1, 1, 1) == doctest::Approx(0.0));
    CHECK(gamma(0, 0, 1) == doctest::Approx(0.0));

    Tensor3 fd = christoffel_fd(*m, ChartPoint{0, {0.7, 1.3}});
    Tensor3 exact = christoffel_at(*m, ChartPoint{0, {0.7, 1.3}});
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(fd(k, i, j) == doctest::Approx(exact(k, i, j)).epsilon(1e-6));
}

TEST_CASE("flat torus chart is the identity with zero christoffel symbols") {
    auto m = make_manifold("flat-torus:dim=2,period=1");
    const Chart& c = chart_of(*m, 0);
    CHECK(c.periodic());
    Vec w = c.wrap({1.3, -0.2});
    CHECK(w[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(0.8).epsilon(1e-14));

    Mat g = metric_at(*m, ChartPoint{0, {0.4, 0.9}});
    CHECK(g(0, 0) == 1.0);
    CHECK(g(1, 1) == 1.0);
    CHECK(g(0, 1) == 0.0);
    Tensor3 gamma = christoffel_at(*m, ChartPoint{0, {0.4, 0.9}});
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(gamma(k, i, j) == 0.0);
}

TEST_CASE("ellipsoid charts agree with the level set") {
    auto m = make_manifold("ellipsoid:a=1.5,b=1,c=0.75");
    REQUIRE(m->has_charts());
    REQUIRE(m->has_constraint());
    const Chart& c0 = chart_of(*m, 0);
    Vec u = {0.4, -0.3};
    Vec x = c0.value(u);
    Vec f = m->constraint->value(x);
    CHECK(std::abs(f[0]) < 1e-12);
    auto back = c0.invert(x);
    REQUIRE(back.has_value());
    CHECK((*back)[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK((*back)[1] == doctest::Approx(-0.3).epsilon(1e-12));

    // Antipodal chart covers the south side.
    CHECK(select_chart(*m, {0.0, 0.0, -0.75}, 0.1) == 1);
}

TEST_CASE("genus2 start point and tangent frame") {
    auto m = make_manifold("genus2");
    CHECK_FALSE(m->has_charts());
    Vec x = m->default_start.ambient;
    CHECK(on_manifold(*m, x));
    auto frame = tangent_frame_implicit(*m, x);
    REQUIRE(frame.size() == 2);
    Mat df = m->constraint->jacobian(x);
    for (const Vec& e : frame) {
        CHECK(norm(e) == doctest::Approx(1.0).epsilon(1e-12));
        double dfe = 0.0;
        for (int j = 0; j < 3; ++j) dfe += df(0, j) * e[j];
        CHECK(std::abs(dfe) < 1e-10);
    }
    CHECK(std::abs(dot(frame[0], frame[1])) < 1e-12);
}

TEST_CASE("constraint residual is the first-order distance estimate") {
    auto m = make_manifold("sphere:dim=2");
    // f = 0.21, |df| = 2.2 at (0, 0, 1.1).
    CHECK(constraint_residual(*m, {0.0, 0.0, 1.1}) ==
          doctest::Approx(0.21 / 2.2).epsilon(1e-12));
    CHECK(on_manifold(*m, {0.0, 0.0, 1.0}));
    CHECK_FALSE(on_manifold(*m, {0.0, 0.0, 1.1}));
}

TEST_CASE("ambient/chart conversions agree") {
    auto m = make_manifold("torus:R=1.1,r=1.0");
    ChartPoint p{0, {1.2, 2.5}};
    Vec x = chart_to_ambient(*m, p);
    auto q = ambient_to_chart(*m, x, 0);
    REQUIRE(q.has_value());
    CHECK(q->coords[0] == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(q->coords[1] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("catalog descriptors validate their parameters") {
    CHECK_THROWS_AS(make_manifold("nosuch"), ConfigError);
    CHECK_THROWS_AS(make_manifold("sphere:radius=2"), ConfigError);
    CHECK_THROWS_AS(make_manifold("torus:R=1,r=2"), ConfigError);  // needs R > r
    CHECK_THROWS_AS(make_manifold("sphere:dim=0"), ConfigError);
    CHECK_THROWS_AS(make_manifold("flat-torus:dim=2,period=-1"), ConfigError);
    CHECK(make_manifold("torus") != nullptr);  // defaults R=1.1, r=1
}

TEST_CASE("expression-backed manifolds from user text") {
    auto cyl = make_implicit_manifold(3, {"x^2 + y^2 - 1"});
    CHECK(cyl->intrinsic_dim == 2);
    CHECK(cyl->has_constraint());
    CHECK_FALSE(cyl->has_charts());
    CHECK(on_manifold(*cyl, {1.0, 0.0, 3.0}));

    auto circle = make_parametric_manifold(1, {"cos(x1)", "sin(x1)"},
                                           {2.0 * kPi});
    CHECK(circle->intrinsic_dim == 1);
    CHECK(circle->ambient_dim == 2);
    Vec x = chart_to_ambient(*circle, ChartPoint{0, {0.5}});
    CHECK(x[0] == doctest::Approx(std::cos(0.5)));

    CHECK_THROWS_AS(make_implicit_manifold(3, {"x^2", "y^2", "z^2"}), ConfigError);
    CHECK_THROWS_AS(make_implicit_manifold(3, {"x1 + * x2"}), SyntaxError);
}
