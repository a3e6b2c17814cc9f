#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "manifoldwalk/catalog.hpp"
#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/rng.hpp"
#include "manifoldwalk/sampling.hpp"

using namespace mwalk;

TEST_CASE("streams are pure functions of (seed, stream, counter)") {
    RandomStream a(42, 7);
    RandomStream b(42, 7);
    for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

    RandomStream c(42, 8);
    RandomStream d(43, 7);
    bool all_equal_c = true, all_equal_d = true;
    RandomStream a2(42, 7);
    for (int i = 0; i < 8; ++i) {
        uint64_t r = a2.next_u64();
        all_equal_c = all_equal_c && (r == c.next_u64());
        all_equal_d = all_equal_d && (r == d.next_u64());
    }
    CHECK_FALSE(all_equal_c);
    CHECK_FALSE(all_equal_d);
}

TEST_CASE("seek replays draws bit-exactly") {
    RandomStream a(5, 0);
    for (int i = 0; i < 10; ++i) a.next_u64();
    CHECK(a.counter() == 10);
    double u10 = a.uniform01();
    double n_after = a.normal();
    CHECK(a.counter() == 13);  // uniform01 is one draw, normal exactly two

    a.seek(10);
    CHECK(a.uniform01() == u10);
    CHECK(a.normal() == n_after);
}

TEST_CASE("uniform01 range and first moment") {
    RandomStream rng(1);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal moments") {
    RandomStream rng(2);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("unit sphere directions have unit norm; m = 1 gives signs") {
    RandomStream rng(3);
    for (int i = 0; i < 200; ++i) {
        Vec v = sample_unit_sphere(3, rng);
        CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    }
    bool saw_plus = false, saw_minus = false;
    for (int i = 0; i < 64; ++i) {
        Vec v = sample_unit_sphere(1, rng);
        CHECK(std::abs(v[0]) == 1.0);
        saw_plus = saw_plus || v[0] > 0;
        saw_minus = saw_minus || v[0] < 0;
    }
    CHECK(saw_plus);
    CHECK(saw_minus);
}

TEST_CASE("tangent_param directions are metric-unit") {
    Mat g(2, 2);
    g(0, 0) = 4.0;
    g(1, 1) = 1.0;
    RandomStream rng(4);
    for (int i = 0; i < 200; ++i) {
        Vec v = sample_tangent_param(g, rng);
        double quad = 4.0 * v[0] * v[0] + v[1] * v[1];
        CHECK(quad == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("tangent_param with the identity metric replays the raw sphere draw") {
    // The flat-torus fast path: g = I must not perturb a single bit, so a
    // walk on the flat torus is replayable with plain sphere draws.
    RandomStream a(9, 1), b(9, 1);
    for (int i = 0; i < 32; ++i) {
        Vec va = sample_tangent_param(Mat::identity(2), a);
        Vec vb = sample_unit_sphere(2, b);
        CHECK(va[0] == vb[0]);
        CHECK(va[1] == vb[1]);
        CHECK(a.counter() == b.counter());
    }
}

TEST_CASE("degenerate metrics are rejected") {
    Mat g(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = 1e-20;
    RandomStream rng(5);
    CHECK_THROWS_AS(sample_tangent_param(g, rng), DegenerateMetric);
}

TEST_CASE("implicit tangents are unit and orthogonal to the constraint gradient") {
    auto m = make_manifold("sphere:dim=2");
    RandomStream rng(6);
    Vec x = {0.0, 0.0, 1.0};
    for (int i = 0; i < 100; ++i) {
        Vec v = sample_tangent_implicit(*m, x, rng);
        CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(v[2]) < 1e-12);  // gradient at the pole is along z
    }

    auto g2 = make_manifold("genus2");
    Vec y = g2->default_start.ambient;
    Mat df = g2->constraint->jacobian(y);
    for (int i = 0; i < 50; ++i) {
        Vec v = sample_tangent_implicit(*g2, y, rng);
        CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
        double dfv = 0.0;
        for (int j = 0; j < 3; ++j) dfv += df(0, j) * v[j];
        CHECK(std::abs(dfv) < 1e-10);
    }
}
