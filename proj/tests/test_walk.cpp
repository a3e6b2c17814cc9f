#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "manifoldwalk/catalog.hpp"
#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/sampling.hpp"
#include "manifoldwalk/walk.hpp"

using namespace mwalk;

namespace {

WalkConfig base_config(double eps, long long steps) {
    WalkConfig c;
    c.epsilon = eps;
    c.steps = steps;
    c.seed = 11;
    return c;
}

bool same_samples(const WalkResult& a, const WalkResult& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (size_t i = 0; i < a.samples.size(); ++i) {
        const auto& p = a.samples[i];
        const auto& q = b.samples[i];
        if (p.index != q.index || p.time != q.time) return false;
        if (p.point.ambient != q.point.ambient) return false;
        if (p.point.chart.has_value() != q.point.chart.has_value()) return false;
        if (p.point.chart &&
            (p.point.chart->chart_id != q.point.chart->chart_id ||
             p.point.chart->coords != q.point.chart->coords))
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("recording schedule and exact times") {
    auto m = make_manifold("flat-torus:dim=2,period=1");
    WalkConfig c = base_config(0.1, 10);
    c.retraction = RetractionKind::ParamChristoffel;
    c.record_every = 3;
    WalkResult r = run_walk(m, c);
    REQUIRE(r.samples.size() == 5);
    long long expect_idx[] = {0, 3, 6, 9, 10};
    for (int i = 0; i < 5; ++i) {
        CHECK(r.samples[i].index == expect_idx[i]);
        CHECK(r.samples[i].time == 0.1 * 0.1 * expect_idx[i]);
    }
    CHECK(r.epsilon == 0.1);
    CHECK(r.steps == 10);
    CHECK(r.restarts.empty());

    c.record_every = 1;
    CHECK(run_walk(m, c).samples.size() == 11);
}

TEST_CASE("flat torus walk replays from raw stream draws, bitwise") {
    auto m = make_manifold("flat-torus:dim=2,period=1");
    const double eps = 0.17;
    WalkConfig c = base_config(eps, 5);
    c.retraction = RetractionKind::ParamChristoffel;
    c.seed = 7;
    WalkResult r = run_walk(m, c);
    REQUIRE(r.samples.size() == 6);

    const Chart& chart = chart_of(*m, 0);
    RandomStream rng(7, 0);
    Vec u = {0.0, 0.0};
    CHECK(r.samples[0].point.chart->coords == u);
    for (int i = 1; i <= 5; ++i) {
        Vec v = sample_unit_sphere(2, rng);
        u = chart.wrap({u[0] + eps * v[0], u[1] + eps * v[1]});
        CHECK(r.samples[i].point.chart->coords[0] == u[0]);
        CHECK(r.samples[i].point.chart->coords[1] == u[1]);
        CHECK(r.samples[i].point.ambient == u);
    }
}

TEST_CASE("walks are deterministic and streams are independent") {
    auto m = make_manifold("sphere:dim=2");
    WalkConfig c = base_config(0.05, 40);
    WalkResult a = run_walk(m, c);
    WalkResult b = run_walk(m, c);
    CHECK(same_samples(a, b));

    c.stream_id = 1;
    WalkResult other = run_walk(m, c);
    CHECK_FALSE(same_samples(a, other));
}

TEST_CASE("walk validates its configuration") {
    auto m = make_manifold("sphere:dim=2");
    WalkConfig c = base_config(0.1, 5);
    c.epsilon = -1.0;
    CHECK_THROWS_AS(run_walk(m, c), ConfigError);
    c = base_config(0.1, -3);
    CHECK_THROWS_AS(run_walk(m, c), ConfigError);
    c = base_config(0.1, 5);
    c.record_every = 0;
    CHECK_THROWS_AS(run_walk(m, c), ConfigError);
    c = base_config(0.1, 5);
    c.max_restarts = -1;
    CHECK_THROWS_AS(run_walk(m, c), ConfigError);

    // pret needs charts; genus2 has none.
    auto g2 = make_manifold("genus2");
    WalkConfig p = base_config(0.1, 5);
    p.retraction = RetractionKind::ParamChristoffel;
    CHECK_THROWS_AS(run_walk(g2, p), ConfigError);
}

TEST_CASE("explicit start points are validated") {
    auto m = make_manifold("sphere:dim=2");
    WalkConfig c = base_config(0.1, 3);
    ManifoldPoint start;
    start.ambient = {1.0, 0.0, 0.0};
    c.start = start;
    WalkResult r = run_walk(m, c);
    CHECK(r.samples[0].point.ambient == Vec{1.0, 0.0, 0.0});

    start.ambient = {1.05, 0.0, 0.0};
    c.start = start;
    CHECK_THROWS_AS(run_walk(m, c), ConfigError);

    start.ambient = {1.0, 0.0};
    c.start = start;
    CHECK_THROWS_AS(run_walk(m, c), ConfigError);
}

TEST_CASE("implicit walk keeps every sample on the manifold") {
    auto g2 = make_manifold("genus2");
    WalkConfig c = base_config(0.1, 400);
    c.seed = 3;
    WalkResult r = run_walk(g2, c);
    CHECK(r.restarts.empty());
    // The walk's own on-manifold tolerance is eps^3.
    for (const TrajectorySample& s : r.samples) {
        CHECK_FALSE(s.point.chart.has_value());
        CHECK(constraint_residual(*g2, s.point.ambient) < 0.1 * 0.1 * 0.1);
    }
}

TEST_CASE("chart walks hop between charts when needed") {
    auto m = make_manifold("sphere:dim=2");
    WalkConfig c = base_config(0.2, 400);
    c.retraction = RetractionKind::ParamChristoffel;
    c.seed = 12;
    WalkResult r = run_walk(m, c);
    bool seen[2] = {false, false};
    for (const TrajectorySample& s : r.samples) {
        REQUIRE(s.point.chart.has_value());
        seen[s.point.chart->chart_id] = true;
        CHECK(std::abs(norm(s.point.ambient) - 1.0) < 1e-12);
    }
    CHECK(seen[0]);
    CHECK(seen[1]);
}

TEST_CASE("starved projections exhaust the restart budget deterministically") {
    auto m = make_manifold("sphere:dim=2");
    WalkConfig c = base_config(0.05, 20);
    c.newton_max_iters = 0;  // pre-iteration residual always exceeds eps^3
    c.max_restarts = 3;
    CHECK_THROWS_AS(run_walk(m, c), TooManyRestarts);
}

TEST_CASE("oversized chart steps trigger a restart and then succeed") {
    auto m = make_manifold("sphere:dim=2");
    WalkConfig c = base_config(1.4, 60);
    c.retraction = RetractionKind::ParamChristoffel;
    c.seed = 2;
    c.max_restarts = 6;
    WalkResult r = run_walk(m, c);
    CHECK(r.restarts.size() >= 1);
    CHECK(r.epsilon < 1.4);
    CHECK(r.epsilon == doctest::Approx(1.4 * std::pow(0.5, double(r.restarts.size()))));
    for (size_t i = 0; i < r.restarts.size(); ++i) {
        CHECK(r.restarts[i].new_epsilon == r.restarts[i].old_epsilon * 0.5);
        CHECK(r.restarts[i].step_index >= 0);
    }
    // Times are quoted in the final stepsize.
    CHECK(r.samples.back().time == r.epsilon * r.epsilon * 60);
    CHECK(r.samples.size() == 61);
}

TEST_CASE("walks resume from a (point, counter) checkpoint") {
    auto m = make_manifold("flat-torus:dim=2,period=1");
    WalkConfig c = base_config(0.11, 20);
    c.retraction = RetractionKind::ParamChristoffel;
    c.seed = 21;
    WalkResult full = run_walk(m, c);
    REQUIRE(full.samples.size() == 21);

    // 4 u64 draws per step on a 2d chart (two Box-Muller normals).
    WalkStepper stepper(m, 0.11, RetractionKind::ParamChristoffel,
                        ProjectionSettings::Variant::FullNewton, 50,
                        full.samples[10].point, RandomStream(21, 0));
    stepper.stream().seek(40);
    for (int i = 0; i < 10; ++i) stepper.advance();
    CHECK(stepper.current().chart->coords == full.samples[20].point.chart->coords);
    CHECK(stepper.current().ambient == full.samples[20].point.ambient);
}

TEST_CASE("ensembles are schedule independent and walker-indexed") {
    auto m = make_manifold("flat-torus:dim=2,period=1");
    WalkConfig c = base_config(0.1, 30);
    c.seed = 5;
    c.retraction = RetractionKind::ParamChristoffel;

    std::vector<WalkResult> one = run_ensemble(m, c, 6, 1);
    std::vector<WalkResult> four = run_ensemble(m, c, 6, 4);
    REQUIRE(one.size() == 6);
    REQUIRE(four.size() == 6);
    for (int j = 0; j < 6; ++j) {
        CHECK(one[j].stream_id == static_cast<uint64_t>(j));
        CHECK(same_samples(one[j], four[j]));
    }

    // Walker j is exactly the single walk on stream j.
    WalkConfig cj = c;
    cj.stream_id = 4;
    CHECK(same_samples(run_walk(m, cj), one[4]));

    CHECK_FALSE(same_samples(one[0], one[1]));
    CHECK_THROWS_AS(run_ensemble(m, c, 0, 1), ConfigError);
}

TEST_CASE("thread count resolution honors the environment") {
    setenv("MANIFOLD_WALK_THREADS", "4", 1);
    CHECK(default_thread_count() == 4);
    setenv("MANIFOLD_WALK_THREADS", "abc", 1);
    CHECK_THROWS_AS(default_thread_count(), ConfigError);
    setenv("MANIFOLD_WALK_THREADS", "0", 1);
    CHECK_THROWS_AS(default_thread_count(), ConfigError);
    unsetenv("MANIFOLD_WALK_THREADS");
    CHECK(default_thread_count() >= 1);
}

TEST_CASE("zero-step walks record the start point only") {
    auto m = make_manifold("sphere:dim=2");
    WalkConfig c = base_config(0.1, 0);
    WalkResult r = run_walk(m, c);
    REQUIRE(r.samples.size() == 1);
    CHECK(r.samples[0].index == 0);
    CHECK(r.samples[0].time == 0.0);
    CHECK(r.samples[0].point.ambient == m->default_start.ambient);
}
