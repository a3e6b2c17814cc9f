// Microbenchmarks for the per-step hot paths: chart steps with the
// Christoffel correction, Newton projection steps, tangent sampling, and
// expression jets.

#include <benchmark/benchmark.h>

#include "manifoldwalk/catalog.hpp"
#include "manifoldwalk/expr.hpp"
#include "manifoldwalk/retraction.hpp"
#include "manifoldwalk/rng.hpp"
#include "manifoldwalk/sampling.hpp"
#include "manifoldwalk/walk.hpp"

namespace {

using namespace mwalk;

void bm_pret_torus_step(benchmark::State& state) {
    auto m = make_manifold("torus:R=1.1,r=1.0");
    ChartPoint x{0, {0.9, 0.4}};
    Vec v = {0.07, -0.05};
    for (auto _ : state) {
        ChartPoint y = p_ret(*m, x, v);
        benchmark::DoNotOptimize(y.coords.data());
    }
}
BENCHMARK(bm_pret_torus_step);

void bm_piret_sphere_step(benchmark::State& state) {
    auto m = make_manifold("sphere:dim=2");
    Vec x = {0.0, 0.0, 1.0};
    Vec v = {0.1, 0.0, 0.0};
    for (auto _ : state) {
        Vec y = pi_ret(*m, x, v);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(bm_piret_sphere_step);

void bm_piret_genus2_step(benchmark::State& state) {
    auto m = make_manifold("genus2");
    Vec x = m->default_start.ambient;
    RandomStream rng(1);
    Vec v = scale(sample_tangent_implicit(*m, x, rng), 0.1);
    for (auto _ : state) {
        Vec y = pi_ret(*m, x, v);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(bm_piret_genus2_step);

void bm_tangent_sampling_implicit(benchmark::State& state) {
    auto m = make_manifold("genus2");
    Vec x = m->default_start.ambient;
    RandomStream rng(2);
    for (auto _ : state) {
        Vec v = sample_tangent_implicit(*m, x, rng);
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(bm_tangent_sampling_implicit);

void bm_expression_jet(benchmark::State& state) {
    Ast f = parse_expression("(x^2 (1 - x^2) - y^2)^2 + z^2 - 0.01", 3);
    Vec p = {0.3, 0.2, 0.09};
    for (auto _ : state) {
        Jet2 jet = eval_jet(f, p);
        benchmark::DoNotOptimize(jet.value);
    }
}
BENCHMARK(bm_expression_jet);

void bm_walk_1000_steps_torus(benchmark::State& state) {
    auto m = make_manifold("torus:R=1.1,r=1.0");
    WalkConfig c;
    c.epsilon = 0.1;
    c.steps = 1000;
    c.retraction = RetractionKind::ParamChristoffel;
    c.record_every = 1000;
    for (auto _ : state) {
        WalkResult r = run_walk(m, c);
        benchmark::DoNotOptimize(r.samples.data());
    }
}
BENCHMARK(bm_walk_1000_steps_torus);

}  // namespace

BENCHMARK_MAIN();
