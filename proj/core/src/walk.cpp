#include "manifoldwalk/walk.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/sampling.hpp"

namespace mwalk {
namespace {

bool uses_chart_route(const Manifold& m, RetractionKind kind) {
    switch (kind) {
        case RetractionKind::ParamChristoffel:
            if (!m.has_charts())
                throw ConfigError("pret walk requires a parameterized manifold");
            return true;
        case RetractionKind::ProjectNewton:
            if (!m.has_constraint())
                throw ConfigError("piret walk requires an implicit manifold");
            return false;
        case RetractionKind::ExactExp:
            switch (m.exact_exp) {
                case Manifold::ExactExpForm::FlatTorus: return true;
                case Manifold::ExactExpForm::UnitSphere:
                    if (!m.has_constraint())
                        throw ConfigError("exact sphere walk needs the implicit form");
                    return false;
                case Manifold::ExactExpForm::None: break;
            }
            throw OracleUnavailable("no closed-form exponential for " + m.name);
        case RetractionKind::GeodesicODE:
            if (m.has_charts()) return true;
            if (m.has_constraint()) return false;
            throw OracleUnavailable("ode walk needs charts or a constraint");
    }
    throw ConfigError("invalid retraction kind");
}

ManifoldPoint resolve_start(const Manifold& m, bool chart_route,
                            ManifoldPoint start, double epsilon) {
    if (chart_route) {
        if (!start.chart) {
            if (start.ambient.empty())
                throw ConfigError("walk start point is empty");
            int id = select_chart(m, start.ambient, 0.0);
            auto p = ambient_to_chart(m, start.ambient, id);
            if (!p)
                throw ConfigError("start point cannot be mapped into a chart");
            start.chart = *p;
        }
        const Chart& chart = chart_of(m, start.chart->chart_id);
        start.chart->coords = chart.wrap(start.chart->coords);
        if (!chart.contains(start.chart->coords, 0.0))
            throw ConfigError("start coordinates are outside the chart domain");
        start.ambient = chart_to_ambient(m, *start.chart);
        return start;
    }
    if (start.ambient.empty()) {
        if (!start.chart || !m.has_charts())
            throw ConfigError("walk start point is empty");
        start.ambient = chart_to_ambient(m, *start.chart);
    }
    if (static_cast<int>(start.ambient.size()) != m.ambient_dim)
        throw ConfigError("start point has the wrong ambient dimension");
    double tol = std::max(epsilon * epsilon * epsilon, kOnManifoldTolerance);
    if (!on_manifold(m, start.ambient, tol))
        throw ConfigError("start point is not on the manifold within tolerance");
    start.chart.reset();
    return start;
}

}  // namespace

WalkStepper::WalkStepper(std::shared_ptr<const Manifold> manifold, double epsilon,
                         RetractionKind kind,
                         ProjectionSettings::Variant newton_variant,
                         int newton_max_iters, ManifoldPoint start, RandomStream rng)
    : manifold_(std::move(manifold)), epsilon_(epsilon), kind_(kind),
      chart_route_(uses_chart_route(*manifold_, kind)),
      current_(resolve_start(*manifold_, chart_route_, std::move(start), epsilon)),
      rng_(rng) {
    projection_.max_iters = newton_max_iters;
    projection_.threshold_scale = epsilon;
    projection_.variant = newton_variant;
}

void WalkStepper::advance() {
    if (chart_route_) step_chart_route();
    else step_ambient_route();
}

void WalkStepper::step_chart_route() {
    const Manifold& m = *manifold_;
    ChartPoint& cp = *current_.chart;
    const Chart* chart = &chart_of(m, cp.chart_id);
    Mat g = metric_at(m, cp);

    // The coordinate image of an ε-step fits in a ball of radius
    // margin_scale(g)·ε; switch charts while that ball still fits.
    double margin = margin_scale(g) * epsilon_;
    if (!chart->contains(cp.coords, margin)) {
        int id = select_chart(m, current_.ambient, margin);
        auto np = ambient_to_chart(m, current_.ambient, id);
        if (!np)
            throw NoChartWithMargin("replacement chart has no closed-form inverse");
        cp = *np;
        chart = &chart_of(m, cp.chart_id);
        g = metric_at(m, cp);
    }

    Vec vt = sample_tangent_param(g, rng_);
    switch (kind_) {
        case RetractionKind::ParamChristoffel:
            cp = p_ret(m, cp, scale(vt, epsilon_));
            break;
        case RetractionKind::ExactExp: {
            // Flat torus: geodesics are straight coordinate lines.
            Vec u = cp.coords;
            axpy(u, epsilon_, vt);
            u = chart->wrap(std::move(u));
            if (!chart->contains(u, 0.0))
                throw ChartDomainViolation("exact step left the chart domain");
            cp.coords = std::move(u);
            break;
        }
        case RetractionKind::GeodesicODE:
            cp = exp_chart_ode(m, cp, vt, epsilon_);
            break;
        default:
            throw ConfigError("invalid chart-route retraction");
    }
    current_.ambient = chart_to_ambient(m, cp);
}

void WalkStepper::step_ambient_route() {
    const Manifold& m = *manifold_;
    Vec v = sample_tangent_implicit(m, current_.ambient, rng_);
    switch (kind_) {
        case RetractionKind::ProjectNewton:
            current_.ambient = pi_ret(m, current_.ambient, scale(v, epsilon_), projection_);
            break;
        case RetractionKind::ExactExp:
            current_.ambient = exp_reference(m, current_.ambient, v, epsilon_);
            break;
        case RetractionKind::GeodesicODE:
            current_.ambient = exp_ambient_ode(m, current_.ambient, v, epsilon_);
            break;
        default:
            throw ConfigError("invalid ambient-route retraction");
    }
}

WalkResult run_walk(std::shared_ptr<const Manifold> manifold, const WalkConfig& config) {
    if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (config.steps < 0) throw ConfigError("steps must be non-negative");
    if (config.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (config.max_restarts < 0) throw ConfigError("max_restarts must be >= 0");

    WalkResult out;
    out.seed = config.seed;
    out.stream_id = config.stream_id;
    out.retraction = config.retraction;
    out.steps = config.steps;

    const ManifoldPoint start = config.start ? *config.start : manifold->default_start;
    double eps = config.epsilon;

    for (int attempt = 0;; ++attempt) {
        WalkStepper stepper(manifold, eps, config.retraction, config.newton_variant,
                            config.newton_max_iters, start,
                            RandomStream(config.seed, config.stream_id));
        out.samples.clear();
        out.samples.push_back(TrajectorySample{0, 0.0, stepper.current()});

        long long failed_at = 0;
        try {
            for (long long i = 1; i <= config.steps; ++i) {
                failed_at = i;
                stepper.advance();
                if (i % config.record_every == 0 || i == config.steps)
                    out.samples.push_back(TrajectorySample{
                        i, eps * eps * static_cast<double>(i), stepper.current()});
            }
            out.epsilon = eps;
            return out;
        } catch (const NoConvergence&) {
        } catch (const ChartDomainViolation&) {
        } catch (const NoChartWithMargin&) {
        }

        if (attempt >= config.max_restarts)
            throw TooManyRestarts("walk failed after " + std::to_string(attempt) +
                                  " stepsize halvings (check the configuration)");
        out.restarts.push_back(RestartEvent{failed_at, eps, eps * 0.5});
        eps *= 0.5;
    }
}

int default_thread_count() {
    if (const char* env = std::getenv("MANIFOLD_WALK_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError("MANIFOLD_WALK_THREADS must be a positive integer");
        return static_cast<int>(std::min(v, 1024L));
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

std::vector<WalkResult> run_ensemble(std::shared_ptr<const Manifold> manifold,
                                     const WalkConfig& config, int walkers,
                                     int threads) {
    if (walkers < 1) throw ConfigError("ensemble needs at least one walker");
    if (threads <= 0) threads = default_thread_count();
    threads = std::min(threads, walkers);

    std::vector<WalkResult> results(walkers);
    std::vector<std::exception_ptr> errors(walkers);
    std::atomic<int> next{0};

    auto worker = [&]() {
        for (;;) {
            int j = next.fetch_add(1);
            if (j >= walkers) return;
            WalkConfig c = config;
            c.stream_id = static_cast<uint64_t>(j);
            try {
                results[j] = run_walk(manifold, c);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (int j = 0; j < walkers; ++j)
        if (errors[j]) std::rethrow_exception(errors[j]);
    return results;
}

}  // namespace mwalk
