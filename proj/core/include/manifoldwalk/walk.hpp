#pragma once

// Geodesic random walks: repeated unit-tangent sampling and retraction with
// spatial stepsize ε; physical time after i steps is ε²·i.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "manifoldwalk/geometry.hpp"
#include "manifoldwalk/retraction.hpp"
#include "manifoldwalk/rng.hpp"

namespace mwalk {

struct WalkConfig {
    double epsilon = 0.1;
    long long steps = 0;
    RetractionKind retraction = RetractionKind::ProjectNewton;
    uint64_t seed = 0;
    uint64_t stream_id = 0;
    // Defaults to the manifold's canonical start point.
    std::optional<ManifoldPoint> start;
    // Every record_every-th step is stored; step 0 and the final step always.
    long long record_every = 1;
    // Stepsize halvings allowed before the walk gives up.
    int max_restarts = 8;
    ProjectionSettings::Variant newton_variant = ProjectionSettings::Variant::FullNewton;
    int newton_max_iters = 50;
};

struct RestartEvent {
    long long step_index;  // step at which the attempt failed
    double old_epsilon;
    double new_epsilon;
};

struct TrajectorySample {
    long long index;
    double time;  // epsilon² · index, exactly
    ManifoldPoint point;
};

struct WalkResult {
    std::vector<TrajectorySample> samples;
    std::vector<RestartEvent> restarts;
    double epsilon = 0.0;  // stepsize of the attempt that completed
    long long steps = 0;
    uint64_t seed = 0;
    uint64_t stream_id = 0;
    RetractionKind retraction = RetractionKind::ProjectNewton;
};

// One fixed-stepsize attempt.  advance() throws NoConvergence,
// ChartDomainViolation or NoChartWithMargin when the stepsize is too coarse;
// run_walk translates those into restarts.  Exposing the stream counter makes
// walks resumable from a (point, counter) checkpoint.
class WalkStepper {
public:
    WalkStepper(std::shared_ptr<const Manifold> manifold, double epsilon,
                RetractionKind kind, ProjectionSettings::Variant newton_variant,
                int newton_max_iters, ManifoldPoint start, RandomStream rng);

    void advance();
    const ManifoldPoint& current() const { return current_; }
    RandomStream& stream() { return rng_; }
    double epsilon() const { return epsilon_; }

private:
    void step_chart_route();
    void step_ambient_route();

    std::shared_ptr<const Manifold> manifold_;
    double epsilon_;
    RetractionKind kind_;
    ProjectionSettings projection_;
    bool chart_route_;
    ManifoldPoint current_;
    RandomStream rng_;
};

// Full walk with the restart policy: on a recoverable failure the entire walk
// restarts from the initial point with ε/2 (fresh stream counter), up to
// max_restarts halvings; then TooManyRestarts.
WalkResult run_walk(std::shared_ptr<const Manifold> manifold, const WalkConfig& config);

// Independent walkers; walker j draws from stream_id j.  Results are
// identical for every thread count.  threads = 0 uses default_thread_count().
std::vector<WalkResult> run_ensemble(std::shared_ptr<const Manifold> manifold,
                                     const WalkConfig& config, int walkers,
                                     int threads = 0);

// MANIFOLD_WALK_THREADS when set (must be >= 1), hardware concurrency
// otherwise.
int default_thread_count();

}  // namespace mwalk
