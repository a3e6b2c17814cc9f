// Acceptance gate: one line per criterion, nonzero exit if any fails.
//
// Criteria (tolerances pinned here, not configurable):
//   1. third-order retraction/exponential agreement on sphere and torus
//   2. vanishing tangential acceleration, with a broken negative control
//   3. generator convergence on S^2 under deterministic quadrature
//   4. heat-kernel decay of the first spherical harmonic against the
//      spectral oracle exp(-l(l+m-1) t / (2m))
//   5. stationary measures: flat torus uniform, embedded torus area law
//   6. large implicit walk completes on budget with no restarts
//   7. cover-time arithmetic
//   8. CLI determinism, byte for byte, including across thread counts
//
// Usage: acceptance <path-to-mwalk-binary>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "manifoldwalk/catalog.hpp"
#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/validate.hpp"
#include "manifoldwalk/walk.hpp"

using namespace mwalk;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::vector<double> tau_grid() {
    std::vector<double> taus(8);
    const double lo = 1e-3, hi = std::pow(10.0, -1.5);
    for (int i = 0; i < 8; ++i) taus[i] = lo * std::pow(hi / lo, i / 7.0);
    return taus;
}

ProjectionSettings tight_projection() {
    ProjectionSettings s;
    s.max_iters = 100;
    s.threshold_scale = 1e-5;
    return s;
}

void criterion_1_order() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> taus = tau_grid();

    RandomStream rng_a(101);
    auto sphere = make_manifold("sphere:dim=2");
    OrderFit pi_fit = retraction_order_fit(
        sphere, make_step_map(sphere, RetractionKind::ProjectNewton), taus, 32,
        rng_a);

    RandomStream rng_b(102);
    auto torus = make_manifold("torus:R=1.1,r=1.0");
    OrderFit p_fit = retraction_order_fit(
        torus, make_step_map(torus, RetractionKind::ParamChristoffel), taus, 32,
        rng_b);

    double elapsed = seconds_since(t0);
    bool pass = pi_fit.slope >= 2.7 && pi_fit.slope <= 3.3 && p_fit.slope >= 2.7 &&
                p_fit.slope <= 3.3 && elapsed < 10.0;
    report(1, pass,
           fmt("order slopes piret/sphere=%.3f pret/torus=%.3f (want [2.7, 3.3]), "
               "%.1fs",
               pi_fit.slope, p_fit.slope, elapsed));
}

void criterion_2_acceleration() {
    auto t0 = std::chrono::steady_clock::now();
    auto sphere = make_manifold("sphere:dim=2");
    StepMap piret =
        make_step_map(sphere, RetractionKind::ProjectNewton, tight_projection());
    StepMap pret = make_step_map(sphere, RetractionKind::ParamChristoffel);
    StepMap broken = make_broken_sphere_step(sphere);

    RandomStream rng(201);
    double worst_pi = 0.0, worst_p = 0.0, broken_sum = 0.0;
    for (int i = 0; i < 100; ++i) {
        ManifoldPoint p = random_manifold_point(*sphere, rng);
        Vec v = random_unit_tangent(*sphere, p, rng);
        worst_pi = std::max(
            worst_pi,
            covariant_acceleration(*sphere, piret, p.ambient, v).tangential_norm);
        worst_p = std::max(
            worst_p,
            covariant_acceleration(*sphere, pret, p.ambient, v).tangential_norm);
        broken_sum +=
            covariant_acceleration(*sphere, broken, p.ambient, v).tangential_norm;
    }
    double broken_mean = broken_sum / 100.0;
    double elapsed = seconds_since(t0);
    bool pass = worst_pi <= 1e-5 && worst_p <= 1e-5 && broken_mean >= 1e-2 &&
                elapsed < 5.0;
    report(2, pass,
           fmt("tangential accel max piret=%.2e pret=%.2e (want <= 1e-5), "
               "broken mean=%.2e (want >= 1e-2), %.1fs",
               worst_pi, worst_p, broken_mean, elapsed));
}

void criterion_3_generator() {
    auto t0 = std::chrono::steady_clock::now();
    auto sphere = make_manifold("sphere:dim=2");
    StepMap piret =
        make_step_map(sphere, RetractionKind::ProjectNewton, tight_projection());
    RandomStream rng(301);

    const std::vector<ChartPoint> probes = {{0, {0.0, 0.0}},
                                            {0, {0.35, 0.1}},
                                            {0, {-0.4, 0.55}},
                                            {0, {0.8, -0.3}},
                                            {0, {0.12, 0.66}}};
    struct Obs {
        const char* name;
        AmbientFn f;
    };
    const Obs fs[] = {
        {"z", [](const Vec& x) { return x[2]; }},
        {"z2", [](const Vec& x) { return x[2] * x[2] - 1.0 / 3.0; }},
    };

    bool pass = true;
    std::string detail;
    for (const Obs& obs : fs) {
        double errors[3];
        int k = 0;
        for (double eps : {0.1, 0.05, 0.025}) {
            double worst = 0.0;
            for (const ChartPoint& u : probes)
                worst = std::max(
                    worst,
                    generator_error(*sphere, piret, obs.f, u, eps, rng).abs_error);
            errors[k++] = worst;
        }
        bool mono = errors[1] <= errors[0] / 1.5 && errors[2] <= errors[1] / 1.5;
        bool small = errors[2] <= 5e-3;
        pass = pass && mono && small;
        detail += fmt("%s: %.2e/%.2e/%.2e ", obs.name, errors[0], errors[1],
                      errors[2]);
    }
    double elapsed = seconds_since(t0);
    pass = pass && elapsed < 10.0;
    report(3, pass,
           detail + fmt("(ratio >= 1.5 per halving, final <= 5e-3), %.1fs", elapsed));
}

void criterion_4_heat() {
    auto t0 = std::chrono::steady_clock::now();
    auto sphere = make_manifold("sphere:dim=2");
    WalkConfig c;
    c.epsilon = 0.02;
    c.steps = 1250;  // t = 0.5
    c.retraction = RetractionKind::ProjectNewton;
    c.seed = 401;
    c.record_every = 1250;
    std::vector<WalkResult> runs = run_ensemble(sphere, c, 50000, 0);
    HeatDecay d = heat_kernel_decay(*sphere, runs, 1, {0.0, 0.0, 1.0});

    // Spectral oracle for the unit-step walk: the generator limit is
    // Laplace-Beltrami over 2m, so the l = 1 harmonic decays like
    // exp(-l(l+m-1) t/(2m)) = exp(-t/2) on S^2; at t = 0.5 that is
    // exp(-0.25) = 0.778801.
    double oracle = std::exp(-0.25);
    double err = std::abs(d.empirical - oracle);
    bool pass = err <= 0.012;
    report(4, pass,
           fmt("heat decay mean z=%.6f vs oracle %.6f, |diff|=%.4f (want <= "
               "0.012), stderr=%.4f, %.0fs",
               d.empirical, oracle, err, d.std_error, seconds_since(t0)));
}

void criterion_5_density() {
    auto t0 = std::chrono::steady_clock::now();
    auto flat = make_manifold("flat-torus:dim=2,period=1");
    WalkConfig cf;
    cf.epsilon = 0.5;
    cf.steps = 111200;  // 10% burn-in leaves 100081 samples
    cf.retraction = RetractionKind::ParamChristoffel;
    cf.seed = 501;
    DensityTest flat_dt =
        stationary_density_test(*flat, run_walk(flat, cf), {16, 16});

    auto torus = make_manifold("torus:R=1.1,r=1.0");
    WalkConfig ct;
    ct.epsilon = 0.1;
    ct.steps = 1112000;  // 10% burn-in leaves 1000801 samples
    ct.retraction = RetractionKind::ParamChristoffel;
    ct.seed = 502;
    DensityTest torus_dt =
        stationary_density_test(*torus, run_walk(torus, ct), {32, 1});

    bool pass = flat_dt.samples_used >= 100000 && flat_dt.total_variation <= 0.05 &&
                torus_dt.samples_used >= 1000000 && torus_dt.total_variation <= 0.05;
    report(5, pass,
           fmt("stationary TV flat=%.4f (%lld samples, 256 bins) "
               "torus s-marginal=%.4f (%lld samples, 32 bins) (want <= 0.05), %.0fs",
               flat_dt.total_variation, flat_dt.samples_used,
               torus_dt.total_variation, torus_dt.samples_used,
               seconds_since(t0)));
}

void criterion_6_genus2() {
    auto t0 = std::chrono::steady_clock::now();
    auto g2 = make_manifold("genus2");
    WalkConfig c;
    c.epsilon = 0.1;
    c.steps = 100000;
    c.retraction = RetractionKind::ProjectNewton;
    c.seed = 601;
    WalkResult r = run_walk(g2, c);

    double worst = 0.0;
    for (const TrajectorySample& s : r.samples)
        worst = std::max(worst, constraint_residual(*g2, s.point.ambient));
    double elapsed = seconds_since(t0);
    // The walk's on-manifold threshold is eps^3 = 1e-3.
    bool pass = r.restarts.empty() && worst <= 1e-3 && elapsed < 60.0 &&
                r.samples.size() == 100001;
    report(6, pass,
           fmt("genus2 100000-step walk: %zu restarts, max residual %.2e "
               "(want <= 1e-3), %zu samples, %.1fs (want < 60)",
               r.restarts.size(), worst, r.samples.size(), elapsed));
}

void criterion_7_covertime() {
    long long a = cover_time_steps(2, 1.0, 0.01, 0.1);
    long long b = cover_time_steps(3, 1.0, 0.1, 0.1);
    bool pass = a == 1351 && b == 1100;
    report(7, pass, fmt("cover-time bounds %lld (want 1351) and %lld (want 1100)", a, b));
}

int run_cmd(const std::string& cmd) {
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_8_determinism(const std::string& cli) {
    std::string quiet = " > acc_cli_out.txt 2>&1";

    std::string walk_cmd = cli +
                           " walk --manifold torus:R=1.1,r=1.0 --retraction pret "
                           "--eps 0.1 --steps 2000 --seed 99 --out acc_walk.csv" +
                           quiet;
    bool pass = run_cmd(walk_cmd) == 0;
    std::string walk_a = slurp("acc_walk.csv");
    pass = pass && run_cmd(walk_cmd) == 0 && walk_a == slurp("acc_walk.csv") &&
           !walk_a.empty();

    std::string ens_cmd = cli +
                          " ensemble --manifold flat-torus:dim=2,period=1 "
                          "--retraction pret --eps 0.1 --steps 200 --seed 7 "
                          "--walkers 8 --out acc_ens.csv" +
                          quiet;
    pass = pass && run_cmd("MANIFOLD_WALK_THREADS=1 " + ens_cmd) == 0;
    std::string ens_one = slurp("acc_ens.csv");
    pass = pass && run_cmd("MANIFOLD_WALK_THREADS=4 " + ens_cmd) == 0 &&
           ens_one == slurp("acc_ens.csv") && !ens_one.empty();

    std::string val_cmd = cli +
                          " validate order --manifold sphere:dim=2 --retraction "
                          "piret --probes 8 --seed 3 --out acc_order.json" +
                          quiet;
    pass = pass && run_cmd(val_cmd) == 0;
    std::string val_a = slurp("acc_order.json");
    pass = pass && run_cmd(val_cmd) == 0 && val_a == slurp("acc_order.json") &&
           !val_a.empty();

    report(8, pass,
           fmt("CLI determinism: walk %zuB, ensemble %zuB across thread counts, "
               "order report %zuB",
               walk_a.size(), ens_one.size(), val_a.size()));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <mwalk-binary>\n");
        return 2;
    }
    const std::string cli = argv[1];

    criterion_1_order();
    criterion_2_acceleration();
    criterion_3_generator();
    criterion_4_heat();
    criterion_5_density();
    criterion_6_genus2();
    criterion_7_covertime();
    criterion_8_determinism(cli);

    if (g_failures == 0) {
        std::printf("acceptance: all 8 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
