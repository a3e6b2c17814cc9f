#include "manifoldwalk/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/sampling.hpp"

namespace mwalk {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kTransitionAngles = 256;

double metric_det(const Mat& g) {
    int d = g.rows();
    if (d == 1) return g(0, 0);
    if (d == 2) return g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    SymEig eig = jacobi_eigensolve(g);
    double det = 1.0;
    for (double v : eig.values) det *= v;
    return det;
}

ChartPoint locate(const Manifold& m, const ManifoldPoint& p) {
    if (p.chart) return *p.chart;
    int id = select_chart(m, p.ambient, 0.0);
    auto q = ambient_to_chart(m, p.ambient, id);
    if (!q) throw NoChartWithMargin("point cannot be mapped into any chart");
    return *q;
}

Vec ambient_of(const Manifold& m, const ManifoldPoint& p) {
    if (!p.ambient.empty()) return p.ambient;
    if (!p.chart) throw ConfigError("point has neither ambient nor chart data");
    return chart_to_ambient(m, *p.chart);
}

// Euclidean-orthonormal tangent frame in ambient coordinates (orthonormal
// for the induced metric as well).
std::vector<Vec> tangent_frame(const Manifold& m, const ManifoldPoint& p) {
    if (m.has_constraint()) return tangent_frame_implicit(m, ambient_of(m, p));
    ChartPoint cp = locate(m, p);
    Mat q = orthonormal_columns(chart_of(m, cp.chart_id).jacobian(cp.coords));
    std::vector<Vec> frame(q.cols());
    for (int j = 0; j < q.cols(); ++j) frame[j] = q.col(j);
    return frame;
}

// Shift y by whole periods so each coordinate lands nearest x.  Only
// meaningful when the ambient space itself is periodic (identity charts).
Vec unwrap_toward(Vec y, const Vec& x, const Vec& periods) {
    for (size_t i = 0; i < y.size(); ++i)
        if (periods[i] > 0.0)
            y[i] -= periods[i] * std::round((y[i] - x[i]) / periods[i]);
    return y;
}

const Vec* ambient_periods(const Manifold& m) {
    if (m.has_constraint() || !m.has_charts()) return nullptr;
    const Chart& c = *m.charts.front();
    if (!c.periodic() || c.dim() != c.ambient_dim()) return nullptr;
    static thread_local Vec periods;
    periods = c.periods();
    return &periods;
}

}  // namespace

CovariantAccel covariant_acceleration(const Manifold& m, const StepMap& step,
                                      const Vec& x, const Vec& v, double h) {
    if (!(h > 0.0)) throw ConfigError("finite-difference scale must be positive");
    Vec plus = step(x, v, h);
    Vec minus = step(x, v, -h);
    if (const Vec* periods = ambient_periods(m)) {
        plus = unwrap_toward(std::move(plus), x, *periods);
        minus = unwrap_toward(std::move(minus), x, *periods);
    }

    CovariantAccel out;
    out.total.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        out.total[i] = (plus[i] - 2.0 * x[i] + minus[i]) / (h * h);

    out.tangential.assign(x.size(), 0.0);
    for (const Vec& e : tangent_frame(m, ManifoldPoint{std::nullopt, x}))
        axpy(out.tangential, dot(out.total, e), e);
    out.normal = sub(out.total, out.tangential);
    out.tangential_norm = norm(out.tangential);
    out.normal_norm = norm(out.normal);
    return out;
}

double averaged_covariant_acceleration(const Manifold& m, const StepMap& step,
                                       int trials, RandomStream& rng, double h) {
    if (trials < 1) throw ConfigError("need at least one acceleration probe");
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        ManifoldPoint p = random_manifold_point(m, rng);
        Vec v = random_unit_tangent(m, p, rng);
        sum += covariant_acceleration(m, step, ambient_of(m, p), v, h).tangential_norm;
    }
    return sum / trials;
}

HarmonicityDefect harmonicity_defect(const Manifold& m, const StepMap& step,
                                     const Vec& x, long long samples,
                                     RandomStream& rng, double h) {
    if (samples < 2) throw ConfigError("harmonicity average needs >= 2 samples");
    ManifoldPoint p{std::nullopt, x};
    size_t n = x.size();
    Vec mean(n, 0.0), m2(n, 0.0);
    for (long long i = 1; i <= samples; ++i) {
        Vec v = random_unit_tangent(m, p, rng);
        Vec t = covariant_acceleration(m, step, x, v, h).tangential;
        for (size_t j = 0; j < n; ++j) {
            double delta = t[j] - mean[j];
            mean[j] += delta / static_cast<double>(i);
            m2[j] += delta * (t[j] - mean[j]);
        }
    }
    HarmonicityDefect out;
    out.mean = mean;
    out.mean_norm = norm(mean);
    double var_sum = 0.0;
    for (size_t j = 0; j < n; ++j) var_sum += m2[j];
    out.std_error = std::sqrt(var_sum / (static_cast<double>(samples - 1) *
                                         static_cast<double>(samples)));
    return out;
}

OrderFit retraction_order_fit(std::shared_ptr<const Manifold> m, const StepMap& step,
                              const std::vector<double>& taus, int probes,
                              RandomStream& rng) {
    if (taus.size() < 2) throw ConfigError("order fit needs at least two scales");
    if (probes < 1) throw ConfigError("order fit needs at least one probe");
    for (double tau : taus)
        if (!(tau > 0.0)) throw ConfigError("order-fit scales must be positive");

    StepMap oracle = make_exp_oracle(m);
    std::vector<std::pair<Vec, Vec>> probe_set;
    probe_set.reserve(probes);
    for (int i = 0; i < probes; ++i) {
        ManifoldPoint p = random_manifold_point(*m, rng);
        Vec v = random_unit_tangent(*m, p, rng);
        probe_set.emplace_back(ambient_of(*m, p), std::move(v));
    }

    OrderFit fit;
    fit.taus = taus;
    fit.errors.reserve(taus.size());
    for (double tau : taus) {
        double worst = 0.0;
        for (const auto& [x, v] : probe_set) {
            Vec a = step(x, v, tau);
            Vec b = oracle(x, v, tau);
            if (const Vec* periods = ambient_periods(*m))
                a = unwrap_toward(std::move(a), b, *periods);
            worst = std::max(worst, distance(a, b));
        }
        fit.errors.push_back(worst);
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < taus.size(); ++i) {
        if (!(fit.errors[i] > 0.0)) continue;
        double lx = std::log(fit.taus[i]), ly = std::log(fit.errors[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n >= 2 && sxx * n - sx * sx > 0.0) {
        fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        fit.intercept = (sy - fit.slope * sx) / n;
    } else {
        fit.slope = std::numeric_limits<double>::quiet_NaN();
        fit.intercept = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

TransitionEstimate transition_operator(const Manifold& m, const StepMap& step,
                                       const AmbientFn& f, const ManifoldPoint& x,
                                       double eps, RandomStream& rng,
                                       long long mc_samples) {
    Vec xa = ambient_of(m, x);
    TransitionEstimate out;

    if (m.intrinsic_dim == 2) {
        std::vector<Vec> frame = tangent_frame(m, x);
        double sum = 0.0;
        for (int k = 0; k < kTransitionAngles; ++k) {
            double theta = 2.0 * kPi * k / kTransitionAngles;
            Vec v = scale(frame[0], std::cos(theta));
            axpy(v, std::sin(theta), frame[1]);
            sum += f(step(xa, v, eps));
        }
        out.value = sum / kTransitionAngles;
        out.std_error = 0.0;
        out.samples = kTransitionAngles;
        return out;
    }

    if (mc_samples < 2) throw ConfigError("transition sampling needs >= 2 draws");
    double mean = 0.0, m2 = 0.0;
    for (long long i = 1; i <= mc_samples; ++i) {
        Vec v = random_unit_tangent(m, x, rng);
        double y = f(step(xa, v, eps));
        double delta = y - mean;
        mean += delta / static_cast<double>(i);
        m2 += delta * (y - mean);
    }
    out.value = mean;
    out.std_error = std::sqrt(m2 / (static_cast<double>(mc_samples - 1) *
                                    static_cast<double>(mc_samples)));
    out.samples = mc_samples;
    return out;
}

double laplace_beltrami(const Manifold& m, const AmbientFn& f, const ChartPoint& u) {
    const Chart& chart = chart_of(m, u.chart_id);
    int d = chart.dim();
    Mat ginv = inverse(metric_at(m, u));
    Tensor3 gamma = christoffel_at(m, u);

    auto pullback = [&](const Vec& c) { return f(chart.value(c)); };
    Vec h(d);
    for (int i = 0; i < d; ++i) h[i] = 1e-4 * (1.0 + std::fabs(u.coords[i]));

    double f0 = pullback(u.coords);
    Vec grad(d);
    Mat hess(d, d);
    for (int i = 0; i < d; ++i) {
        Vec up = u.coords, dn = u.coords;
        up[i] += h[i];
        dn[i] -= h[i];
        double fp = pullback(up), fn = pullback(dn);
        grad[i] = (fp - fn) / (2.0 * h[i]);
        hess(i, i) = (fp - 2.0 * f0 + fn) / (h[i] * h[i]);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Vec pp = u.coords, pn = u.coords, np = u.coords, nn = u.coords;
            pp[i] += h[i]; pp[j] += h[j];
            pn[i] += h[i]; pn[j] -= h[j];
            np[i] -= h[i]; np[j] += h[j];
            nn[i] -= h[i]; nn[j] -= h[j];
            double mixed = (pullback(pp) - pullback(pn) - pullback(np) + pullback(nn)) /
                           (4.0 * h[i] * h[j]);
            hess(i, j) = mixed;
            hess(j, i) = mixed;
        }

    double sum = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double correction = 0.0;
            for (int k = 0; k < d; ++k) correction += gamma(k, i, j) * grad[k];
            sum += ginv(i, j) * (hess(i, j) - correction);
        }
    return sum;
}

GeneratorError generator_error(const Manifold& m, const StepMap& step,
                               const AmbientFn& f, const ChartPoint& u, double eps,
                               RandomStream& rng, long long mc_samples) {
    if (!(eps > 0.0)) throw ConfigError("generator probe needs eps > 0");
    Vec xa = chart_to_ambient(m, u);
    ManifoldPoint p{u, xa};
    TransitionEstimate t = transition_operator(m, step, f, p, eps, rng, mc_samples);

    GeneratorError out;
    out.estimate = (t.value - f(xa)) / (eps * eps);
    out.target = laplace_beltrami(m, f, u) / (2.0 * m.intrinsic_dim);
    out.abs_error = std::fabs(out.estimate - out.target);
    out.std_error = t.std_error / (eps * eps);
    return out;
}

HeatDecay heat_kernel_decay(const Manifold& m, const std::vector<WalkResult>& runs,
                            int ell, const Vec& x0) {
    if (m.exact_exp != Manifold::ExactExpForm::UnitSphere)
        throw ConfigError("heat decay oracle is only known for the round unit sphere");
    if (ell != 1 && ell != 2) throw ConfigError("harmonic degree must be 1 or 2");
    if (runs.empty()) throw InsufficientSamples("decay check needs at least one walker");
    int dim = m.intrinsic_dim;
    auto harmonic = [&](const Vec& x) {
        double z = x.back();
        return ell == 1 ? z : z * z - 1.0 / (dim + 1);
    };

    HeatDecay out;
    out.time = runs.front().samples.back().time;
    double sum = 0.0, sumsq = 0.0;
    for (const WalkResult& r : runs) {
        if (r.samples.empty()) throw InsufficientSamples("walker recorded no samples");
        if (std::fabs(r.samples.back().time - out.time) > 1e-12 * (1.0 + out.time))
            throw ConfigError("walkers disagree on the final time");
        double y = harmonic(r.samples.back().point.ambient);
        sum += y;
        sumsq += y * y;
    }
    double w = static_cast<double>(runs.size());
    out.empirical = sum / w;
    out.predicted = std::exp(-ell * (ell + dim - 1) * out.time / (2.0 * dim)) *
                    harmonic(x0);
    out.abs_error = std::fabs(out.empirical - out.predicted);
    if (runs.size() > 1) {
        double var = std::max(0.0, (sumsq - w * out.empirical * out.empirical) / (w - 1.0));
        out.std_error = std::sqrt(var / w);
    }
    return out;
}

DensityTest stationary_density_test(const Manifold& m, const WalkResult& walk,
                                    const std::vector<int>& bins_per_axis) {
    int chart_id = -1;
    for (size_t i = 0; i < m.charts.size(); ++i)
        if (m.charts[i]->periodic()) {
            chart_id = static_cast<int>(i);
            break;
        }
    if (chart_id < 0) throw ConfigError("density test needs a periodic chart");
    const Chart& chart = chart_of(m, chart_id);
    int d = chart.dim();
    if (static_cast<int>(bins_per_axis.size()) != d)
        throw ConfigError("bins_per_axis must have one entry per chart coordinate");
    long long cells = 1;
    for (int b : bins_per_axis) {
        if (b < 1) throw ConfigError("bin counts must be >= 1");
        cells *= b;
    }
    Vec periods = chart.periods();

    DensityTest out;
    out.burn_in_steps = std::max((walk.steps + 9) / 10,
                                 cover_time_steps(d, chart_volume(m, chart_id), 0.05,
                                                  walk.epsilon));

    // Riemannian mass of each cell by midpoint subquadrature on a grid of at
    // least 128 points per axis.
    out.expected.assign(cells, 0.0);
    std::vector<int> sub(d), grid(d);
    for (int i = 0; i < d; ++i) {
        sub[i] = (127 + bins_per_axis[i]) / bins_per_axis[i];
        grid[i] = sub[i] * bins_per_axis[i];
    }
    std::vector<int> k(d, 0);
    double total_mass = 0.0;
    for (;;) {
        Vec u(d);
        long long cell = 0;
        for (int i = 0; i < d; ++i) {
            u[i] = (k[i] + 0.5) * periods[i] / grid[i];
            cell = cell * bins_per_axis[i] + k[i] / sub[i];
        }
        double mass = std::sqrt(metric_det(metric_at(m, ChartPoint{chart_id, u})));
        out.expected[cell] += mass;
        total_mass += mass;
        int axis = d - 1;
        while (axis >= 0 && ++k[axis] == grid[axis]) k[axis--] = 0;
        if (axis < 0) break;
    }
    for (double& e : out.expected) e /= total_mass;

    out.counts.assign(cells, 0);
    for (const TrajectorySample& s : walk.samples) {
        if (s.index < out.burn_in_steps) continue;
        ChartPoint cp;
        if (s.point.chart && s.point.chart->chart_id == chart_id) {
            cp = *s.point.chart;
        } else {
            auto q = ambient_to_chart(m, s.point.ambient, chart_id);
            if (!q) throw ConfigError("sample cannot be mapped into the density chart");
            cp = *q;
        }
        Vec u = chart.wrap(cp.coords);
        long long cell = 0;
        for (int i = 0; i < d; ++i) {
            int b = static_cast<int>(std::floor(u[i] / periods[i] * bins_per_axis[i]));
            b = std::min(bins_per_axis[i] - 1, std::max(0, b));
            cell = cell * bins_per_axis[i] + b;
        }
        ++out.counts[cell];
        ++out.samples_used;
    }

    if (out.samples_used < 1)
        throw InsufficientSamples("no samples remain after burn-in");
    for (long long c = 0; c < cells; ++c)
        if (out.expected[c] * static_cast<double>(out.samples_used) < 5.0)
            throw InsufficientSamples("a histogram cell expects fewer than 5 hits");

    double n = static_cast<double>(out.samples_used);
    for (long long c = 0; c < cells; ++c) {
        double observed = static_cast<double>(out.counts[c]) / n;
        out.total_variation += 0.5 * std::fabs(observed - out.expected[c]);
        double expect_count = n * out.expected[c];
        double diff = static_cast<double>(out.counts[c]) - expect_count;
        out.chi_square += diff * diff / expect_count;
    }
    return out;
}

long long cover_time_steps(int dim, double volume, double delta, double eps) {
    if (dim < 2) throw DimensionError("cover-time bound requires dimension >= 2");
    if (!(volume > 0.0)) throw ConfigError("volume must be positive");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in (0, 1]");

    double ln_delta = std::log(delta);
    double steps;
    if (dim == 2) {
        steps = (2.0 * volume / kPi) * ln_delta * ln_delta / (eps * eps);
    } else {
        double omega = 2.0 * std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0);
        double kappa = 2.0 * volume / ((dim - 2) * omega);
        steps = dim * kappa * (-std::pow(delta, 2.0 - dim) * ln_delta) / (eps * eps);
    }
    return static_cast<long long>(std::ceil(steps));
}

StepMap make_broken_sphere_step(std::shared_ptr<const Manifold> m) {
    if (m->exact_exp != Manifold::ExactExpForm::UnitSphere)
        throw ConfigError("the deliberately broken step is defined on the unit sphere");
    return [](const Vec& x, const Vec& v, double tau) -> Vec {
        if (tau == 0.0) return x;
        Vec y = x;
        axpy(y, tau, v);
        double drift = tau * norm(v);
        y[0] += 0.1 * drift * drift;
        return normalized(y);
    };
}

ManifoldPoint random_manifold_point(const Manifold& m, RandomStream& rng) {
    if (m.exact_exp == Manifold::ExactExpForm::UnitSphere) {
        Vec x(m.ambient_dim);
        do {
            for (double& c : x) c = rng.normal();
        } while (norm(x) <= 1e-8);
        return ManifoldPoint{std::nullopt, normalized(x)};
    }
    if (m.has_charts() && m.charts.front()->periodic()) {
        const Chart& chart = *m.charts.front();
        Vec periods = chart.periods();
        Vec u(chart.dim());
        for (int i = 0; i < chart.dim(); ++i) u[i] = rng.uniform01() * periods[i];
        ChartPoint cp{0, std::move(u)};
        Vec ambient = chart_to_ambient(m, cp);
        return ManifoldPoint{std::move(cp), std::move(ambient)};
    }
    if (m.has_constraint()) {
        ProjectionSettings settings;
        settings.max_iters = 100;
        settings.threshold_scale = 1e-4;
        for (int attempt = 0; attempt < 64; ++attempt) {
            Vec y(m.ambient_dim);
            for (double& c : y) c = 0.75 * rng.normal();
            try {
                Vec x = project_to_manifold(m, y, settings);
                return ManifoldPoint{std::nullopt, std::move(x)};
            } catch (const NoConvergence&) {
            } catch (const RankDeficient&) {
            }
        }
        throw NoConvergence("could not project any random draw onto the manifold", 64,
                            std::numeric_limits<double>::quiet_NaN());
    }
    throw ConfigError("no random-point rule for this manifold representation");
}

Vec random_unit_tangent(const Manifold& m, const ManifoldPoint& p, RandomStream& rng) {
    if (m.has_constraint()) return sample_tangent_implicit(m, ambient_of(m, p), rng);
    ChartPoint cp = locate(m, p);
    Mat g = metric_at(m, cp);
    Vec vt = sample_tangent_param(g, rng);
    return matvec(chart_of(m, cp.chart_id).jacobian(cp.coords), vt);
}

}  // namespace mwalk
