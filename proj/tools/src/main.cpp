// mwalk: geodesic random walks on compact manifolds.
//
// Subcommands: walk, ensemble, validate {order,generator,heat,density,accel},
// covertime, list-manifolds.  Machine output goes to files (CSV for
// trajectories and histograms, JSON for validation reports); stdout carries a
// one-line human summary.  Exit codes: 0 success, 1 usage or configuration
// error, 2 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "manifoldwalk/catalog.hpp"
#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/validate.hpp"
#include "manifoldwalk/walk.hpp"

namespace {

using nlohmann::ordered_json;
using namespace mwalk;

constexpr int kSchemaVersion = 1;

using Echo = std::vector<std::pair<std::string, std::string>>;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& text) {
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': bad number '" + text + "'");
    return v;
}

long long parse_ll(const std::string& key, const std::string& text) {
    char* end = nullptr;
    long long v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': bad integer '" + text + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(parse_double(key, text.substr(pos, next - pos)));
        pos = next + 1;
        if (next == text.size()) break;
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
    std::vector<int> out;
    for (double v : parse_double_list(key, text)) out.push_back(static_cast<int>(v));
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// INI-style config file: top-level `key = value` lines plus an optional
// [manifold] section.  Full-line comments start with '#' or ';'.  Values may
// be double-quoted; quotes are stripped.
class FileConfig {
public:
    static FileConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file '" + path + "'");
        FileConfig fc;
        fc.loaded_ = true;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError(path + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
                section = trim(t.substr(1, t.size() - 2));
                if (section != "manifold")
                    throw ConfigError(path + ":" + std::to_string(lineno) +
                                      ": unknown section '" + section + "'");
                continue;
            }
            size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            if (key.empty())
                throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
            auto& table = section.empty() ? fc.top_ : fc.manifold_;
            if (!table.emplace(key, value).second)
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
        }
        return fc;
    }

    bool loaded() const { return loaded_; }
    bool has(const std::string& key) const { return top_.count(key) > 0; }
    bool has_manifold_section() const { return !manifold_.empty(); }

    std::string take(const std::string& key) {
        used_top_.insert(key);
        return top_.at(key);
    }
    bool manifold_has(const std::string& key) const { return manifold_.count(key) > 0; }
    std::string manifold_take(const std::string& key) {
        used_manifold_.insert(key);
        return manifold_.at(key);
    }

    // Unknown keys are rejected rather than silently ignored.
    void reject_unused() const {
        for (const auto& [k, v] : top_)
            if (!used_top_.count(k))
                throw ConfigError("config file: unknown key '" + k + "'");
        for (const auto& [k, v] : manifold_)
            if (!used_manifold_.count(k))
                throw ConfigError("config file: unknown key 'manifold." + k + "'");
    }

private:
    bool loaded_ = false;
    std::map<std::string, std::string> top_, manifold_;
    mutable std::set<std::string> used_top_, used_manifold_;
};

// A CLI flag wins over the config file; the file wins over the default.
void overlay(const CLI::Option* opt, FileConfig& fc, const std::string& key,
             const std::function<void(const std::string&)>& assign) {
    if (!fc.has(key)) return;
    std::string value = fc.take(key);
    if (opt != nullptr && opt->count() > 0) return;
    assign(value);
}

struct ManifoldChoice {
    std::shared_ptr<const Manifold> manifold;
    Echo echo;  // reproducible description for output headers
};

ManifoldChoice build_manifold(const std::string& flag_descriptor, FileConfig& fc) {
    ManifoldChoice out;
    if (!flag_descriptor.empty()) {
        out.manifold = make_manifold(flag_descriptor);
        out.echo.emplace_back("manifold", flag_descriptor);
        return out;
    }
    if (fc.has_manifold_section()) {
        if (!fc.manifold_has("kind"))
            throw ConfigError("config file: [manifold] section needs a 'kind'");
        std::string kind = fc.manifold_take("kind");
        if (kind == "catalog") {
            std::string desc = fc.manifold_take("descriptor");
            out.manifold = make_manifold(desc);
            out.echo.emplace_back("manifold", desc);
            return out;
        }
        if (kind == "implicit") {
            int n = static_cast<int>(
                parse_ll("manifold.dim_ambient", fc.manifold_take("dim_ambient")));
            std::vector<std::string> comps;
            for (int i = 1; fc.manifold_has("f" + std::to_string(i)); ++i)
                comps.push_back(fc.manifold_take("f" + std::to_string(i)));
            if (comps.empty())
                throw ConfigError("config file: implicit manifold needs f1, f2, ...");
            out.manifold = make_implicit_manifold(n, comps);
            out.echo.emplace_back("manifold", "implicit:dim_ambient=" + std::to_string(n));
            for (size_t i = 0; i < comps.size(); ++i)
                out.echo.emplace_back("f" + std::to_string(i + 1), comps[i]);
            return out;
        }
        if (kind == "parametric") {
            int dim =
                static_cast<int>(parse_ll("manifold.dim", fc.manifold_take("dim")));
            std::vector<std::string> comps;
            for (int i = 1; fc.manifold_has("phi" + std::to_string(i)); ++i)
                comps.push_back(fc.manifold_take("phi" + std::to_string(i)));
            if (comps.empty())
                throw ConfigError("config file: parametric manifold needs phi1, ...");
            if (!fc.manifold_has("periods"))
                throw ConfigError(
                    "config file: parametric manifold must declare 'periods'");
            Vec periods =
                parse_double_list("manifold.periods", fc.manifold_take("periods"));
            out.manifold = make_parametric_manifold(dim, comps, periods);
            out.echo.emplace_back("manifold", "parametric:dim=" + std::to_string(dim));
            for (size_t i = 0; i < comps.size(); ++i)
                out.echo.emplace_back("phi" + std::to_string(i + 1), comps[i]);
            std::string plist;
            for (size_t i = 0; i < periods.size(); ++i)
                plist += (i ? "," : "") + fmt17(periods[i]);
            out.echo.emplace_back("periods", plist);
            return out;
        }
        throw ConfigError("config file: unknown manifold kind '" + kind + "'");
    }
    if (fc.has("manifold")) {
        std::string desc = fc.take("manifold");
        out.manifold = make_manifold(desc);
        out.echo.emplace_back("manifold", desc);
        return out;
    }
    throw ConfigError("no manifold specified (use --manifold or a config file)");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    return out;
}

void write_trajectory_csv(const std::string& path, const Manifold& m,
                          const std::vector<WalkResult>& runs, bool walker_column,
                          const Echo& echo) {
    std::ofstream out = open_out(path);
    for (const auto& [k, v] : echo) out << "# " << k << "=" << v << "\n";
    if (walker_column) out << "w,";
    out << "i,t,chart";
    for (int j = 1; j <= m.intrinsic_dim; ++j) out << ",c" << j;
    for (int j = 1; j <= m.ambient_dim; ++j) out << ",x" << j;
    out << "\n";

    std::string line;
    for (size_t w = 0; w < runs.size(); ++w) {
        for (const TrajectorySample& s : runs[w].samples) {
            line.clear();
            if (walker_column) {
                line += std::to_string(w);
                line += ',';
            }
            line += std::to_string(s.index);
            line += ',';
            line += fmt17(s.time);
            line += ',';
            if (s.point.chart) line += std::to_string(s.point.chart->chart_id);
            for (int j = 0; j < m.intrinsic_dim; ++j) {
                line += ',';
                if (s.point.chart) line += fmt17(s.point.chart->coords[j]);
            }
            for (int j = 0; j < m.ambient_dim; ++j) {
                line += ',';
                line += fmt17(s.point.ambient[j]);
            }
            line += '\n';
            out << line;
        }
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

void write_json(const std::string& path, const ordered_json& doc) {
    std::ofstream out = open_out(path);
    out << doc.dump(2) << "\n";
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

// Shared walk/ensemble options.
struct WalkFlags {
    std::string manifold;
    std::string config_path;
    std::string retraction = "piret";
    std::string newton = "full";
    std::string start;
    std::string out;
    WalkConfig cfg;

    CLI::Option* manifold_opt = nullptr;
    CLI::Option* retraction_opt = nullptr;
    CLI::Option* eps_opt = nullptr;
    CLI::Option* steps_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* stream_opt = nullptr;
    CLI::Option* record_opt = nullptr;
    CLI::Option* restarts_opt = nullptr;
    CLI::Option* newton_iters_opt = nullptr;
    CLI::Option* newton_opt = nullptr;
    CLI::Option* start_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    void add_to(CLI::App* cmd, bool with_out = true) {
        manifold_opt = cmd->add_option("--manifold", manifold,
                                       "Catalog descriptor, e.g. torus:R=1.1,r=1");
        cmd->add_option("--config", config_path, "INI config file; flags override it");
        retraction_opt =
            cmd->add_option("--retraction", retraction, "pret|piret|exact|ode");
        eps_opt = cmd->add_option("--eps", cfg.epsilon, "Spatial stepsize");
        steps_opt = cmd->add_option("--steps", cfg.steps, "Number of steps");
        seed_opt = cmd->add_option("--seed", cfg.seed, "RNG seed");
        stream_opt = cmd->add_option("--stream", cfg.stream_id, "RNG stream id");
        record_opt = cmd->add_option("--record-every", cfg.record_every,
                                     "Record every k-th step");
        restarts_opt = cmd->add_option("--max-restarts", cfg.max_restarts,
                                       "Stepsize halvings before giving up");
        newton_iters_opt = cmd->add_option("--newton-max-iters", cfg.newton_max_iters,
                                           "Projection iteration cap");
        newton_opt = cmd->add_option("--newton", newton,
                                     "Projection linearization: full|gauss");
        start_opt = cmd->add_option("--start", start,
                                    "Ambient start point, comma-separated");
        if (with_out)
            out_opt = cmd->add_option("--out", out, "Trajectory CSV path");
    }

    // Returns the manifold; applies config-file values under CLI overrides.
    ManifoldChoice resolve() {
        FileConfig fc;
        if (!config_path.empty()) fc = FileConfig::load(config_path);
        overlay(retraction_opt, fc, "retraction",
                [&](const std::string& v) { retraction = v; });
        overlay(eps_opt, fc, "eps",
                [&](const std::string& v) { cfg.epsilon = parse_double("eps", v); });
        overlay(steps_opt, fc, "steps",
                [&](const std::string& v) { cfg.steps = parse_ll("steps", v); });
        overlay(seed_opt, fc, "seed", [&](const std::string& v) {
            cfg.seed = static_cast<uint64_t>(parse_ll("seed", v));
        });
        overlay(stream_opt, fc, "stream", [&](const std::string& v) {
            cfg.stream_id = static_cast<uint64_t>(parse_ll("stream", v));
        });
        overlay(record_opt, fc, "record_every", [&](const std::string& v) {
            cfg.record_every = parse_ll("record_every", v);
        });
        overlay(restarts_opt, fc, "max_restarts", [&](const std::string& v) {
            cfg.max_restarts = static_cast<int>(parse_ll("max_restarts", v));
        });
        overlay(newton_iters_opt, fc, "newton_max_iters", [&](const std::string& v) {
            cfg.newton_max_iters = static_cast<int>(parse_ll("newton_max_iters", v));
        });
        overlay(newton_opt, fc, "newton",
                [&](const std::string& v) { newton = v; });
        overlay(start_opt, fc, "start", [&](const std::string& v) { start = v; });
        if (out_opt != nullptr)
            overlay(out_opt, fc, "out", [&](const std::string& v) { out = v; });

        cfg.retraction = retraction_from_string(retraction);
        if (newton == "full") {
            cfg.newton_variant = ProjectionSettings::Variant::FullNewton;
        } else if (newton == "gauss") {
            cfg.newton_variant = ProjectionSettings::Variant::GaussNewton;
        } else {
            throw ConfigError("--newton must be 'full' or 'gauss'");
        }

        ManifoldChoice mc = build_manifold(manifold, fc);
        if (!start.empty()) {
            ManifoldPoint p;
            p.ambient = parse_double_list("start", start);
            cfg.start = std::move(p);
        }
        fc.reject_unused();
        return mc;
    }

    Echo echo(const ManifoldChoice& mc, const std::string& command) const {
        Echo e;
        e.emplace_back("command", command);
        for (const auto& kv : mc.echo) e.push_back(kv);
        e.emplace_back("retraction", retraction);
        e.emplace_back("eps", fmt17(cfg.epsilon));
        e.emplace_back("steps", std::to_string(cfg.steps));
        e.emplace_back("seed", std::to_string(cfg.seed));
        e.emplace_back("stream", std::to_string(cfg.stream_id));
        e.emplace_back("record_every", std::to_string(cfg.record_every));
        e.emplace_back("max_restarts", std::to_string(cfg.max_restarts));
        e.emplace_back("newton_max_iters", std::to_string(cfg.newton_max_iters));
        e.emplace_back("newton", newton);
        if (!start.empty()) e.emplace_back("start", start);
        return e;
    }
};

ordered_json echo_json(const Echo& echo) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : echo) j[k] = v;
    return j;
}

int run_walk_cmd(WalkFlags& flags) {
    ManifoldChoice mc = flags.resolve();
    WalkResult result = run_walk(mc.manifold, flags.cfg);

    if (!flags.out.empty()) {
        Echo echo = flags.echo(mc, "walk");
        echo.emplace_back("restarts", std::to_string(result.restarts.size()));
        echo.emplace_back("final_eps", fmt17(result.epsilon));
        write_trajectory_csv(flags.out, *mc.manifold, {result}, false, echo);
    }
    std::printf("walk %s: %lld steps at eps=%s, %zu samples, %zu restarts%s%s\n",
                mc.manifold->name.c_str(), result.steps, fmt17(result.epsilon).c_str(),
                result.samples.size(), result.restarts.size(),
                flags.out.empty() ? "" : " -> ", flags.out.c_str());
    return 0;
}

int run_ensemble_cmd(WalkFlags& flags, int walkers, int threads) {
    ManifoldChoice mc = flags.resolve();
    std::vector<WalkResult> results = run_ensemble(mc.manifold, flags.cfg, walkers,
                                                   threads);
    size_t restarts = 0;
    for (const WalkResult& r : results) restarts += r.restarts.size();

    if (!flags.out.empty()) {
        Echo echo = flags.echo(mc, "ensemble");
        echo.emplace_back("walkers", std::to_string(walkers));
        echo.emplace_back("restarts_total", std::to_string(restarts));
        write_trajectory_csv(flags.out, *mc.manifold, results, true, echo);
    }
    std::printf("ensemble %s: %d walkers x %lld steps, %zu restarts%s%s\n",
                mc.manifold->name.c_str(), walkers, flags.cfg.steps, restarts,
                flags.out.empty() ? "" : " -> ", flags.out.c_str());
    return 0;
}

StepMap step_map_for(const std::shared_ptr<const Manifold>& m,
                     const std::string& retraction) {
    if (retraction == "broken") return make_broken_sphere_step(m);
    ProjectionSettings tight;
    tight.max_iters = 100;
    tight.threshold_scale = 1e-5;
    return make_step_map(m, retraction_from_string(retraction), tight);
}

int run_validate_order(const std::string& manifold_desc, const std::string& retraction,
                       double tau_min, double tau_max, int tau_count, int probes,
                       uint64_t seed, const std::string& out) {
    auto m = make_manifold(manifold_desc);
    std::vector<double> taus(tau_count);
    for (int i = 0; i < tau_count; ++i) {
        double f = tau_count == 1 ? 0.0 : static_cast<double>(i) / (tau_count - 1);
        taus[i] = tau_min * std::pow(tau_max / tau_min, f);
    }
    RandomStream rng(seed);
    OrderFit fit = retraction_order_fit(m, step_map_for(m, retraction), taus, probes,
                                        rng);

    bool pass = std::isfinite(fit.slope) && fit.slope >= 2.7 && fit.slope <= 3.3;
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["test"] = "order";
    doc["parameters"] = {{"manifold", manifold_desc}, {"retraction", retraction},
                         {"tau_min", tau_min},        {"tau_max", tau_max},
                         {"tau_count", tau_count},    {"probes", probes},
                         {"seed", seed}};
    doc["statistic"] = fit.slope;
    doc["threshold"] = "slope in [2.7, 3.3]";
    doc["pass"] = pass;
    doc["taus"] = fit.taus;
    doc["errors"] = fit.errors;
    doc["intercept"] = fit.intercept;
    write_json(out, doc);
    std::printf("validate order %s %s: slope=%.4f %s -> %s\n", manifold_desc.c_str(),
                retraction.c_str(), fit.slope, pass ? "pass" : "FAIL", out.c_str());
    return 0;
}

int run_validate_generator(const std::string& retraction,
                           std::vector<double> eps_list, const std::string& out) {
    auto m = make_manifold("sphere:dim=2");
    if (eps_list.empty()) eps_list = {0.1, 0.05, 0.025};
    StepMap step = step_map_for(m, retraction);
    // Fixed probe points in the north stereographic chart; (0, 0) is a pole
    // where both observables peak.
    std::vector<Vec> probes = {{0.0, 0.0}, {0.35, 0.1}, {-0.4, 0.55},
                               {0.8, -0.3}, {0.12, 0.66}};
    struct Observable {
        const char* name;
        AmbientFn f;
    };
    std::vector<Observable> fs = {
        {"z", [](const Vec& x) { return x[2]; }},
        {"z^2-1/3", [](const Vec& x) { return x[2] * x[2] - 1.0 / 3.0; }},
    };

    RandomStream rng(0);
    bool pass = true;
    double worst_final = 0.0;
    ordered_json runs = ordered_json::array();
    for (const Observable& obs : fs) {
        std::vector<double> errors;
        for (double eps : eps_list) {
            double worst = 0.0;
            for (const Vec& u : probes) {
                GeneratorError ge = generator_error(*m, step, obs.f,
                                                    ChartPoint{0, u}, eps, rng);
                worst = std::max(worst, ge.abs_error);
            }
            errors.push_back(worst);
        }
        bool mono = true;
        for (size_t i = 1; i < errors.size(); ++i)
            if (!(errors[i] <= errors[i - 1] / 1.5)) mono = false;
        bool small = errors.back() <= 5e-3;
        pass = pass && mono && small;
        worst_final = std::max(worst_final, errors.back());
        runs.push_back({{"f", obs.name},
                        {"eps", eps_list},
                        {"errors", errors},
                        {"monotone_ratio_1.5", mono},
                        {"final_below_5e-3", small}});
    }

    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["test"] = "generator";
    doc["parameters"] = {{"manifold", "sphere:dim=2"},
                         {"retraction", retraction},
                         {"quadrature_points", 256}};
    doc["statistic"] = worst_final;
    doc["threshold"] = 5e-3;
    doc["pass"] = pass;
    doc["runs"] = runs;
    write_json(out, doc);
    std::printf("validate generator %s: max error %.3e at eps=%s %s -> %s\n",
                retraction.c_str(), worst_final, fmt17(eps_list.back()).c_str(),
                pass ? "pass" : "FAIL", out.c_str());
    return 0;
}

int run_validate_heat(int walkers, double eps, long long steps, int ell,
                      uint64_t seed, int threads, const std::string& out) {
    auto m = make_manifold("sphere:dim=2");
    WalkConfig cfg;
    cfg.epsilon = eps;
    cfg.steps = steps;
    cfg.retraction = RetractionKind::ProjectNewton;
    cfg.seed = seed;
    cfg.record_every = steps > 0 ? steps : 1;
    std::vector<WalkResult> runs = run_ensemble(m, cfg, walkers, threads);
    HeatDecay decay = heat_kernel_decay(*m, runs, ell, m->default_start.ambient);

    double threshold = 3.0 * decay.std_error + 0.01;
    bool pass = decay.abs_error <= threshold;
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["test"] = "heat";
    doc["parameters"] = {{"manifold", "sphere:dim=2"}, {"walkers", walkers},
                         {"eps", eps},                 {"steps", steps},
                         {"ell", ell},                 {"seed", seed},
                         {"time", decay.time}};
    doc["statistic"] = decay.abs_error;
    doc["threshold"] = threshold;
    doc["pass"] = pass;
    doc["empirical"] = decay.empirical;
    doc["predicted"] = decay.predicted;
    doc["std_error"] = decay.std_error;
    write_json(out, doc);
    std::printf("validate heat l=%d t=%s: |%.6f - %.6f| = %.2e %s -> %s\n", ell,
                fmt17(decay.time).c_str(), decay.empirical, decay.predicted,
                decay.abs_error, pass ? "pass" : "FAIL", out.c_str());
    return 0;
}

int run_validate_density(WalkFlags& flags, const std::string& bins_text,
                         const std::string& out, const std::string& density_out) {
    ManifoldChoice mc = flags.resolve();
    std::vector<int> bins = parse_int_list("bins", bins_text);
    WalkResult walk = run_walk(mc.manifold, flags.cfg);
    DensityTest dt = stationary_density_test(*mc.manifold, walk, bins);

    // One row per histogram cell: bin centers, observed frequency, expected
    // probability.
    int chart_id = -1;
    for (size_t i = 0; i < mc.manifold->charts.size(); ++i)
        if (mc.manifold->charts[i]->periodic()) {
            chart_id = static_cast<int>(i);
            break;
        }
    Vec periods = chart_of(*mc.manifold, chart_id).periods();
    int d = static_cast<int>(bins.size());
    {
        std::ofstream csv = open_out(density_out);
        Echo echo = flags.echo(mc, "validate density");
        echo.emplace_back("bins", bins_text);
        echo.emplace_back("burn_in_steps", std::to_string(dt.burn_in_steps));
        echo.emplace_back("samples_used", std::to_string(dt.samples_used));
        for (const auto& [k, v] : echo) csv << "# " << k << "=" << v << "\n";
        for (int j = 1; j <= d; ++j) csv << "c" << j << "_center,";
        csv << "observed_freq,expected_prob\n";
        std::vector<int> idx(d, 0);
        for (size_t cell = 0; cell < dt.counts.size(); ++cell) {
            std::string line;
            for (int j = 0; j < d; ++j)
                line += fmt17((idx[j] + 0.5) * periods[j] / bins[j]) + ",";
            line += fmt17(static_cast<double>(dt.counts[cell]) /
                          static_cast<double>(dt.samples_used));
            line += ',';
            line += fmt17(dt.expected[cell]);
            csv << line << "\n";
            int axis = d - 1;
            while (axis >= 0 && ++idx[axis] == bins[axis]) idx[axis--] = 0;
        }
    }

    bool pass = dt.total_variation <= 0.05;
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["test"] = "density";
    doc["parameters"] = echo_json(flags.echo(mc, "validate density"));
    doc["parameters"]["bins"] = bins;
    doc["statistic"] = dt.total_variation;
    doc["threshold"] = 0.05;
    doc["pass"] = pass;
    doc["chi_square"] = dt.chi_square;
    doc["samples_used"] = dt.samples_used;
    doc["burn_in_steps"] = dt.burn_in_steps;
    doc["density_csv"] = density_out;
    write_json(out, doc);
    std::printf("validate density %s: TV=%.4f %s -> %s, %s\n",
                mc.manifold->name.c_str(), dt.total_variation,
                pass ? "pass" : "FAIL", out.c_str(), density_out.c_str());
    return 0;
}

int run_validate_accel(const std::string& manifold_desc, const std::string& retraction,
                       int trials, uint64_t seed, const std::string& out) {
    auto m = make_manifold(manifold_desc);
    StepMap step = step_map_for(m, retraction);
    RandomStream rng(seed);

    double worst = 0.0, sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        ManifoldPoint p = random_manifold_point(*m, rng);
        Vec v = random_unit_tangent(*m, p, rng);
        double tn = covariant_acceleration(*m, step, p.ambient, v).tangential_norm;
        worst = std::max(worst, tn);
        sum += tn;
    }
    double mean = sum / trials;

    // Production retractions must stay flat; the broken control must not.
    bool broken = retraction == "broken";
    double statistic = broken ? mean : worst;
    double threshold = broken ? 1e-2 : 1e-5;
    bool pass = broken ? statistic >= threshold : statistic <= threshold;

    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["test"] = "accel";
    doc["parameters"] = {{"manifold", manifold_desc},
                         {"retraction", retraction},
                         {"trials", trials},
                         {"seed", seed}};
    doc["statistic"] = statistic;
    doc["threshold"] = threshold;
    doc["pass"] = pass;
    doc["max_tangential"] = worst;
    doc["mean_tangential"] = mean;
    write_json(out, doc);
    std::printf("validate accel %s %s: %s=%.3e %s -> %s\n", manifold_desc.c_str(),
                retraction.c_str(), broken ? "mean" : "max", statistic,
                pass ? "pass" : "FAIL", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesic random walks on compact manifolds"};
    app.require_subcommand(1);

    // walk
    auto* walk_cmd = app.add_subcommand("walk", "Run one random walk");
    WalkFlags walk_flags;
    walk_flags.add_to(walk_cmd);

    // ensemble
    auto* ens_cmd = app.add_subcommand("ensemble", "Run independent walkers");
    WalkFlags ens_flags;
    ens_flags.add_to(ens_cmd);
    int walkers = 4;
    int threads = 0;
    ens_cmd->add_option("--walkers", walkers, "Number of independent walks");
    ens_cmd->add_option("--threads", threads, "Worker threads (0 = auto)");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "Empirical validation reports");
    val_cmd->require_subcommand(1);

    auto* order_cmd = val_cmd->add_subcommand("order", "Retraction order fit");
    std::string order_manifold = "sphere:dim=2", order_retraction = "piret";
    double tau_min = 1e-3, tau_max = 0.031622776601683791;
    int tau_count = 8, order_probes = 32;
    uint64_t order_seed = 0;
    std::string order_out = "order.json";
    order_cmd->add_option("--manifold", order_manifold);
    order_cmd->add_option("--retraction", order_retraction, "pret|piret|exact|ode|broken");
    order_cmd->add_option("--tau-min", tau_min);
    order_cmd->add_option("--tau-max", tau_max);
    order_cmd->add_option("--tau-count", tau_count);
    order_cmd->add_option("--probes", order_probes);
    order_cmd->add_option("--seed", order_seed);
    order_cmd->add_option("--out", order_out);

    auto* gen_cmd = val_cmd->add_subcommand("generator", "Transition-operator limit");
    std::string gen_retraction = "piret";
    std::vector<double> gen_eps;
    std::string gen_out = "generator.json";
    gen_cmd->add_option("--retraction", gen_retraction);
    gen_cmd->add_option("--eps", gen_eps, "Stepsizes, largest first");
    gen_cmd->add_option("--out", gen_out);

    auto* heat_cmd = val_cmd->add_subcommand("heat", "Spherical-harmonic decay");
    int heat_walkers = 2000, heat_ell = 1, heat_threads = 0;
    double heat_eps = 0.05;
    long long heat_steps = 200;
    uint64_t heat_seed = 0;
    std::string heat_out = "heat.json";
    heat_cmd->add_option("--walkers", heat_walkers);
    heat_cmd->add_option("--eps", heat_eps);
    heat_cmd->add_option("--steps", heat_steps);
    heat_cmd->add_option("--ell", heat_ell, "Harmonic degree: 1 or 2");
    heat_cmd->add_option("--seed", heat_seed);
    heat_cmd->add_option("--threads", heat_threads);
    heat_cmd->add_option("--out", heat_out);

    auto* dens_cmd = val_cmd->add_subcommand("density", "Stationary-measure histogram");
    WalkFlags dens_flags;
    dens_flags.retraction = "pret";
    dens_flags.add_to(dens_cmd, /*with_out=*/false);
    std::string dens_bins = "16,16", dens_out = "density.json",
                dens_csv = "density.csv";
    dens_cmd->add_option("--bins", dens_bins, "Bins per chart axis, e.g. 32,1");
    dens_cmd->add_option("--out", dens_out);
    dens_cmd->add_option("--density-out", dens_csv);

    auto* accel_cmd = val_cmd->add_subcommand("accel", "Covariant-acceleration probe");
    std::string accel_manifold = "sphere:dim=2", accel_retraction = "piret";
    int accel_trials = 100;
    uint64_t accel_seed = 0;
    std::string accel_out = "accel.json";
    accel_cmd->add_option("--manifold", accel_manifold);
    accel_cmd->add_option("--retraction", accel_retraction,
                          "pret|piret|exact|ode|broken");
    accel_cmd->add_option("--trials", accel_trials);
    accel_cmd->add_option("--seed", accel_seed);
    accel_cmd->add_option("--out", accel_out);

    // covertime
    auto* cover_cmd = app.add_subcommand("covertime", "Cover-time step bound");
    int cover_dim = 2;
    double cover_volume = 1.0, cover_delta = 0.01, cover_eps = 0.1;
    std::string cover_out;
    cover_cmd->add_option("--dim", cover_dim);
    cover_cmd->add_option("--volume", cover_volume, "Riemannian area or volume");
    cover_cmd->add_option("--delta", cover_delta);
    cover_cmd->add_option("--eps", cover_eps);
    cover_cmd->add_option("--out", cover_out, "Optional JSON report path");

    // list-manifolds
    auto* list_cmd = app.add_subcommand("list-manifolds", "Show the catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*walk_cmd) return run_walk_cmd(walk_flags);
        if (*ens_cmd) return run_ensemble_cmd(ens_flags, walkers, threads);
        if (*order_cmd)
            return run_validate_order(order_manifold, order_retraction, tau_min,
                                      tau_max, tau_count, order_probes, order_seed,
                                      order_out);
        if (*gen_cmd) return run_validate_generator(gen_retraction, gen_eps, gen_out);
        if (*heat_cmd)
            return run_validate_heat(heat_walkers, heat_eps, heat_steps, heat_ell,
                                     heat_seed, heat_threads, heat_out);
        if (*dens_cmd)
            return run_validate_density(dens_flags, dens_bins, dens_out, dens_csv);
        if (*accel_cmd)
            return run_validate_accel(accel_manifold, accel_retraction, accel_trials,
                                      accel_seed, accel_out);
        if (*cover_cmd) {
            long long steps = cover_time_steps(cover_dim, cover_volume, cover_delta,
                                               cover_eps);
            if (!cover_out.empty()) {
                ordered_json doc;
                doc["schema_version"] = kSchemaVersion;
                doc["test"] = "covertime";
                doc["parameters"] = {{"dim", cover_dim}, {"volume", cover_volume},
                                     {"delta", cover_delta}, {"eps", cover_eps}};
                doc["steps"] = steps;
                write_json(cover_out, doc);
            }
            std::printf("%lld\n", steps);
            return 0;
        }
        if (*list_cmd) {
            for (const CatalogEntry& e : catalog_entries())
                std::printf("%-12s %-24s %s\n", e.name.c_str(), e.parameters.c_str(),
                            e.description.c_str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const SyntaxError& e) {
        std::fprintf(stderr, "expression error at byte %zu: %s\n", e.offset, e.what());
        return 1;
    } catch (const UnknownIdentifier& e) {
        std::fprintf(stderr, "expression error: %s\n", e.what());
        return 1;
    } catch (const ArityMismatch& e) {
        std::fprintf(stderr, "expression error: %s\n", e.what());
        return 1;
    } catch (const DimensionError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }
    return 0;
}
