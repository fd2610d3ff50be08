#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <span>
#include <sstream>

#include "wcopt/dataset.hpp"
#include "wcopt/problems.hpp"
#include "wcopt/prox_point.hpp"
#include "wcopt/stationarity.hpp"

namespace wcopt {

// Data-pass convention for the experiment traces: one full deterministic
// evaluation of f or g costs 1.0 pass; a single stochastic draw costs 1/N,
// where N is the total number of rows in the sampled datasets. Value and
// subgradient at the same point in the same call count once.
inline double count_data_passes(std::size_t n_objective_evals,
                                std::size_t n_constraint_evals,
                                std::span<const std::size_t> dataset_sizes,
                                std::size_t stochastic_samples) {
    std::size_t total = 0;
    for (std::size_t s : dataset_sizes) total += s;
    if (total == 0) total = 1;
    return static_cast<double>(n_objective_evals) +
           static_cast<double>(n_constraint_evals) +
           static_cast<double>(stochastic_samples) / static_cast<double>(total);
}

// Flat key = value experiment description; see the README for the schema.
struct RunConfig {
    std::string problem;  // simple_example | fairness | neyman_pearson

    // dataset sources (data problems only); empty paths select the generator
    std::string train_path, unlabeled_path;
    std::string data_format = "libsvm";  // libsvm | csv
    std::string label_column, group_column;

    // synthetic generator knobs
    std::size_t n = 2000, d = 20;
    double minority_fraction = 0.3;
    double separation = 1.0;
    std::size_t classes = 3, n_per_class = 500;

    // problem parameters
    double c = 0.2;
    double alpha = 2.0;
    double l1_radius = 20.0;
    double l2_radius = 10.0;
    double loss_cap = 0.5;
    std::optional<double> rho;        // declared weak-convexity modulus override
    std::optional<double> sigma_eps;  // Slater constants override
    std::optional<double> rho_eps;

    // solver parameters
    double epsilon = 0.1;
    double delta = 0.1;
    std::optional<double> rho_hat;  // default 2 rho when rho is known
    std::optional<double> eps_hat;  // default 1e-2 when sigma_eps is unknown
    std::optional<long long> T;
    std::optional<long long> K;
    std::string oracle = "switching";  // switching | stochastic
    bool baseline = false;             // direct queue method, no outer loop
    std::uint64_t seed = 0;
    std::optional<long long> record_stationarity_every;

    // start point: "zeros", "ones_projected" or a comma-separated vector;
    // empty selects the per-problem default
    std::string start;

    // feasibility restoration / stationarity measurement
    long long feas_budget = 50;
    std::optional<double> eps_meter;
    long long budget_multiplier = 4;
    std::string point_path;

    std::string output;       // trace CSV path
    std::string config_stem;  // basename of the config file, for defaults
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

struct KvParser {
    std::map<std::string, std::string> kv;
    std::string source;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    template <typename F>
    void take(const std::string& key, F&& apply) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        apply(it->second);
        kv.erase(it);
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("config " + source + ": " + what);
    }

    double num(const std::string& key, const std::string& v) const {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (...) {
            fail("key '" + key + "' expects a number, got '" + v + "'");
        }
    }

    long long integer(const std::string& key, const std::string& v) const {
        const double x = num(key, v);
        if (x != std::floor(x)) fail("key '" + key + "' expects an integer");
        return static_cast<long long>(x);
    }

    bool boolean(const std::string& key, const std::string& v) const {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        fail("key '" + key + "' expects true/false");
    }
};

inline KvParser read_kv(std::istream& in, const std::string& source) {
    KvParser p;
    p.source = source;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            p.fail("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty()) p.fail("line " + std::to_string(lineno) + ": empty key");
        if (!p.kv.emplace(key, val).second)
            p.fail("duplicate key '" + key + "'");
    }
    return p;
}

}  // namespace detail

// Parses and validates a run configuration, filling the documented defaults:
// eps_hat = 1e-2 when the Slater constants are unknown, K = 1/eps_hat^2 once
// eps_hat is fixed, rho_hat = 2 rho once rho is known.
inline RunConfig parse_config_stream(std::istream& in, const std::string& source) {
    detail::KvParser p = detail::read_kv(in, source);
    RunConfig cfg;
    cfg.config_stem = source;
    const auto slash = cfg.config_stem.find_last_of('/');
    if (slash != std::string::npos) cfg.config_stem = cfg.config_stem.substr(slash + 1);
    const auto dot = cfg.config_stem.find_last_of('.');
    if (dot != std::string::npos && dot > 0) cfg.config_stem.resize(dot);

    p.take("problem", [&](const std::string& v) { cfg.problem = v; });
    if (cfg.problem.empty()) p.fail("missing required key 'problem'");
    if (cfg.problem != "simple_example" && cfg.problem != "fairness" &&
        cfg.problem != "neyman_pearson")
        p.fail("unknown problem '" + cfg.problem + "'");

    const bool data_keys = p.has("train_path") || p.has("unlabeled_path");
    if (cfg.problem == "simple_example" && data_keys)
        p.fail("simple_example is a builtin; dataset paths conflict with it");
    if (cfg.problem == "neyman_pearson" && data_keys)
        p.fail("neyman_pearson runs on generated classes; dataset paths conflict");
    if (cfg.problem == "fairness" && (p.has("train_path") != p.has("unlabeled_path")))
        p.fail("fairness from files needs both train_path and unlabeled_path");

    p.take("train_path", [&](const std::string& v) { cfg.train_path = v; });
    p.take("unlabeled_path", [&](const std::string& v) { cfg.unlabeled_path = v; });
    p.take("data_format", [&](const std::string& v) {
        if (v != "libsvm" && v != "csv") p.fail("data_format must be libsvm or csv");
        cfg.data_format = v;
    });
    p.take("label_column", [&](const std::string& v) { cfg.label_column = v; });
    p.take("group_column", [&](const std::string& v) { cfg.group_column = v; });

    p.take("n", [&](const std::string& v) { cfg.n = p.integer("n", v); });
    p.take("d", [&](const std::string& v) { cfg.d = p.integer("d", v); });
    p.take("minority_fraction",
           [&](const std::string& v) { cfg.minority_fraction = p.num("minority_fraction", v); });
    p.take("separation",
           [&](const std::string& v) { cfg.separation = p.num("separation", v); });
    p.take("classes", [&](const std::string& v) { cfg.classes = p.integer("classes", v); });
    p.take("n_per_class",
           [&](const std::string& v) { cfg.n_per_class = p.integer("n_per_class", v); });

    p.take("c", [&](const std::string& v) { cfg.c = p.num("c", v); });
    p.take("alpha", [&](const std::string& v) { cfg.alpha = p.num("alpha", v); });
    p.take("l1_radius", [&](const std::string& v) { cfg.l1_radius = p.num("l1_radius", v); });
    p.take("l2_radius", [&](const std::string& v) { cfg.l2_radius = p.num("l2_radius", v); });
    p.take("loss_cap", [&](const std::string& v) { cfg.loss_cap = p.num("loss_cap", v); });
    p.take("rho", [&](const std::string& v) { cfg.rho = p.num("rho", v); });
    p.take("sigma_eps", [&](const std::string& v) { cfg.sigma_eps = p.num("sigma_eps", v); });
    p.take("rho_eps", [&](const std::string& v) { cfg.rho_eps = p.num("rho_eps", v); });

    p.take("epsilon", [&](const std::string& v) { cfg.epsilon = p.num("epsilon", v); });
    p.take("delta", [&](const std::string& v) { cfg.delta = p.num("delta", v); });
    p.take("rho_hat", [&](const std::string& v) { cfg.rho_hat = p.num("rho_hat", v); });
    p.take("eps_hat", [&](const std::string& v) { cfg.eps_hat = p.num("eps_hat", v); });
    p.take("T", [&](const std::string& v) { cfg.T = p.integer("T", v); });
    p.take("K", [&](const std::string& v) { cfg.K = p.integer("K", v); });
    p.take("oracle", [&](const std::string& v) {
        if (v != "switching" && v != "stochastic")
            p.fail("oracle must be switching or stochastic");
        cfg.oracle = v;
    });
    p.take("baseline", [&](const std::string& v) { cfg.baseline = p.boolean("baseline", v); });
    p.take("seed", [&](const std::string& v) {
        cfg.seed = static_cast<std::uint64_t>(p.integer("seed", v));
    });
    p.take("record_stationarity_every", [&](const std::string& v) {
        cfg.record_stationarity_every = p.integer("record_stationarity_every", v);
    });
    p.take("start", [&](const std::string& v) { cfg.start = v; });
    p.take("feas_budget",
           [&](const std::string& v) { cfg.feas_budget = p.integer("feas_budget", v); });
    p.take("eps_meter", [&](const std::string& v) { cfg.eps_meter = p.num("eps_meter", v); });
    p.take("budget_multiplier", [&](const std::string& v) {
        cfg.budget_multiplier = p.integer("budget_multiplier", v);
    });
    p.take("point", [&](const std::string& v) { cfg.point_path = v; });
    p.take("output", [&](const std::string& v) { cfg.output = v; });

    if (!p.kv.empty()) p.fail("unknown key '" + p.kv.begin()->first + "'");

    if (!(cfg.epsilon > 0.0)) p.fail("epsilon must be positive");
    if (cfg.eps_hat && !(*cfg.eps_hat > 0.0)) p.fail("eps_hat must be positive");
    if (cfg.T && *cfg.T < 1) p.fail("T must be >= 1");
    if (cfg.K && *cfg.K < 1) p.fail("K must be >= 1");
    if (cfg.rho_hat && !(*cfg.rho_hat > 0.0)) p.fail("rho_hat must be positive");

    // Slater constants are known for the builtin analytic problem, or when
    // given explicitly; otherwise the subproblem tolerance cannot be derived
    // and the experiments' 1e-2 convention applies.
    const bool sigma_known = cfg.problem == "simple_example" || cfg.sigma_eps.has_value();
    if (!cfg.eps_hat && !sigma_known) cfg.eps_hat = 1e-2;
    if (!cfg.K && cfg.eps_hat)
        cfg.K = static_cast<long long>(std::ceil(1.0 / (*cfg.eps_hat * *cfg.eps_hat)));
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    return parse_config_stream(in, path);
}

// ---- problem instantiation ------------------------------------------------

struct BuiltProblem {
    ConstrainedProblem problem;
    Vector default_start;
};

inline BuiltProblem build_problem(const RunConfig& cfg) {
    BuiltProblem out;
    if (cfg.problem == "simple_example") {
        out.problem = build_simple_example(cfg.rho_eps.value_or(1.0));
        if (cfg.sigma_eps) out.problem.slater->sigma_eps = *cfg.sigma_eps;
        out.default_start = {0.0, 0.5};
    } else if (cfg.problem == "fairness") {
        FairnessSpec spec;
        spec.alpha = cfg.alpha;
        spec.c = cfg.c;
        spec.l1_radius = cfg.l1_radius;
        spec.rho_override = cfg.rho;
        Dataset train, unlabeled;
        if (!cfg.train_path.empty()) {
            if (cfg.data_format == "libsvm") {
                train = load_libsvm(cfg.train_path);
                unlabeled = load_libsvm(cfg.unlabeled_path);
                unlabeled.group_mask.emplace(unlabeled.rows, 0);
                if (unlabeled.labels) {  // mark the positive-label rows as minority
                    for (std::size_t i = 0; i < unlabeled.rows; ++i)
                        (*unlabeled.group_mask)[i] = (*unlabeled.labels)[i] > 0 ? 1 : 0;
                }
            } else {
                train = load_csv(cfg.train_path, cfg.label_column, "");
                unlabeled = load_csv(cfg.unlabeled_path, "", cfg.group_column);
            }
        } else {
            auto data = generate_fairness_data(cfg.n, cfg.d, cfg.seed,
                                               cfg.minority_fraction, cfg.separation);
            train = std::move(data.train);
            unlabeled = std::move(data.unlabeled);
        }
        out.problem = build_fairness_problem(std::move(train), std::move(unlabeled), spec);
        out.default_start = project(out.problem.domain, Vector(out.problem.dim, 1.0));
    } else if (cfg.problem == "neyman_pearson") {
        NeymanPearsonSpec spec;
        spec.l2_radius = cfg.l2_radius;
        spec.alpha = cfg.alpha;
        spec.loss_caps.assign(cfg.classes - 1, cfg.loss_cap);
        auto data = generate_multiclass_data(cfg.classes, cfg.n_per_class, cfg.d,
                                             cfg.seed, cfg.separation);
        out.problem = build_neyman_pearson(std::move(data), spec);
        if (cfg.rho) out.problem.rho = *cfg.rho;
        out.default_start = project(out.problem.domain, Vector(out.problem.dim, 1.0));
    } else {
        throw std::invalid_argument("build_problem: unknown problem '" + cfg.problem + "'");
    }
    if (cfg.rho) {
        out.problem.rho = *cfg.rho;
        out.problem.objective.weak_convexity_modulus =
            std::min(out.problem.objective.weak_convexity_modulus, *cfg.rho);
        for (auto& con : out.problem.constraints)
            con.weak_convexity_modulus = std::min(con.weak_convexity_modulus, *cfg.rho);
    }
    if (cfg.sigma_eps && cfg.problem != "simple_example")
        out.problem.slater = SlaterConstants{*cfg.sigma_eps, cfg.rho_eps.value_or(1.0)};
    return out;
}

inline Vector resolve_start(const RunConfig& cfg, const BuiltProblem& built) {
    if (cfg.start.empty()) return built.default_start;
    if (cfg.start == "zeros") return Vector(built.problem.dim, 0.0);
    if (cfg.start == "ones_projected")
        return project(built.problem.domain, Vector(built.problem.dim, 1.0));
    Vector x;
    std::stringstream ss(cfg.start);
    std::string tok;
    while (std::getline(ss, tok, ',')) x.push_back(std::stod(detail::trim(tok)));
    if (x.size() != built.problem.dim)
        throw std::invalid_argument("start: expected " + std::to_string(built.problem.dim) +
                                    " coordinates, got " + std::to_string(x.size()));
    return x;
}

inline Vector read_point_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("point file: cannot open " + path);
    Vector x;
    double v = 0.0;
    while (in >> v) x.push_back(v);
    if (x.empty()) throw std::invalid_argument("point file " + path + " holds no numbers");
    return x;
}

// ---- trace CSV -------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "iter,data_passes,wall_seconds,f_value,g_value,oracle_Fgap_bound,"
    "stationarity_estimate";

namespace detail {
inline void append_cell(std::string& line, double v, const char* fmt) {
    if (std::isnan(v)) return;  // blank cell
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    line += buf;
}
}  // namespace detail

inline void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace output " + path);
    out << kTraceHeader << '\n';
    for (const auto& r : trace.rows) {
        std::string line = std::to_string(r.iter);
        line += ',';
        detail::append_cell(line, r.data_passes, "%.10g");
        line += ',';
        detail::append_cell(line, r.wall_seconds, "%.6f");
        line += ',';
        detail::append_cell(line, r.f_value, "%.12g");
        line += ',';
        detail::append_cell(line, r.g_value, "%.12g");
        line += ',';
        detail::append_cell(line, r.oracle_fgap_bound, "%.12g");
        line += ',';
        detail::append_cell(line, r.stationarity_estimate, "%.12g");
        out << line << '\n';
    }
}

inline std::string resolve_output_path(const RunConfig& cfg) {
    if (!cfg.output.empty()) return cfg.output;
    std::string dir = ".";
    if (const char* env = std::getenv("WCOPT_OUTPUT_DIR"); env && *env) dir = env;
    return dir + "/" + (cfg.config_stem.empty() ? "trace" : cfg.config_stem) + ".csv";
}

// ---- experiment drivers -----------------------------------------------------

struct ExperimentResult {
    ProxPointResult run;      // empty trace in baseline mode
    RunTrace baseline_trace;  // populated in baseline mode
    std::string csv_path;
    double final_f = kNaN;
    double final_g = kNaN;
};

// Executes the configured run and writes the trace CSV. Baseline mode applies
// the queue method directly to the original problem and logs the running
// average at checkpoints; otherwise the full outer loop runs.
inline ExperimentResult run_experiment(const RunConfig& cfg) {
    BuiltProblem built = build_problem(cfg);
    const ConstrainedProblem& p = built.problem;
    Vector x0 = resolve_start(cfg, built);

    ExperimentResult res;
    res.csv_path = resolve_output_path(cfg);

    if (cfg.baseline) {
        if (!p.has_stochastic())
            throw std::invalid_argument(
                "baseline mode needs stochastic oracles for every function");
        const long long K = cfg.K.value_or(10000);
        const auto t0 = std::chrono::steady_clock::now();
        RunTrace& trace = res.baseline_trace;
        EvalCounts harness_evals;

        const double f0 = p.objective.value(x0);
        harness_evals.add_objective_eval();
        const double g0 = p.constraints.empty() ? kNaN : constraint_max(p, x0).value;
        if (!p.constraints.empty()) harness_evals.add_constraint_eval();
        trace.rows.push_back({0, harness_evals.data_passes, 0.0, f0, g0, kNaN, kNaN});

        StochasticConfig scfg;
        scfg.K = K;
        scfg.delta = cfg.delta;
        scfg.checkpoint_every = std::max<long long>(1, K / 100);
        scfg.checkpoint = [&](long long k, const Vector& avg, const EvalCounts& oracle_evals) {
            const double f = p.objective.value(avg);
            harness_evals.add_objective_eval();
            double g = kNaN;
            if (!p.constraints.empty()) {
                g = constraint_max(p, avg).value;
                harness_evals.add_constraint_eval();
            }
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            trace.rows.push_back({k, harness_evals.data_passes + oracle_evals.data_passes,
                                  wall, f, g, kNaN, kNaN});
        };
        Rng rng(cfg.seed);
        OracleReport rep = run_stochastic_baseline(p, x0, scfg, rng);
        trace.evals = rep.evals;
        trace.evals.merge(harness_evals);
        res.final_f = p.objective.value(rep.x);
        res.final_g = p.constraints.empty() ? kNaN : constraint_max(p, rep.x).value;
        res.run.x_final = std::move(rep.x);
        write_trace_csv(trace, res.csv_path);
        return res;
    }

    ProxPointConfig pcfg;
    pcfg.epsilon = cfg.epsilon;
    pcfg.delta = cfg.delta;
    if (cfg.rho_hat) {
        pcfg.rho_hat = *cfg.rho_hat;
    } else if (p.rho > 0.0) {
        pcfg.rho_hat = 2.0 * p.rho;  // the rho_hat = 2 rho convention
    } else {
        pcfg.rho_hat = 1.0;
    }
    pcfg.T_override = cfg.T;
    pcfg.eps_hat_override = cfg.eps_hat;
    pcfg.inner_K = cfg.K;
    if (!pcfg.inner_K) {
        // the practical K = 1/eps_hat^2 convention; the tolerance may only be
        // derivable here, once the problem constants are known
        double eps_hat_eff = 0.0;
        if (cfg.eps_hat) {
            eps_hat_eff = *cfg.eps_hat;
        } else if (p.slater) {
            eps_hat_eff = subproblem_tolerance(cfg.epsilon, p.M, pcfg.rho_hat, p.rho,
                                               diameter(p.domain), p.slater->sigma_eps);
        }
        if (eps_hat_eff > 0.0)
            pcfg.inner_K =
                static_cast<long long>(std::ceil(1.0 / (eps_hat_eff * eps_hat_eff)));
    }
    pcfg.oracle_kind =
        cfg.oracle == "stochastic" ? OracleKind::stochastic : OracleKind::switching;
    pcfg.seed = cfg.seed;
    pcfg.record_stationarity_every = cfg.record_stationarity_every;
    if (cfg.record_stationarity_every) {
        const double eps_meter = cfg.eps_meter.value_or(cfg.epsilon / 10.0);
        const double rho_hat = pcfg.rho_hat;
        const long long mult = cfg.budget_multiplier;
        const ConstrainedProblem* pp = &built.problem;
        pcfg.stationarity_probe = [pp, rho_hat, eps_meter, mult](const Vector& x) {
            try {
                return measure_stationarity(*pp, x, rho_hat, eps_meter, mult)
                    .distance_estimate;
            } catch (const std::invalid_argument&) {
                return kNaN;  // candidate infeasible for the meter: leave blank
            }
        };
    }

    res.run = run_prox_point(p, x0, pcfg);
    res.final_f = res.run.trace.rows.back().f_value;
    res.final_g = res.run.trace.rows.back().g_value;
    write_trace_csv(res.run.trace, res.csv_path);
    return res;
}

inline FeasResult run_feascheck(const RunConfig& cfg) {
    BuiltProblem built = build_problem(cfg);
    Vector x0 = resolve_start(cfg, built);
    FeasOptions opt;
    opt.budget = cfg.feas_budget;
    if (cfg.rho_hat) opt.rho_hat = cfg.rho_hat;
    opt.inner_K = cfg.K;
    opt.seed = cfg.seed;
    FeasResult res = feasibility_restore(built.problem, x0, cfg.epsilon, opt);
    if (!cfg.output.empty()) write_trace_csv(res.trace, cfg.output);
    return res;
}

inline StationarityReport run_measure(const RunConfig& cfg) {
    if (cfg.point_path.empty())
        throw std::invalid_argument("measure: a point file is required");
    BuiltProblem built = build_problem(cfg);
    Vector x = read_point_file(cfg.point_path);
    if (x.size() != built.problem.dim)
        throw std::invalid_argument("measure: point dimension mismatch");
    const double rho_hat = cfg.rho_hat.value_or(
        built.problem.rho > 0.0 ? 2.0 * built.problem.rho : 1.0);
    const double eps_meter = cfg.eps_meter.value_or(cfg.epsilon / 10.0);
    return measure_stationarity(built.problem, x, rho_hat, eps_meter,
                                cfg.budget_multiplier);
}

}  // namespace wcopt
