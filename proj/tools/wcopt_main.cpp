// Command-line front end: run experiments, restore feasibility, measure
// near-stationarity, and spot-check problem assumptions.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>
#include <unistd.h>

#include <CLI11.hpp>

#include "wcopt/wcopt.hpp"

namespace {

std::string self_path() {
    char buf[4096];
    const ssize_t n = ::readlink("/proc/self/exe", buf, sizeof buf - 1);
    if (n <= 0) return "";
    buf[n] = '\0';
    return buf;
}

int run_one(const std::string& config_path) {
    const wcopt::RunConfig cfg = wcopt::parse_config(config_path);
    const wcopt::ExperimentResult res = wcopt::run_experiment(cfg);
    const auto& trace = cfg.baseline ? res.baseline_trace : res.run.trace;
    for (const auto& w : trace.warnings) std::cerr << "warning: " << w << "\n";
    std::printf("trace=%s rows=%zu f=%.6g", res.csv_path.c_str(), trace.rows.size(),
                res.final_f);
    if (!std::isnan(res.final_g)) std::printf(" g=%.6g", res.final_g);
    if (!cfg.baseline)
        std::printf(" T=%lld R=%lld eps_hat=%.6g", res.run.T, res.run.R, trace.eps_hat);
    if (!std::isnan(trace.stationarity_mean_distance))
        std::printf(" stat_mean=%.6g stat_mean_sq=%.6g", trace.stationarity_mean_distance,
                    trace.stationarity_mean_squared);
    if (trace.descent_violations > 0)
        std::printf(" descent_violations=%lld", trace.descent_violations);
    std::printf("\n");
    return 0;
}

// runs each config in its own child process, at most `jobs` at a time
int run_batch(const std::vector<std::string>& configs, unsigned jobs) {
    const std::string self = self_path();
    if (self.empty()) {
        std::cerr << "error: cannot resolve own executable for batch mode\n";
        return 1;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < configs.size();
             i = next.fetch_add(1)) {
            const std::string cmd = "'" + self + "' run '" + configs[i] + "'";
            if (std::system(cmd.c_str()) != 0) failures.fetch_add(1);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, jobs); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return failures.load() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-order solvers for weakly convex constrained optimization"};
    app.require_subcommand(1);

    std::vector<std::string> run_configs;
    unsigned jobs = 1;
    auto* run_cmd = app.add_subcommand("run", "execute experiment config(s)");
    run_cmd->add_option("config", run_configs, "config file(s)")->required();
    run_cmd->add_option("--jobs", jobs, "parallel worker processes for multiple configs");

    std::string feas_config;
    auto* feas_cmd = app.add_subcommand("feascheck", "feasibility restoration only");
    feas_cmd->add_option("config", feas_config, "config file")->required();

    std::string measure_config, point_path;
    auto* measure_cmd = app.add_subcommand("measure", "near-stationarity of a point");
    measure_cmd->add_option("config", measure_config, "config file")->required();
    measure_cmd->add_option("--point", point_path, "whitespace-separated coordinates");

    std::string validate_config;
    long long validate_samples = 10000;
    auto* validate_cmd = app.add_subcommand("validate", "spot-check problem assumptions");
    validate_cmd->add_option("config", validate_config, "config file")->required();
    validate_cmd->add_option("--samples", validate_samples, "sample count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            if (run_configs.size() == 1 && jobs <= 1) return run_one(run_configs[0]);
            return run_batch(run_configs, jobs);
        }
        if (feas_cmd->parsed()) {
            wcopt::RunConfig cfg = wcopt::parse_config(feas_config);
            const wcopt::FeasResult res = wcopt::run_feascheck(cfg);
            std::printf("status=%s g=%.6g oracle_calls=%lld\n",
                        res.status == wcopt::FeasStatus::feasible
                            ? "feasible"
                            : "stationary_infeasible",
                        res.g_value, res.oracle_calls);
            return 0;
        }
        if (measure_cmd->parsed()) {
            wcopt::RunConfig cfg = wcopt::parse_config(measure_config);
            if (!point_path.empty()) cfg.point_path = point_path;
            const wcopt::StationarityReport rep = wcopt::run_measure(cfg);
            std::printf("distance_estimate=%.6g slack_bound=%.6g eps_meter=%.6g",
                        rep.distance_estimate, rep.solver_slack_bound,
                        rep.subproblem_accuracy);
            if (!std::isnan(rep.g_at_candidate))
                std::printf(" g_at_candidate=%.6g", rep.g_at_candidate);
            std::printf("\n");
            return 0;
        }
        if (validate_cmd->parsed()) {
            wcopt::RunConfig cfg = wcopt::parse_config(validate_config);
            const wcopt::BuiltProblem built = wcopt::build_problem(cfg);
            const auto rep = wcopt::validate_problem(
                built.problem, static_cast<std::size_t>(validate_samples), cfg.seed);
            for (const auto& n : rep.notes) std::printf("note: %s\n", n.c_str());
            for (const auto& v : rep.violations) std::printf("violation: %s\n", v.c_str());
            std::printf("samples=%zu violations=%zu\n", rep.samples_checked,
                        rep.violations.size());
            return rep.ok() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
