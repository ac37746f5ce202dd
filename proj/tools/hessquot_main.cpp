// hessquot: batch front end for the Hessian-quotient boundary-value solver.
//
//   hessquot solve <config.json>               single solve (plain Newton, or
//                                              a regularization sweep when the
//                                              epsilon schedule has >1 stage)
//   hessquot sweep <config.json>               always run the full schedule
//   hessquot check-subsolution <config.json>   evaluate the one-sided
//                                              subsolution test for the
//                                              configured candidate
//   hessquot verify [--seed N]                 run verification suites 1-6
//
// Exit codes: 0 success / 1 configuration error / 2 solver or check failure.
// Relative report paths are resolved under $HESSQUOT_REPORT_DIR when set.

#include <hessquot/config.hpp>
#include <hessquot/report.hpp>
#include <hessquot/solver.hpp>
#include <hessquot/verify.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hessquot::ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

hessquot::RunConfig load_config(const std::string& path) {
    return hessquot::parse_config(read_file(path));
}

void emit_solution_reports(const hessquot::RunConfig& cfg,
                           const std::vector<hessquot::SolveReport>& stages,
                           const std::vector<double>& epsilons,
                           const hessquot::ScalarField& solution) {
    const auto doc = hessquot::summary_json(stages, epsilons);
    hessquot::write_summary(hessquot::resolve_report_path(cfg.output.report_path), doc);
    hessquot::write_convergence_csv(hessquot::resolve_report_path(cfg.output.convergence_path),
                                    stages);
    if (cfg.output.field_dump)
        hessquot::write_field_csv(hessquot::resolve_report_path(cfg.output.field_path), solution);
}

int run_solve(const std::string& config_path, bool force_sweep) {
    const hessquot::RunConfig cfg = load_config(config_path);
    const hessquot::ProblemSpec problem = hessquot::build_problem(cfg);

    std::vector<hessquot::SolveReport> stages;
    std::vector<double> epsilons;
    bool converged = false;
    hessquot::ScalarField solution(problem.domain,
                                   Eigen::VectorXd::Zero(problem.domain->node_count()));
    const bool sweep = force_sweep || cfg.solver.eps_schedule().size() > 1;
    if (sweep) {
        const hessquot::SweepResult sw = hessquot::regularized_sweep(problem, cfg.solver);
        stages = sw.stages;
        epsilons = sw.epsilons;
        epsilons.resize(stages.size());
        solution = sw.solution;
        converged = sw.all_converged;
    } else {
        auto [u, rep] =
            hessquot::newton_solve(problem, hessquot::initial_guess(problem), cfg.solver);
        stages.push_back(rep);
        epsilons.push_back(0.0);
        solution = u;
        converged = rep.converged;
    }
    emit_solution_reports(cfg, stages, epsilons, solution);
    if (!converged) {
        std::cerr << "solver failed: " << to_string(stages.back().status) << " ("
                  << stages.back().message << ")\n";
        return kExitSolver;
    }
    std::cout << "converged in " << stages.size() << " stage(s); report written to "
              << hessquot::resolve_report_path(cfg.output.report_path) << "\n";
    return kExitOk;
}

int run_check_subsolution(const std::string& config_path) {
    const hessquot::RunConfig cfg = load_config(config_path);
    if (cfg.problem.subsolution.empty())
        throw hessquot::ConfigError("problem.subsolution",
                                    "check-subsolution needs a candidate expression");
    const hessquot::ProblemSpec problem = hessquot::build_problem(cfg);
    const hessquot::SubsolutionReport rep =
        hessquot::subsolution_check(*problem.subsolution, problem);

    nlohmann::ordered_json doc;
    doc["passed"] = rep.passed;
    doc["boundary_equality"] = rep.boundary_equality;
    doc["interior_min"] = rep.interior_min;
    doc["boundary_min"] = rep.boundary_min;
    doc["boundary_sup_abs"] = rep.boundary_sup_abs;
    const std::string path = hessquot::resolve_report_path(cfg.output.report_path);
    hessquot::write_summary(path, doc);
    std::cout << doc.dump(2) << "\n";
    return rep.passed ? kExitOk : kExitSolver;
}

int run_verify(std::uint64_t seed) {
    const auto results = hessquot::verify::run_verification_suites(seed);
    bool all = true;
    for (const auto& r : results) {
        std::cout << hessquot::verify::format_suite_line(r) << "\n";
        all = all && r.passed;
    }
    std::cout << (all ? "all suites passed" : "suite failures detected") << "\n";
    return all ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hessian-quotient oblique-boundary solver"};
    app.require_subcommand(1);

    std::string solve_config, sweep_config, check_config;
    std::uint64_t seed = 20260817u;

    CLI::App* solve = app.add_subcommand("solve", "run one problem from a config file");
    solve->add_option("config", solve_config, "path to the JSON config")->required();
    CLI::App* sweep = app.add_subcommand("sweep", "run the full regularization schedule");
    sweep->add_option("config", sweep_config, "path to the JSON config")->required();
    CLI::App* check =
        app.add_subcommand("check-subsolution", "evaluate the one-sided subsolution test");
    check->add_option("config", check_config, "path to the JSON config")->required();
    CLI::App* verify = app.add_subcommand("verify", "run the operator verification suites");
    verify->add_option("--seed", seed, "sample-stream seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (solve->parsed()) return run_solve(solve_config, false);
        if (sweep->parsed()) return run_solve(sweep_config, true);
        if (check->parsed()) return run_check_subsolution(check_config);
        return run_verify(seed);
    } catch (const hessquot::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
}
