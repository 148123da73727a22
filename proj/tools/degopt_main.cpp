// Batch front-end: solve / optimize / verify / sweep over a JSON config.
// Exit codes: 0 ok, 2 config error, 3 solver failure, 4 optimizer
// non-convergence, 5 verification failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "degopt/config.hpp"
#include "degopt/errors.hpp"
#include "degopt/io.hpp"
#include "degopt/kernels.hpp"
#include "degopt/norms.hpp"
#include "degopt/optimizer.hpp"
#include "degopt/reduced.hpp"
#include "degopt/solvers.hpp"
#include "degopt/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitOptimizer = 4;
constexpr int kExitVerify = 5;

struct CliArgs {
    std::string config_path;
    std::string out_dir;  // overrides output.directory when nonempty
    std::optional<unsigned long long> seed;
    bool dump_trajectories = false;
    std::string suite = "all";
    std::string sweep;  // key=v1,v2,...
};

json provenance(const degopt::RunConfig& cfg) {
    return {{"config_hash", cfg.hash},
            {"version", degopt::kVersion},
            {"kernels", degopt::kern::active_name()},
            {"seed", cfg.seed}};
}

degopt::RunConfig load_with_overrides(const CliArgs& args) {
    degopt::RunConfig cfg = degopt::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed) cfg.seed = *args.seed;
    if (args.dump_trajectories) cfg.dump_trajectories = true;
    return cfg;
}

int cmd_solve(const CliArgs& args) {
    const degopt::RunConfig cfg = load_with_overrides(args);
    degopt::BuiltProblem built = degopt::build_problem(cfg);
    fs::create_directories(cfg.out_dir);

    const degopt::Trajectory y =
        degopt::solve_state(built.spec, built.ops, built.control, cfg.scheme);

    // mass functional 1'My and bound bookkeeping
    std::vector<double> ones(built.ops.n_nodes(), 1.0);
    std::vector<double> my(built.ops.n_nodes());
    built.ops.mass.matvec(ones, my);
    auto mass_of = [&](std::span<const double> lv) {
        return degopt::kern::active().dot(my.data(), lv.data(), my.size());
    };
    const double mass0 = mass_of(y.level(0));
    double mass_drift = 0.0;
    for (int n = 1; n <= built.spec.time.n_steps; ++n)
        mass_drift = std::max(mass_drift, std::abs(mass_of(y.level(n)) - mass0));

    const double y0_sup = degopt::norm_linf(std::span<const double>(built.spec.y0));
    const double sup_bound =
        std::exp((built.control.max_abs() + 1.0) * built.spec.time.T) * y0_sup;

    json summary = {{"sup_norm", degopt::norm_linf(y)},
                    {"sup_bound", sup_bound},
                    {"final_l2", degopt::norm_l2(built.ops, y.level(built.spec.time.n_steps))},
                    {"ct_l2", degopt::norm_ct_l2(built.ops, y)},
                    {"l2_h1a", degopt::norm_l2_h1a(built.ops, y)},
                    {"energy_bound", 2.0 * std::exp((built.control.max_abs() + 1.0) *
                                                    built.spec.time.T) *
                                         degopt::norm_l2(built.ops, built.spec.y0)},
                    {"mass_initial", mass0},
                    {"mass_drift_rel", mass_drift / std::max(std::abs(mass0), 1e-300)},
                    {"provenance", provenance(cfg)}};
    degopt::write_json((fs::path(cfg.out_dir) / "solve_summary.json").string(), summary);
    if (cfg.dump_trajectories)
        degopt::write_trajectory_csv((fs::path(cfg.out_dir) / "trajectory.csv").string(),
                                     built.mesh, y);
    return kExitOk;
}

int cmd_optimize(const CliArgs& args) {
    const degopt::RunConfig cfg = load_with_overrides(args);
    degopt::BuiltProblem built = degopt::build_problem(cfg);
    fs::create_directories(cfg.out_dir);

    const degopt::OptimizationResult result =
        degopt::optimize(built.spec, built.ops, cfg.scheme, built.u0, cfg.optimizer);

    degopt::write_iteration_csv((fs::path(cfg.out_dir) / "iterations.csv").string(),
                                result.history);
    degopt::write_control_csv((fs::path(cfg.out_dir) / "control.csv").string(), built.mesh,
                              result.u);

    json cert = {{"converged", result.converged},
                 {"stalled", result.stalled},
                 {"iterations", result.iterations},
                 {"final_cost", result.final_cost},
                 {"final_residual", result.final_residual},
                 {"ssc", degopt::to_json(result.ssc)},
                 {"active_set", degopt::to_json(result.active)},
                 {"provenance", provenance(cfg)}};
    if (result.converged) {
        degopt::CertifyOptions copt;
        copt.seed = cfg.seed;
        cert["certification"] = degopt::to_json(
            degopt::certify(built.spec, built.ops, cfg.scheme, result, copt));
    }
    degopt::write_json((fs::path(cfg.out_dir) / "certification.json").string(), cert);

    if (cfg.dump_trajectories) {
        const degopt::Trajectory y =
            degopt::solve_state(built.spec, built.ops, result.u, cfg.scheme);
        degopt::write_trajectory_csv((fs::path(cfg.out_dir) / "trajectory.csv").string(),
                                     built.mesh, y);
    }
    if (!result.converged) {
        std::cerr << "optimizer did not converge: residual " << result.final_residual
                  << " after " << result.iterations << " iterations"
                  << (result.stalled ? " (line search stalled)" : "") << "\n";
        return kExitOptimizer;
    }
    return kExitOk;
}

int cmd_verify(const CliArgs& args) {
    const degopt::RunConfig cfg = load_with_overrides(args);
    degopt::BuiltProblem built = degopt::build_problem(cfg);
    fs::create_directories(cfg.out_dir);

    degopt::SuiteOptions sopt;
    sopt.max_principle_trials = cfg.verify_trials;
    sopt.lipschitz_pairs = cfg.verify_pairs;
    sopt.seed = cfg.seed;
    sopt.grading = cfg.grading;
    sopt.quad_order = cfg.quad_order;

    const auto reports =
        degopt::run_suites(built.spec, built.ops, cfg.scheme, args.suite, sopt);

    json jreports = json::array();
    bool all_passed = true;
    for (const auto& rep : reports) {
        jreports.push_back(degopt::to_json(rep));
        all_passed = all_passed && rep.passed;
    }
    json out = {{"suites", jreports}, {"all_passed", all_passed}, {"provenance", provenance(cfg)}};
    degopt::write_json((fs::path(cfg.out_dir) / "verify_report.json").string(), out);

    for (const auto& rep : reports)
        std::cout << (rep.passed ? "[pass] " : "[FAIL] ") << rep.name << "\n";
    return all_passed ? kExitOk : kExitVerify;
}

int cmd_sweep(const CliArgs& args) {
    const degopt::RunConfig base = load_with_overrides(args);
    const auto eq = args.sweep.find('=');
    if (args.sweep.empty() || eq == std::string::npos)
        throw degopt::config_error("--sweep expects key=v1,v2,...");
    const std::string key = args.sweep.substr(0, eq);
    std::vector<double> values;
    {
        std::stringstream ss(args.sweep.substr(eq + 1));
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) values.push_back(std::stod(item));
    }
    if (values.empty()) throw degopt::config_error("--sweep value list is empty");
    if (key != "alpha" && key != "n_cells" && key != "n_steps")
        throw degopt::config_error("--sweep key must be alpha|n_cells|n_steps");

    fs::create_directories(base.out_dir);
    std::ofstream table((fs::path(base.out_dir) / "sweep.csv").string(), std::ios::binary);
    table << "value,cost,residual,delta,gamma_hat,converged\n";

    int succeeded = 0;
    for (std::size_t row = 0; row < values.size(); ++row) {
        degopt::RunConfig cfg = base;
        if (key == "alpha") cfg.alpha = values[row];
        if (key == "n_cells") cfg.n_cells = static_cast<int>(values[row]);
        if (key == "n_steps") cfg.n_steps = static_cast<int>(values[row]);
        cfg.out_dir = (fs::path(base.out_dir) / ("row_" + std::to_string(row))).string();
        try {
            degopt::BuiltProblem built = degopt::build_problem(cfg);
            fs::create_directories(cfg.out_dir);
            const degopt::OptimizationResult result =
                degopt::optimize(built.spec, built.ops, cfg.scheme, built.u0, cfg.optimizer);
            degopt::write_iteration_csv((fs::path(cfg.out_dir) / "iterations.csv").string(),
                                        result.history);
            double gamma_hat = 0.0;
            if (result.converged) {
                degopt::CertifyOptions copt;
                copt.seed = cfg.seed;
                copt.growth_samples = 50;
                copt.hessian_samples = 10;
                const auto cert = degopt::certify(built.spec, built.ops, cfg.scheme, result, copt);
                gamma_hat = cert.gamma_hat;
                ++succeeded;
            }
            table << degopt::format_double(values[row]) << ','
                  << degopt::format_double(result.final_cost) << ','
                  << degopt::format_double(result.final_residual) << ','
                  << degopt::format_double(result.ssc.delta) << ','
                  << degopt::format_double(gamma_hat) << ','
                  << (result.converged ? 1 : 0) << '\n';
        } catch (const std::exception& e) {
            table << degopt::format_double(values[row]) << ",nan,nan,nan,nan,0\n";
            std::cerr << "sweep row " << row << " failed: " << e.what() << "\n";
        }
    }
    return succeeded > 0 ? kExitOk : kExitOptimizer;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bilinear control of a degenerate 1D parabolic equation"};
    app.require_subcommand(1);

    CliArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON run configuration")->required();
        sub->add_option("--out", args.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", args.seed, "seed override");
        sub->add_flag("--dump-trajectories", args.dump_trajectories, "write trajectory CSVs");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the state solver");
    add_common(solve);
    CLI::App* optimize = app.add_subcommand("optimize", "run projected-gradient descent");
    add_common(optimize);
    CLI::App* verify = app.add_subcommand("verify", "run verification suites");
    add_common(verify);
    verify->add_option("--suite", args.suite,
                       "max_principle|gradient|hessian|lipschitz|convergence|all");
    CLI::App* sweep = app.add_subcommand("sweep", "repeat optimize across parameter values");
    add_common(sweep);
    sweep->add_option("--sweep", args.sweep, "key=v1,v2,... (alpha|n_cells|n_steps)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve(args);
        if (optimize->parsed()) return cmd_optimize(args);
        if (verify->parsed()) return cmd_verify(args);
        if (sweep->parsed()) return cmd_sweep(args);
    } catch (const degopt::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const degopt::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const degopt::assembly_failure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const degopt::step_failure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitConfig;
}
