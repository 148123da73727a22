#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "degopt/fields.hpp"
#include "degopt/geometry.hpp"
#include "degopt/optimizer.hpp"
#include "degopt/solvers.hpp"

namespace degopt {

// Parsed run configuration. Strict: unknown keys are errors, and physical
// parameters (domain data, horizon, box, penalty weight) have no defaults.
struct RunConfig {
    // problem
    std::string coeff_kind = "budyko";
    double coeff_p = 1.0;
    std::vector<double> coeff_x, coeff_a;
    std::vector<std::pair<double, double>> omega;
    double T = 0.0;
    int n_steps = 0;
    int n_cells = 0;
    Grading grading = Grading::uniform;
    int quad_order = 3;
    double lower = 0.0, upper = 0.0, alpha = 0.0;
    nlohmann::json y0_spec, yd_spec, control_spec;

    SchemeOptions scheme;
    OptimizerOptions optimizer;
    nlohmann::json u0_spec;  // optimizer initial control; {"type":"random"} allowed

    int verify_trials = 200;
    int verify_pairs = 50;

    std::string out_dir = "out";
    bool dump_trajectories = false;
    unsigned long long seed = 1;

    std::string raw;   // file bytes, for provenance hashing
    std::string hash;  // fnv1a of raw
};

RunConfig load_config(const std::string& path);           // throws config_error
RunConfig parse_config(const std::string& json_text);     // throws config_error

struct BuiltProblem {
    Mesh1D mesh;
    AssembledOperators ops;
    ProblemSpec spec;
    ControlField control;  // from problem.control (zero when absent)
    ControlField u0;       // optimizer initial control
};

// Builds mesh/operators/data from the config. Configuration-level guard
// violations (dt * beta >= 1, bad nodal table lengths) throw config_error;
// assembly failures propagate as assembly_failure.
BuiltProblem build_problem(const RunConfig& cfg);

}  // namespace degopt
