#pragma once

#include <vector>

#include "degopt/reduced.hpp"

namespace degopt {

struct OptimizerOptions {
    int max_iters = 500;
    double stationarity_tol = 1e-8;
    double armijo_c = 1e-4;        // sufficient-decrease constant, in (0,1)
    double backtrack_factor = 0.5;  // in (0,1)
    double initial_step = 1.0;
    double min_step = 1e-14;
    unsigned long long seed = 0;  // randomized initial controls
    std::vector<double> alpha_continuation;  // optional decreasing warm-start schedule

    void validate() const;
};

struct IterationRecord {
    int iter = 0;
    double cost = 0.0;
    double residual = 0.0;
    double step = 0.0;
};

struct OptimizationResult {
    ControlField u;  // final control
    std::vector<IterationRecord> history;  // cost nonincreasing across accepted iterates
    int iterations = 0;
    bool converged = false;
    bool stalled = false;  // line search fell below min_step
    double final_cost = 0.0;
    double final_residual = 0.0;
    ActiveSetReport active;
    SSCReport ssc;
    double wall_seconds = 0.0;
};

// Projected gradient with Armijo backtracking on the projected path:
//   u+ = project(u - s g),  accept when J(u+) <= J(u) - (c/s) |u+ - u|^2.
// The initial step after the first iteration is a Barzilai-Borwein estimate
// clamped to [min_step, initial_step]. Terminates when the stationarity
// residual drops below tol or budgets exhaust; a stalled line search returns
// converged = false rather than throwing.
OptimizationResult optimize(const ProblemSpec& spec, const AssembledOperators& ops,
                            const SchemeOptions& scheme, const ControlField& u0,
                            const OptimizerOptions& options);

struct CertifyOptions {
    int hessian_samples = 50;
    int growth_samples = 200;
    double eps_probe = 1e-2;
    double tau_probe = 1e-6;       // strongly-active threshold for cone sampling
    double trichotomy_tol = 1e-8;  // pointwise stationarity audit tolerance
    double coercivity_slack = 1e-8;
    unsigned long long seed = 12345;
};

struct CertificationRecord {
    double stationarity_residual = 0.0;
    // pointwise audit of the three-branch optimality system
    bool trichotomy_passed = false;
    double trichotomy_worst = 0.0;
    long trichotomy_points = 0;
    SSCReport ssc;
    // Rayleigh quotients J''(u)v^2 / |v|^2 on sampled critical-cone directions
    int cone_samples = 0;
    double min_rayleigh = 0.0;
    bool coercivity_passed = false;  // min_rayleigh >= delta - slack (when SSC holds)
    // feasible-neighborhood growth probe
    int growth_samples = 0;
    int growth_negative = 0;  // samples with J(v) < J(u*)
    double gamma_hat = 0.0;   // min over samples of 2 (J(v)-J(u*)) / |v-u*|^2
    double eps_probe = 0.0;
};

// Bundles the optimality evidence at a converged result. Throws
// invalid_argument when result.converged is false.
CertificationRecord certify(const ProblemSpec& spec, const AssembledOperators& ops,
                            const SchemeOptions& scheme, const OptimizationResult& result,
                            const CertifyOptions& options = {});

}  // namespace degopt
