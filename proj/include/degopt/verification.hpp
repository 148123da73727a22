#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "degopt/optimizer.hpp"
#include "degopt/reduced.hpp"

namespace degopt {

// Machine-readable outcome of one verification check: pass/fail, the
// quantitative margins it was judged on, and a witness for failures.
struct CheckReport {
    std::string name;
    bool passed = false;
    std::map<std::string, double> margins;
    std::string witness;
};

// Randomized maximum-principle sweep: for nonnegative y0 (trial 0 is a unit
// spike, the rest random) and admissible v, the solution stays >= -1e-12
// nodally and below the exponential envelope e^{(|v|_inf + 1) T} |y0|_inf.
// The guarantee holds for the lumped-mass implicit-Euler scheme; running it
// against another scheme reports the violation it finds (trial, step, node).
CheckReport check_max_principles(const ProblemSpec& spec, const AssembledOperators& ops,
                                 const SchemeOptions& scheme, int n_random_controls,
                                 unsigned long long seed);

struct GradientCurve {
    std::vector<double> eps;
    std::vector<double> rel_error;
    double slope = 0.0;          // log-log fit on the pre-plateau segment
    double min_rel_error = 0.0;
    double dual_route_rel = 0.0;  // pointwise field vs algebraic route
    bool all_zero = false;        // w = 0 edge case
    bool passed = false;
};

// Central-difference check of the reduced gradient along w across eps_grid,
// plus the dual-route comparison. Throws invalid_argument when u +- eps*w
// leaves the box for some grid point.
GradientCurve gradient_check(const ProblemSpec& spec, const AssembledOperators& ops,
                             const SchemeOptions& scheme, const ControlField& u,
                             const ControlField& w, const std::vector<double>& eps_grid);

// Symmetry (exact), second-difference agreement, the q = 0 lower bound, and
// the oscillating-direction coercivity surrogate.
CheckReport hessian_check(const ProblemSpec& spec, const AssembledOperators& ops,
                          const SchemeOptions& scheme, const ControlField& u, int n_directions,
                          const std::vector<double>& eps_grid, unsigned long long seed);

// Monte-Carlo Lipschitz ratios of the control-to-state map (asserted against
// the explicit majorant 2 e^{2(beta+1)T} |y0|_inf) and of the adjoint map
// (reported against a chained majorant, not asserted).
CheckReport lipschitz_probe(const ProblemSpec& spec, const AssembledOperators& ops,
                            const SchemeOptions& scheme, int n_pairs, unsigned long long seed);

struct StudySpec {
    DiffusionCoefficient a = DiffusionCoefficient::budyko();
    ControlRegion omega = ControlRegion::whole_domain();
    Grading grading = Grading::uniform;
    int quad_order = 3;
    double T = 1.0;
    int base_cells = 8;
    int base_steps = 8;
    int levels = 4;  // each level halves h and dt
    double box_lower = -2.0;
    double box_upper = 2.0;
    SchemeOptions scheme;
    std::function<double(double)> y0 = [](double) { return 1.0; };
    std::function<double(double, double)> control = [](double, double) { return 0.0; };
    // optional closed-form reference; empty -> self-convergence vs finest level
    std::function<double(double, double)> exact;
};

struct ConvergenceTable {
    std::vector<int> cells;
    std::vector<int> steps;
    std::vector<double> errors;  // C([0,T];L2) against the reference
    std::vector<double> orders;  // log2(e_l / e_{l+1})
    bool monotone = false;
    bool passed = false;
};

// Refinement study halving h and dt per level; order >= 0.9 expected for the
// implicit Euler scheme. A non-monotone error sequence fails the study.
ConvergenceTable convergence_study(const StudySpec& study);

// Named-suite orchestration used by the CLI: selector is one of
// "max_principle", "gradient", "hessian", "lipschitz", "convergence", "all".
struct SuiteOptions {
    int max_principle_trials = 200;
    int lipschitz_pairs = 50;
    int hessian_directions = 6;
    unsigned long long seed = 1;
    Grading grading = Grading::uniform;
    int quad_order = 3;
};

std::vector<CheckReport> run_suites(const ProblemSpec& spec, const AssembledOperators& ops,
                                    const SchemeOptions& scheme, const std::string& selector,
                                    const SuiteOptions& options);

}  // namespace degopt
