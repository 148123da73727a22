#include "degopt/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "degopt/errors.hpp"
#include "degopt/kernels.hpp"
#include "degopt/norms.hpp"
#include "degopt/solvers.hpp"

namespace degopt {

namespace {

Trajectory state_for(const ProblemSpec& spec, const AssembledOperators& ops,
                     const SchemeOptions& scheme, const ControlField& u) {
    return solve_state(spec, ops, u, scheme);
}

Trajectory adjoint_for(const ProblemSpec& spec, const AssembledOperators& ops,
                       const SchemeOptions& scheme, const ControlField& u, const Trajectory& y) {
    std::vector<double> yT(ops.n_nodes());
    const auto last = y.level(spec.time.n_steps);
    for (int i = 0; i < ops.n_nodes(); ++i) yT[i] = last[i] - spec.yd[i];
    return solve_adjoint(spec, ops, u, yT, scheme);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

}  // namespace

CheckReport check_max_principles(const ProblemSpec& spec, const AssembledOperators& ops,
                                 const SchemeOptions& scheme, int n_random_controls,
                                 unsigned long long seed) {
    CheckReport rep;
    rep.name = "max_principle";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> nonneg(0.0, 1.0);

    double worst_min = 0.0;
    double worst_sup_margin = std::numeric_limits<double>::infinity();
    std::ostringstream witness;
    bool failed = false;

    ProblemSpec trial_spec = spec;
    for (int trial = 0; trial < n_random_controls && !failed; ++trial) {
        ControlField v(spec.time, ops, spec.lower, spec.upper);
        v.randomize(rng, spec.lower, spec.upper);
        if (trial == 0) {
            // deterministic unit spike: the sharpest nonnegative datum
            std::fill(trial_spec.y0.begin(), trial_spec.y0.end(), 0.0);
            trial_spec.y0[trial_spec.y0.size() / 2] = 1.0;
        } else {
            for (double& val : trial_spec.y0) val = nonneg(rng);
        }
        const double y0_sup = kern::active().max_abs(trial_spec.y0.data(), trial_spec.y0.size());
        const Trajectory y = state_for(trial_spec, ops, scheme, v);

        const double bound = std::exp((v.max_abs() + 1.0) * spec.time.T) * y0_sup;
        for (int n = 0; n <= spec.time.n_steps && !failed; ++n) {
            const auto lv = y.level(n);
            const double mn = kern::active().min_val(lv.data(), lv.size());
            const double mx = kern::active().max_abs(lv.data(), lv.size());
            worst_min = std::min(worst_min, mn);
            worst_sup_margin = std::min(worst_sup_margin, bound - mx);
            if (mn < -1e-12 || mx > bound * (1.0 + 1e-12) + 1e-12) {
                failed = true;
                for (int i = 0; i < y.n_nodes(); ++i) {
                    if (y.at(n, i) < -1e-12 || std::abs(y.at(n, i)) > bound * (1.0 + 1e-12) + 1e-12) {
                        witness << "trial " << trial << ", step " << n << ", node " << i
                                << ", value " << y.at(n, i) << ", bound " << bound;
                        break;
                    }
                }
            }
        }
    }

    rep.margins["worst_min"] = worst_min;
    rep.margins["worst_sup_margin"] = worst_sup_margin;
    rep.margins["trials"] = static_cast<double>(n_random_controls);
    rep.passed = !failed;
    rep.witness = witness.str();
    return rep;
}

GradientCurve gradient_check(const ProblemSpec& spec, const AssembledOperators& ops,
                             const SchemeOptions& scheme, const ControlField& u,
                             const ControlField& w, const std::vector<double>& eps_grid) {
    const double wmax = w.max_abs();
    for (double eps : eps_grid) {
        if (!(eps > 0.0)) throw invalid_argument("gradient_check: eps must be positive");
        ControlField lo = u, hi = u;
        for (std::size_t i = 0; i < u.raw().size(); ++i) {
            hi.raw()[i] = u.raw()[i] + eps * w.raw()[i];
            lo.raw()[i] = u.raw()[i] - eps * w.raw()[i];
        }
        if (!hi.inside_box(1e-12) || !lo.inside_box(1e-12))
            throw invalid_argument("gradient_check: perturbation u +- eps*w leaves the box");
    }

    GradientCurve curve;
    curve.eps = eps_grid;
    const Trajectory y = state_for(spec, ops, scheme, u);
    const Trajectory q = adjoint_for(spec, ops, scheme, u, y);
    const GradientField g = reduced_gradient(spec, ops, scheme, u, y, q);
    const double gw = inner_omega(ops, g.total, w);
    const double j0 = cost(spec, ops, scheme, u, y);

    const ControlField ga = algebraic_gradient(spec, ops, scheme, u, y);
    {
        ControlField diff = g.total;
        for (std::size_t i = 0; i < diff.raw().size(); ++i)
            diff.raw()[i] = g.total.raw()[i] - ga.raw()[i];
        const double na = norm_l2_omega(ops, ga);
        curve.dual_route_rel = norm_l2_omega(ops, diff) / std::max(na, 1e-300);
    }

    curve.rel_error.resize(eps_grid.size());
    bool all_zero = wmax == 0.0;
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        const double eps = eps_grid[e];
        ControlField hi = u, lo = u;
        for (std::size_t i = 0; i < u.raw().size(); ++i) {
            hi.raw()[i] = u.raw()[i] + eps * w.raw()[i];
            lo.raw()[i] = u.raw()[i] - eps * w.raw()[i];
        }
        const double jp = cost(spec, ops, scheme, hi, state_for(spec, ops, scheme, hi));
        const double jm = cost(spec, ops, scheme, lo, state_for(spec, ops, scheme, lo));
        const double fd = (jp - jm) / (2.0 * eps);
        const double abs_err = std::abs(fd - gw);
        curve.rel_error[e] = abs_err / std::max(std::abs(gw), 1e-300);
        if (abs_err > 1e-14 * std::max(1.0, std::abs(j0))) all_zero = false;
    }
    curve.all_zero = all_zero;

    if (all_zero) {
        curve.slope = 2.0;
        curve.min_rel_error = 0.0;
        curve.passed = curve.dual_route_rel < 1e-10;
        return curve;
    }

    const auto it = std::min_element(curve.rel_error.begin(), curve.rel_error.end());
    curve.min_rel_error = *it;
    const std::size_t plateau = static_cast<std::size_t>(it - curve.rel_error.begin());

    // fit the descending segment before the round-off plateau
    std::vector<double> lx, ly;
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        if (eps_grid[e] > eps_grid[plateau] && curve.rel_error[e] > 0.0) {
            lx.push_back(std::log(eps_grid[e]));
            ly.push_back(std::log(curve.rel_error[e]));
        }
    }
    curve.slope = lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
    curve.passed = curve.min_rel_error < 1e-6 && curve.slope >= 1.8 && curve.slope <= 2.2 &&
                   curve.dual_route_rel < 1e-10;
    return curve;
}

CheckReport hessian_check(const ProblemSpec& spec, const AssembledOperators& ops,
                          const SchemeOptions& scheme, const ControlField& u, int n_directions,
                          const std::vector<double>& eps_grid, unsigned long long seed) {
    CheckReport rep;
    rep.name = "hessian";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);

    const Trajectory y = state_for(spec, ops, scheme, u);
    const Trajectory q = adjoint_for(spec, ops, scheme, u, y);
    const double j0 = cost(spec, ops, scheme, u, y);

    auto random_dir = [&]() {
        ControlField v(spec.time, ops, spec.lower, spec.upper);
        for (int n = 1; n < v.n_levels(); ++n)
            for (int k = 0; k < v.n_omega(); ++k) v.at(n, k) = sym(rng);
        v.mirror_level0();
        return v;
    };

    // exact symmetry
    double max_asym = 0.0;
    for (int s = 0; s < n_directions; ++s) {
        const ControlField w = random_dir();
        const ControlField h = random_dir();
        const double wh = hessian_form(spec, ops, scheme, u, y, q, w, h);
        const double hw = hessian_form(spec, ops, scheme, u, y, q, h, w);
        max_asym = std::max(max_asym, std::abs(wh - hw));
    }

    // second-difference agreement at the best eps in the grid
    const ControlField w = random_dir();
    const double quad = hessian_form(spec, ops, scheme, u, y, q, w, w);
    double best_rel = std::numeric_limits<double>::infinity();
    for (double eps : eps_grid) {
        ControlField hi = u, lo = u;
        for (std::size_t i = 0; i < u.raw().size(); ++i) {
            hi.raw()[i] = u.raw()[i] + eps * w.raw()[i];
            lo.raw()[i] = u.raw()[i] - eps * w.raw()[i];
        }
        const double jp = cost(spec, ops, scheme, hi, state_for(spec, ops, scheme, hi));
        const double jm = cost(spec, ops, scheme, lo, state_for(spec, ops, scheme, lo));
        const double fd = (jp - 2.0 * j0 + jm) / (eps * eps);
        best_rel = std::min(best_rel, std::abs(fd - quad) / std::max(std::abs(quad), 1e-300));
    }

    // with q = 0 the form reduces to the terminal term plus the alpha term
    double q0_gap = 0.0;
    {
        ProblemSpec spec0 = spec;
        const auto last = y.level(spec.time.n_steps);
        spec0.yd.assign(last.begin(), last.end());
        const Trajectory y0traj = state_for(spec0, ops, scheme, u);
        const Trajectory q0 = adjoint_for(spec0, ops, scheme, u, y0traj);
        const double form0 = hessian_form(spec0, ops, scheme, u, y0traj, q0, w, w);
        const double alpha_term = spec.alpha * inner_omega(ops, w, w);
        q0_gap = form0 - alpha_term;  // = terminal term, must be >= 0
    }

    // oscillating-direction surrogate: deficit below alpha |v|^2 fades as the
    // temporal sign pattern speeds up
    double deficit_first = 0.0, deficit_last = 0.0;
    {
        const int n_steps = spec.time.n_steps;
        std::vector<double> deficits;
        for (int f = 0; (1 << f) <= n_steps; ++f) {
            ControlField v(spec.time, ops, spec.lower, spec.upper);
            for (int n = 1; n <= n_steps; ++n) {
                const int block = (n - 1) * (1 << f) / n_steps;
                const double sgn = (block % 2 == 0) ? 1.0 : -1.0;
                for (int k = 0; k < v.n_omega(); ++k) v.at(n, k) = sgn;
            }
            v.mirror_level0();
            const double nsq = inner_omega(ops, v, v);
            const double form = hessian_form(spec, ops, scheme, u, y, q, v, v);
            deficits.push_back(std::max(0.0, (spec.alpha * nsq - form) / nsq));
        }
        deficit_first = deficits.front();
        deficit_last = deficits.back();
    }

    rep.margins["max_asymmetry"] = max_asym;
    rep.margins["fd_rel_error"] = best_rel;
    rep.margins["q0_terminal_term"] = q0_gap;
    rep.margins["deficit_first"] = deficit_first;
    rep.margins["deficit_last"] = deficit_last;
    rep.passed = max_asym == 0.0 && best_rel < 1e-4 && q0_gap >= 0.0 &&
                 deficit_last <= std::max(0.5 * deficit_first, 1e-9 * spec.alpha);
    if (!rep.passed) rep.witness = "hessian check margins out of range";
    return rep;
}

CheckReport lipschitz_probe(const ProblemSpec& spec, const AssembledOperators& ops,
                            const SchemeOptions& scheme, int n_pairs, unsigned long long seed) {
    CheckReport rep;
    rep.name = "lipschitz";
    std::mt19937_64 rng(seed);

    const double beta = spec.beta();
    const double T = spec.time.T;
    const double y0_sup = kern::active().max_abs(spec.y0.data(), spec.y0.size());
    const double yd_sup = kern::active().max_abs(spec.yd.data(), spec.yd.size());
    const double majorant_state = 2.0 * std::exp(2.0 * (beta + 1.0) * T) * y0_sup;
    const double majorant_adjoint =
        2.0 * std::exp((beta + 1.0) * T) *
        (2.0 * std::exp(2.0 * (beta + 1.0) * T) * y0_sup +
         std::exp((beta + 1.0) * T) * (y0_sup + yd_sup));

    double max_state_ratio = 0.0;
    double max_adjoint_ratio = 0.0;
    int used = 0;
    for (int p = 0; p < n_pairs; ++p) {
        ControlField v1(spec.time, ops, spec.lower, spec.upper);
        ControlField v2(spec.time, ops, spec.lower, spec.upper);
        v1.randomize(rng, spec.lower, spec.upper);
        v2.randomize(rng, spec.lower, spec.upper);
        ControlField d = v1;
        for (std::size_t i = 0; i < d.raw().size(); ++i) d.raw()[i] = v1.raw()[i] - v2.raw()[i];
        const double dn = norm_l2_omega(ops, d);
        if (dn == 0.0) continue;  // identical pair: skipped sample
        ++used;

        const Trajectory y1 = state_for(spec, ops, scheme, v1);
        const Trajectory y2 = state_for(spec, ops, scheme, v2);
        Trajectory dy = y1;
        for (std::size_t i = 0; i < dy.raw().size(); ++i)
            dy.raw()[i] = y1.raw()[i] - y2.raw()[i];
        const double num = norm_ct_l2(ops, dy) + norm_l2_h1a(ops, dy);
        max_state_ratio = std::max(max_state_ratio, num / dn);

        const Trajectory q1 = adjoint_for(spec, ops, scheme, v1, y1);
        const Trajectory q2 = adjoint_for(spec, ops, scheme, v2, y2);
        Trajectory dq = q1;
        for (std::size_t i = 0; i < dq.raw().size(); ++i)
            dq.raw()[i] = q1.raw()[i] - q2.raw()[i];
        const double numq = norm_ct_l2(ops, dq) + norm_l2_h1a(ops, dq);
        max_adjoint_ratio = std::max(max_adjoint_ratio, numq / dn);
    }

    rep.margins["max_state_ratio"] = max_state_ratio;
    rep.margins["state_majorant"] = majorant_state;
    rep.margins["max_adjoint_ratio"] = max_adjoint_ratio;
    rep.margins["adjoint_majorant"] = majorant_adjoint;
    rep.margins["pairs_used"] = static_cast<double>(used);
    rep.passed = max_state_ratio <= majorant_state && std::isfinite(max_adjoint_ratio);
    if (!rep.passed) rep.witness = "state ratio exceeded the explicit majorant";
    return rep;
}

ConvergenceTable convergence_study(const StudySpec& study) {
    if (study.levels < 3) throw invalid_argument("convergence_study needs >= 3 levels");
    ConvergenceTable table;

    std::vector<Trajectory> solutions;
    std::vector<AssembledOperators> all_ops;
    for (int level = 0; level < study.levels; ++level) {
        const int cells = study.base_cells << level;
        const int steps = study.base_steps << level;
        table.cells.push_back(cells);
        table.steps.push_back(steps);

        const Mesh1D mesh = build_mesh(cells, study.grading);
        AssembledOperators ops = assemble(mesh, study.a, study.omega, study.quad_order);
        ProblemSpec spec;
        spec.a = study.a;
        spec.omega = study.omega;
        spec.time = TimeGrid(study.T, steps);
        spec.lower = study.box_lower;
        spec.upper = study.box_upper;
        spec.alpha = 1.0;
        spec.y0.resize(mesh.n_nodes());
        spec.yd.assign(mesh.n_nodes(), 0.0);
        for (int i = 0; i < mesh.n_nodes(); ++i) spec.y0[i] = study.y0(mesh.nodes[i]);

        ControlField v(spec.time, ops, spec.lower, spec.upper);
        v.sample(study.control, mesh);
        solutions.push_back(solve_state(spec, ops, v, study.scheme));
        all_ops.push_back(std::move(ops));
    }

    const int n_err = study.exact ? study.levels : study.levels - 1;
    for (int level = 0; level < n_err; ++level) {
        const auto& y = solutions[level];
        const auto& ops = all_ops[level];
        double err = 0.0;
        if (study.exact) {
            std::vector<double> diff(ops.n_nodes());
            for (int n = 0; n < y.n_levels(); ++n) {
                const double t = y.grid().t(n);
                for (int i = 0; i < ops.n_nodes(); ++i)
                    diff[i] = y.at(n, i) - study.exact(t, ops.mesh.nodes[i]);
                err = std::max(err, norm_l2(ops, diff));
            }
        } else {
            const auto& fine = solutions.back();
            const int node_stride = 1 << (study.levels - 1 - level);
            const int time_stride = node_stride;
            std::vector<double> diff(ops.n_nodes());
            for (int n = 0; n < y.n_levels(); ++n) {
                for (int i = 0; i < ops.n_nodes(); ++i)
                    diff[i] = y.at(n, i) - fine.at(n * time_stride, i * node_stride);
                err = std::max(err, norm_l2(ops, diff));
            }
        }
        table.errors.push_back(err);
    }

    table.monotone = true;
    for (std::size_t i = 0; i + 1 < table.errors.size(); ++i) {
        if (!(table.errors[i + 1] < table.errors[i])) table.monotone = false;
        if (table.errors[i + 1] > 0.0)
            table.orders.push_back(std::log2(table.errors[i] / table.errors[i + 1]));
    }
    const bool all_zero =
        std::all_of(table.errors.begin(), table.errors.end(), [](double e) { return e == 0.0; });
    bool orders_ok = !table.orders.empty() || all_zero;
    for (double o : table.orders) orders_ok = orders_ok && o >= 0.9;
    table.passed = all_zero || (table.monotone && orders_ok);
    return table;
}

std::vector<CheckReport> run_suites(const ProblemSpec& spec, const AssembledOperators& ops,
                                    const SchemeOptions& scheme, const std::string& selector,
                                    const SuiteOptions& options) {
    std::vector<CheckReport> reports;
    const bool all = selector == "all";
    std::mt19937_64 rng(options.seed);

    if (all || selector == "max_principle") {
        reports.push_back(
            check_max_principles(spec, ops, scheme, options.max_principle_trials, options.seed));
    }
    if (all || selector == "gradient") {
        ControlField u(spec.time, ops, spec.lower, spec.upper);
        ControlField w(spec.time, ops, spec.lower, spec.upper);
        const double span = 0.4 * (spec.upper - spec.lower);
        const double mid = 0.5 * (spec.upper + spec.lower);
        u.randomize(rng, mid - 0.5 * span, mid + 0.5 * span);
        w.randomize(rng, -1.0, 1.0);
        const std::vector<double> eps = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 1e-5, 1e-6};
        // scale eps so perturbations stay in the box
        std::vector<double> eps_ok;
        for (double e : eps)
            if (e <= 0.45 * span) eps_ok.push_back(e);
        GradientCurve curve = gradient_check(spec, ops, scheme, u, w, eps_ok);
        CheckReport rep;
        rep.name = "gradient";
        rep.passed = curve.passed;
        rep.margins["min_rel_error"] = curve.min_rel_error;
        rep.margins["slope"] = curve.slope;
        rep.margins["dual_route_rel"] = curve.dual_route_rel;
        if (!rep.passed) rep.witness = "gradient curve out of tolerance";
        reports.push_back(rep);

        // w = 0 edge case is part of the suite
        ControlField w0(spec.time, ops, spec.lower, spec.upper);
        GradientCurve zero_curve = gradient_check(spec, ops, scheme, u, w0, eps_ok);
        CheckReport rep0;
        rep0.name = "gradient_zero_direction";
        rep0.passed = zero_curve.passed && zero_curve.all_zero;
        rep0.margins["dual_route_rel"] = zero_curve.dual_route_rel;
        reports.push_back(rep0);
    }
    if (all || selector == "hessian") {
        ControlField u(spec.time, ops, spec.lower, spec.upper);
        const double span = 0.4 * (spec.upper - spec.lower);
        const double mid = 0.5 * (spec.upper + spec.lower);
        u.randomize(rng, mid - 0.5 * span, mid + 0.5 * span);
        const std::vector<double> eps = {1e-2, 3e-3, 1e-3, 3e-4};
        reports.push_back(hessian_check(spec, ops, scheme, u, options.hessian_directions, eps,
                                        options.seed + 1));
    }
    if (all || selector == "lipschitz") {
        reports.push_back(
            lipschitz_probe(spec, ops, scheme, options.lipschitz_pairs, options.seed + 2));
    }
    if (all || selector == "convergence") {
        StudySpec study;
        study.a = spec.a;
        study.omega = spec.omega;
        study.grading = options.grading;
        study.quad_order = options.quad_order;
        study.T = spec.time.T;
        study.scheme = scheme;
        study.base_cells = 8;
        study.base_steps = 8;
        study.levels = 4;
        study.y0 = [](double x) { return std::cos(1.5707963267948966 * x); };
        ConvergenceTable table = convergence_study(study);
        CheckReport rep;
        rep.name = "convergence";
        rep.passed = table.passed;
        for (std::size_t i = 0; i < table.errors.size(); ++i)
            rep.margins["error_l" + std::to_string(i)] = table.errors[i];
        for (std::size_t i = 0; i < table.orders.size(); ++i)
            rep.margins["order_l" + std::to_string(i)] = table.orders[i];
        if (!rep.passed) rep.witness = "non-monotone or low-order refinement";
        reports.push_back(rep);
    }
    if (reports.empty()) throw invalid_argument("unknown verification suite: " + selector);
    return reports;
}

}  // namespace degopt
