#include "degopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "degopt/errors.hpp"
#include "degopt/norms.hpp"
#include "degopt/solvers.hpp"

namespace degopt {

void OptimizerOptions::validate() const {
    if (max_iters < 0) throw invalid_argument("OptimizerOptions: max_iters must be >= 0");
    if (!(stationarity_tol > 0.0))
        throw invalid_argument("OptimizerOptions: stationarity_tol must be > 0");
    if (!(armijo_c > 0.0 && armijo_c < 1.0))
        throw invalid_argument("OptimizerOptions: armijo_c must lie in (0,1)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
        throw invalid_argument("OptimizerOptions: backtrack_factor must lie in (0,1)");
    if (!(initial_step > 0.0) || !(min_step > 0.0) || min_step > initial_step)
        throw invalid_argument("OptimizerOptions: need 0 < min_step <= initial_step");
}

namespace {

struct Evaluation {
    Trajectory y;
    Trajectory q;
    GradientField g;
    double cost = 0.0;
    double residual = 0.0;
};

Evaluation evaluate(const ProblemSpec& spec, const AssembledOperators& ops,
                    const SchemeOptions& scheme, const ControlField& u) {
    Evaluation ev;
    ev.y = solve_state(spec, ops, u, scheme);
    std::vector<double> yT(ops.n_nodes());
    const auto last = ev.y.level(spec.time.n_steps);
    for (int i = 0; i < ops.n_nodes(); ++i) yT[i] = last[i] - spec.yd[i];
    ev.q = solve_adjoint(spec, ops, u, yT, scheme);
    ev.g = reduced_gradient(spec, ops, scheme, u, ev.y, ev.q);
    ev.cost = cost(spec, ops, scheme, u, ev.y);
    ev.residual = stationarity_residual(spec, ops, scheme, u, ev.y, ev.q);
    return ev;
}

ControlField diff_field(const ControlField& a, const ControlField& b) {
    ControlField d = a;
    for (std::size_t i = 0; i < d.raw().size(); ++i) d.raw()[i] = a.raw()[i] - b.raw()[i];
    return d;
}

OptimizationResult optimize_single(const ProblemSpec& spec, const AssembledOperators& ops,
                                   const SchemeOptions& scheme, const ControlField& u0,
                                   const OptimizerOptions& options) {
    OptimizationResult res;
    ControlField u = project_box(u0, spec.lower, spec.upper);
    Evaluation ev = evaluate(spec, ops, scheme, u);

    ControlField prev_u = u;
    ControlField prev_g = ev.g.total;
    bool have_prev = false;
    double step = options.initial_step;

    res.history.push_back({0, ev.cost, ev.residual, 0.0});

    int k = 0;
    for (; k < options.max_iters; ++k) {
        if (ev.residual <= options.stationarity_tol) break;

        // Barzilai-Borwein step from the last accepted pair, clamped.
        if (have_prev) {
            const ControlField du = diff_field(u, prev_u);
            const ControlField dg = diff_field(ev.g.total, prev_g);
            const double sy = inner_omega(ops, du, dg);
            const double ss = inner_omega(ops, du, du);
            step = (sy > 0.0) ? std::clamp(ss / sy, options.min_step, options.initial_step)
                              : options.initial_step;
        }

        bool accepted = false;
        double s = step;
        while (s >= options.min_step) {
            ControlField trial = u;
            for (std::size_t i = 0; i < trial.raw().size(); ++i)
                trial.raw()[i] = u.raw()[i] - s * ev.g.total.raw()[i];
            trial = project_box(trial, spec.lower, spec.upper);
            const ControlField d = diff_field(trial, u);
            const double dist_sq = inner_omega(ops, d, d);
            if (dist_sq == 0.0) break;  // projection returned the same point

            Trajectory y_trial = solve_state(spec, ops, trial, scheme);
            const double cost_trial = cost(spec, ops, scheme, trial, y_trial);
            if (cost_trial <= ev.cost - options.armijo_c / s * dist_sq) {
                prev_u = u;
                prev_g = ev.g.total;
                have_prev = true;
                u = trial;
                ev = evaluate(spec, ops, scheme, u);
                res.history.push_back({k + 1, ev.cost, ev.residual, s});
                accepted = true;
                break;
            }
            s *= options.backtrack_factor;
        }
        if (!accepted) {
            res.stalled = true;
            ++k;
            break;
        }
    }

    res.u = u;
    res.iterations = k;
    res.final_cost = ev.cost;
    res.final_residual = ev.residual;
    res.converged = ev.residual <= options.stationarity_tol;
    res.active = active_set(spec, ops, scheme, u, ev.y, ev.q, 0.0);
    res.ssc = ssc_threshold(spec);
    return res;
}

}  // namespace

OptimizationResult optimize(const ProblemSpec& spec, const AssembledOperators& ops,
                            const SchemeOptions& scheme, const ControlField& u0,
                            const OptimizerOptions& options) {
    options.validate();
    scheme.validate();
    if (scheme.shift_r != 0.0) throw invalid_argument("optimize requires shift_r = 0");
    if (!u0.inside_box(0.0)) throw invalid_argument("optimize: u0 must lie inside the box");
    const auto t0 = std::chrono::steady_clock::now();

    OptimizationResult res;
    if (options.alpha_continuation.empty()) {
        res = optimize_single(spec, ops, scheme, u0, options);
    } else {
        // warm-start continuation: decreasing alphas ending at the target
        std::vector<double> schedule = options.alpha_continuation;
        if (schedule.empty() || schedule.back() != spec.alpha) schedule.push_back(spec.alpha);
        ControlField warm = u0;
        std::vector<IterationRecord> history;
        for (double a : schedule) {
            if (!(a > 0.0)) throw invalid_argument("optimize: continuation alphas must be > 0");
            ProblemSpec stage = spec;
            stage.alpha = a;
            res = optimize_single(stage, ops, scheme, warm, options);
            warm = res.u;
            for (auto rec : res.history) {
                rec.iter = static_cast<int>(history.size());
                history.push_back(rec);
            }
        }
        res.history = history;
        // final-stage reports already reflect the target alpha
    }

    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

CertificationRecord certify(const ProblemSpec& spec, const AssembledOperators& ops,
                            const SchemeOptions& scheme, const OptimizationResult& result,
                            const CertifyOptions& options) {
    if (!result.converged) throw invalid_argument("certify requires a converged result");

    CertificationRecord rec;
    const ControlField& u = result.u;
    Trajectory y = solve_state(spec, ops, u, scheme);
    std::vector<double> yT(ops.n_nodes());
    const auto last = y.level(spec.time.n_steps);
    for (int i = 0; i < ops.n_nodes(); ++i) yT[i] = last[i] - spec.yd[i];
    Trajectory q = solve_adjoint(spec, ops, u, yT, scheme);

    rec.stationarity_residual = stationarity_residual(spec, ops, scheme, u, y, q);
    rec.ssc = ssc_threshold(spec);
    rec.eps_probe = options.eps_probe;

    // Pointwise audit: every omega_T node satisfies exactly one branch of the
    // optimality trichotomy, i.e. u = clamp(-y q / alpha) within tolerance.
    {
        const GradientField g = reduced_gradient(spec, ops, scheme, u, y, q);
        double worst = 0.0;
        long points = 0;
        for (int n = 1; n < u.n_levels(); ++n) {
            for (int k = 0; k < u.n_omega(); ++k) {
                const double yq = g.yq_part.at(n, k);
                const double target =
                    std::clamp(-yq / spec.alpha, spec.lower, spec.upper);
                worst = std::max(worst, std::abs(u.at(n, k) - target));
                ++points;
            }
        }
        rec.trichotomy_worst = worst;
        rec.trichotomy_points = points;
        rec.trichotomy_passed = worst <= options.trichotomy_tol;
    }

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);

    // Hessian coercivity on sampled tau-critical directions.
    {
        const ActiveSetReport active = active_set(spec, ops, scheme, u, y, q, options.tau_probe);
        double min_rayleigh = std::numeric_limits<double>::infinity();
        int taken = 0;
        for (int s = 0; s < options.hessian_samples; ++s) {
            ControlField v(spec.time, ops, spec.lower, spec.upper);
            for (int n = 1; n < v.n_levels(); ++n) {
                for (int k = 0; k < v.n_omega(); ++k) {
                    double val = sym(rng);
                    if (active.at(n, k) != 0) {
                        val = 0.0;
                    } else if (u.at(n, k) == spec.lower) {
                        val = std::abs(val);
                    } else if (u.at(n, k) == spec.upper) {
                        val = -std::abs(val);
                    }
                    v.at(n, k) = val;
                }
            }
            v.mirror_level0();
            const double nsq = inner_omega(ops, v, v);
            if (nsq == 0.0) continue;
            const double form = hessian_form(spec, ops, scheme, u, y, q, v, v);
            min_rayleigh = std::min(min_rayleigh, form / nsq);
            ++taken;
        }
        rec.cone_samples = taken;
        rec.min_rayleigh = taken > 0 ? min_rayleigh : 0.0;
        rec.coercivity_passed =
            !rec.ssc.satisfied || taken == 0 ||
            rec.min_rayleigh >= rec.ssc.delta - options.coercivity_slack;
    }

    // Quadratic growth probe in a feasible neighborhood.
    {
        const double ju = result.final_cost;
        double gamma = std::numeric_limits<double>::infinity();
        int negatives = 0;
        int taken = 0;
        for (int s = 0; s < options.growth_samples; ++s) {
            ControlField dir(spec.time, ops, spec.lower, spec.upper);
            for (int n = 1; n < dir.n_levels(); ++n)
                for (int k = 0; k < dir.n_omega(); ++k) dir.at(n, k) = sym(rng);
            dir.mirror_level0();
            const double dn = norm_l2_omega(ops, dir);
            if (dn == 0.0) continue;
            ControlField v = u;
            for (std::size_t i = 0; i < v.raw().size(); ++i)
                v.raw()[i] = u.raw()[i] + options.eps_probe / dn * dir.raw()[i];
            v = project_box(v, spec.lower, spec.upper);
            const ControlField d = diff_field(v, u);
            const double dist_sq = inner_omega(ops, d, d);
            if (dist_sq == 0.0) continue;
            Trajectory yv = solve_state(spec, ops, v, scheme);
            const double jv = cost(spec, ops, scheme, v, yv);
            if (jv < ju) ++negatives;
            gamma = std::min(gamma, 2.0 * (jv - ju) / dist_sq);
            ++taken;
        }
        rec.growth_samples = taken;
        rec.growth_negative = negatives;
        rec.gamma_hat = taken > 0 ? gamma : 0.0;
    }

    return rec;
}

}  // namespace degopt
