#include "degopt/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "degopt/errors.hpp"
#include "degopt/kernels.hpp"
#include "degopt/la.hpp"
#include "degopt/norms.hpp"

namespace degopt {

namespace {

SymTriDiag scheme_mass(const AssembledOperators& ops, const SchemeOptions& opts) {
    if (opts.mass == MassKind::consistent) return ops.mass;
    SymTriDiag m(ops.n_nodes());
    m.diag = ops.mass_lumped;
    return m;
}

SymTriDiag step_matrix(const AssembledOperators& ops, const SymTriDiag& msch,
                       const SchemeOptions& opts, double dt, std::span<const double> v_level) {
    SymTriDiag a(ops.n_nodes());
    const double th = opts.theta;
    for (int i = 0; i < ops.n_nodes(); ++i)
        a.diag[i] = msch.diag[i] + th * dt * ops.stiffness.diag[i];
    for (int i = 0; i + 1 < ops.n_nodes(); ++i)
        a.off[i] = msch.off[i] + th * dt * ops.stiffness.off[i];
    for (int k = 0; k < ops.n_omega(); ++k) {
        const int i = ops.omega_nodes[k];
        a.diag[i] -= th * dt * ops.region_lumped[i] * v_level[k];
    }
    return a;
}

void check_pair(const AssembledOperators& ops, const ProblemSpec& spec, const ControlField& u,
                const Trajectory& y, const Trajectory& q) {
    if (u.n_omega() != ops.n_omega() || u.grid().n_steps != spec.time.n_steps)
        throw invalid_argument("control shape does not match the problem");
    if (y.n_nodes() != ops.n_nodes() || y.n_levels() != spec.time.n_steps + 1 ||
        q.n_nodes() != ops.n_nodes() || q.n_levels() != spec.time.n_steps + 1)
        throw invalid_argument("trajectory shape does not match the problem");
}

// Half-updated adjoint at step m for theta < 1: qhat^m = A_m^{-1} M q^m.
// For theta = 1 this equals q^{m-1} bit for bit, so callers branch.
std::vector<double> half_adjoint(const ProblemSpec& spec, const AssembledOperators& ops,
                                 const SymTriDiag& msch, const SchemeOptions& opts,
                                 const ControlField& u, const Trajectory& q, int m) {
    const int n = ops.n_nodes();
    std::vector<double> rhs(n), out(n);
    msch.matvec(q.level(m), rhs);
    SymTriDiag a = step_matrix(ops, msch, opts, spec.time.dt(), u.level(m));
    TriDiagSolver solver;
    solver.factor(a, opts.linear_solver_tol);
    if (solver.singular()) throw step_failure("singular step matrix", m);
    solver.solve(rhs, out);
    return out;
}

// state at the step's quadrature point: theta-weighted endpoint combination
void theta_state(const Trajectory& y, double th, int m, std::vector<double>& out) {
    const auto ym = y.level(m);
    const auto ym1 = y.level(m - 1);
    out.resize(ym.size());
    if (th == 1.0) {
        std::copy(ym.begin(), ym.end(), out.begin());
    } else {
        kern::active().axpby(th, ym.data(), 1.0 - th, ym1.data(), out.data(), out.size());
    }
}

}  // namespace

double cost(const ProblemSpec& spec, const AssembledOperators& ops, const SchemeOptions& opts,
            const ControlField& v, const Trajectory& y) {
    spec.validate(ops.n_nodes());
    if (y.n_nodes() != ops.n_nodes()) throw invalid_argument("cost: trajectory/mesh mismatch");
    if (v.n_omega() != ops.n_omega()) throw invalid_argument("cost: control/region mismatch");
    const SymTriDiag msch = scheme_mass(ops, opts);
    std::vector<double> diff(ops.n_nodes());
    const auto yT = y.level(spec.time.n_steps);
    for (int i = 0; i < ops.n_nodes(); ++i) diff[i] = yT[i] - spec.yd[i];
    const double misfit = 0.5 * msch.quad(diff, diff);
    const double penalty = 0.5 * spec.alpha * inner_omega(ops, v, v);
    return misfit + penalty;
}

GradientField reduced_gradient(const ProblemSpec& spec, const AssembledOperators& ops,
                               const SchemeOptions& opts, const ControlField& u,
                               const Trajectory& y, const Trajectory& q) {
    check_pair(ops, spec, u, y, q);
    const SymTriDiag msch = scheme_mass(ops, opts);
    const double th = opts.theta;

    GradientField g{ControlField(spec.time, ops, spec.lower, spec.upper),
                    ControlField(spec.time, ops, spec.lower, spec.upper),
                    ControlField(spec.time, ops, spec.lower, spec.upper)};
    std::vector<double> ytheta;
    for (int m = 1; m <= spec.time.n_steps; ++m) {
        theta_state(y, th, m, ytheta);
        std::vector<double> qhat_store;
        std::span<const double> qhat;
        if (th == 1.0) {
            qhat = q.level(m - 1);
        } else {
            qhat_store = half_adjoint(spec, ops, msch, opts, u, q, m);
            qhat = qhat_store;
        }
        for (int k = 0; k < ops.n_omega(); ++k) {
            const int i = ops.omega_nodes[k];
            const double ap = spec.alpha * u.at(m, k);
            const double yq = ytheta[i] * qhat[i];
            g.alpha_part.at(m, k) = ap;
            g.yq_part.at(m, k) = yq;
            g.total.at(m, k) = ap + yq;
        }
    }
    g.alpha_part.mirror_level0();
    g.yq_part.mirror_level0();
    g.total.mirror_level0();
    return g;
}

ControlField algebraic_gradient(const ProblemSpec& spec, const AssembledOperators& ops,
                                const SchemeOptions& opts, const ControlField& u,
                                const Trajectory& y) {
    if (u.n_omega() != ops.n_omega() || y.n_nodes() != ops.n_nodes())
        throw invalid_argument("algebraic_gradient: shape mismatch");
    const SymTriDiag msch = scheme_mass(ops, opts);
    const double th = opts.theta;
    const double dt = spec.time.dt();
    const int n = ops.n_nodes();

    // dual chain d^N = M (y^N - yd); d^{m-1} = C_m A_m^{-1} d^m, with the
    // gradient component on step m read off the intermediate A_m^{-1} d^m
    std::vector<double> d(n), t(n), diff(n), ytheta;
    const auto yT = y.level(spec.time.n_steps);
    for (int i = 0; i < n; ++i) diff[i] = yT[i] - spec.yd[i];
    msch.matvec(diff, d);

    ControlField g(spec.time, ops, spec.lower, spec.upper);
    for (int m = spec.time.n_steps; m >= 1; --m) {
        SymTriDiag a = step_matrix(ops, msch, opts, dt, u.level(m));
        if (!solve_tridiag_reversed(a, d, t, opts.linear_solver_tol))
            throw step_failure("singular step matrix", m);
        theta_state(y, th, m, ytheta);
        for (int k = 0; k < ops.n_omega(); ++k) {
            const int i = ops.omega_nodes[k];
            g.at(m, k) = spec.alpha * u.at(m, k) + ytheta[i] * t[i];
        }
        if (m > 1) {
            if (th == 1.0) {
                msch.matvec(t, d);
            } else {
                // C_m = 2 M - A_m for the unshifted scheme: C = M - (1-th)dt(K-B),
                // A = M + th dt (K-B); with th + (1-th) = 1, C = M*(...)
                SymTriDiag c(n);
                for (int i = 0; i < n; ++i)
                    c.diag[i] = msch.diag[i] - (1.0 - th) / th * (a.diag[i] - msch.diag[i]);
                for (int i = 0; i + 1 < n; ++i)
                    c.off[i] = msch.off[i] - (1.0 - th) / th * (a.off[i] - msch.off[i]);
                c.matvec(t, d);
            }
        }
    }
    g.mirror_level0();
    return g;
}

double hessian_form_with(const ProblemSpec& spec, const AssembledOperators& ops,
                         const SchemeOptions& opts, const Trajectory& q, const ControlField& w,
                         const ControlField& h, const Trajectory& rho_w, const Trajectory& rho_h) {
    if (opts.theta != 1.0)
        throw invalid_argument(
            "hessian_form_with requires theta = 1; use hessian_form for general theta");
    const SymTriDiag msch = scheme_mass(ops, opts);
    const double dt = spec.time.dt();

    double cross = 0.0;
    for (int m = 1; m <= spec.time.n_steps; ++m) {
        const auto rw = rho_w.level(m);
        const auto rh = rho_h.level(m);
        const auto qhat = q.level(m - 1);
        double level_sum = 0.0;
        for (int k = 0; k < ops.n_omega(); ++k) {
            const int i = ops.omega_nodes[k];
            level_sum +=
                ops.region_lumped[i] * qhat[i] * (h.at(m, k) * rw[i] + w.at(m, k) * rh[i]);
        }
        cross += dt * level_sum;
    }

    const auto rwT = rho_w.level(spec.time.n_steps);
    const auto rhT = rho_h.level(spec.time.n_steps);
    const double terminal = msch.quad(rwT, rhT);
    const double penalty = spec.alpha * inner_omega(ops, w, h);
    return cross + terminal + penalty;
}

double hessian_form(const ProblemSpec& spec, const AssembledOperators& ops,
                    const SchemeOptions& opts, const ControlField& u, const Trajectory& y,
                    const Trajectory& q, const ControlField& w, const ControlField& h) {
    Trajectory rho_w = solve_linearized(spec, ops, u, w, y, opts);
    const bool same = &w == &h || w.raw() == h.raw();
    Trajectory rho_h = same ? rho_w : solve_linearized(spec, ops, u, h, y, opts);
    if (opts.theta == 1.0)
        return hessian_form_with(spec, ops, opts, q, w, h, rho_w, rho_h);

    // general theta: rebuild the half-updated adjoint per step
    const SymTriDiag msch = scheme_mass(ops, opts);
    const double th = opts.theta;
    const double dt = spec.time.dt();
    double cross = 0.0;
    std::vector<double> rw, rh;
    for (int m = 1; m <= spec.time.n_steps; ++m) {
        theta_state(rho_w, th, m, rw);
        theta_state(rho_h, th, m, rh);
        const std::vector<double> qhat = half_adjoint(spec, ops, msch, opts, u, q, m);
        double level_sum = 0.0;
        for (int k = 0; k < ops.n_omega(); ++k) {
            const int i = ops.omega_nodes[k];
            level_sum +=
                ops.region_lumped[i] * qhat[i] * (h.at(m, k) * rw[i] + w.at(m, k) * rh[i]);
        }
        cross += dt * level_sum;
    }
    const double terminal =
        msch.quad(rho_w.level(spec.time.n_steps), rho_h.level(spec.time.n_steps));
    return cross + terminal + spec.alpha * inner_omega(ops, w, h);
}

ControlField project_box(const ControlField& raw, double lower, double upper) {
    if (!(lower < upper)) throw invalid_argument("project_box: requires m < M");
    if (!raw.all_finite()) throw invalid_argument("project_box: input must be finite");
    ControlField out = raw;
    kern::active().clamp(raw.raw().data(), lower, upper, out.raw().data(), out.raw().size());
    return out;
}

double stationarity_residual(const ProblemSpec& spec, const AssembledOperators& ops,
                             const SchemeOptions& opts, const ControlField& u,
                             const Trajectory& y, const Trajectory& q) {
    if (!(spec.alpha > 0.0)) throw invalid_argument("stationarity_residual: requires alpha > 0");
    check_pair(ops, spec, u, y, q);
    const SymTriDiag msch = scheme_mass(ops, opts);
    const double th = opts.theta;
    const double dt = spec.time.dt();

    std::vector<double> mu(ops.n_omega()), uc(ops.n_omega()), yc(ops.n_omega()), qc(ops.n_omega());
    for (int k = 0; k < ops.n_omega(); ++k) mu[k] = ops.region_lumped[ops.omega_nodes[k]];

    double acc = 0.0;
    std::vector<double> ytheta;
    for (int m = 1; m <= spec.time.n_steps; ++m) {
        theta_state(y, th, m, ytheta);
        std::span<const double> qhat;
        std::vector<double> qhat_store;
        if (th == 1.0) {
            qhat = q.level(m - 1);
        } else {
            qhat_store = half_adjoint(spec, ops, msch, opts, u, q, m);
            qhat = qhat_store;
        }
        for (int k = 0; k < ops.n_omega(); ++k) {
            const int i = ops.omega_nodes[k];
            uc[k] = u.at(m, k);
            yc[k] = ytheta[i];
            qc[k] = qhat[i];
        }
        acc += dt * kern::active().projection_gap_sq(mu.data(), uc.data(), yc.data(), qc.data(),
                                                     spec.alpha, spec.lower, spec.upper,
                                                     mu.size());
    }
    return std::sqrt(std::max(0.0, acc));
}

ActiveSetReport active_set(const ProblemSpec& spec, const AssembledOperators& ops,
                           const SchemeOptions& opts, const ControlField& u, const Trajectory& y,
                           const Trajectory& q, double tau) {
    if (!(tau >= 0.0)) throw invalid_argument("active_set: tau must be >= 0");
    const GradientField g = reduced_gradient(spec, ops, opts, u, y, q);

    ActiveSetReport rep;
    rep.tau = tau;
    rep.n_levels = u.n_levels();
    rep.n_omega = u.n_omega();
    rep.mask.assign(static_cast<std::size_t>(rep.n_levels) * rep.n_omega, 0);
    for (int n = 0; n < rep.n_levels; ++n) {
        for (int k = 0; k < rep.n_omega; ++k) {
            const double lambda = g.total.at(n, k);
            std::uint8_t tag = 0;
            if (lambda > tau) {
                tag = 1;
                ++rep.lower_active;
            } else if (lambda < -tau) {
                tag = 2;
                ++rep.upper_active;
            } else {
                ++rep.inactive;
            }
            rep.mask[static_cast<std::size_t>(n) * rep.n_omega + k] = tag;
        }
    }
    return rep;
}

bool critical_cone_test(const ControlField& v, const ControlField& u,
                        const ActiveSetReport& report, double zero_tol) {
    if (v.n_levels() != u.n_levels() || v.n_omega() != u.n_omega())
        throw invalid_argument("critical_cone_test: shape mismatch");
    if (report.n_levels != u.n_levels() || report.n_omega != u.n_omega())
        throw invalid_argument("critical_cone_test: report shape mismatch");
    for (int n = 1; n < v.n_levels(); ++n) {
        for (int k = 0; k < v.n_omega(); ++k) {
            const double vv = v.at(n, k);
            const double uu = u.at(n, k);
            if (report.at(n, k) != 0 && std::abs(vv) > zero_tol) return false;
            if (uu == u.lower() && vv < -zero_tol) return false;
            if (uu == u.upper() && vv > zero_tol) return false;
        }
    }
    return true;
}

SSCReport ssc_threshold(const ProblemSpec& spec) {
    SSCReport rep;
    rep.beta = spec.beta();
    rep.T = spec.time.T;
    rep.y0_linf = kern::active().max_abs(spec.y0.data(), spec.y0.size());
    rep.yd_linf = kern::active().max_abs(spec.yd.data(), spec.yd.size());
    rep.threshold = 4.0 * std::exp(3.0 * (rep.beta + 1.0) * rep.T) * (rep.y0_linf + rep.yd_linf);
    rep.alpha = spec.alpha;
    rep.delta = rep.alpha - rep.threshold;
    rep.satisfied = rep.delta > 0.0;
    return rep;
}

}  // namespace degopt
