#pragma once

#include <cstdint>
#include <vector>

#include "degopt/fields.hpp"
#include "degopt/geometry.hpp"
#include "degopt/solvers.hpp"

namespace degopt {

// Reduced gradient as a field on omega_T, with its two ingredients kept
// separately. Paired with inner_omega, <total, w> equals the derivative of
// the discrete cost exactly (up to linear-solver rounding).
struct GradientField {
    ControlField total;       // alpha*u + y.q
    ControlField alpha_part;  // alpha*u
    ControlField yq_part;     // y.q  (state at the step's right endpoint, adjoint at its left)
};

struct ActiveSetReport {
    double tau = 0.0;
    int n_levels = 0;
    int n_omega = 0;
    // 0 inactive, 1 lower-bound active (multiplier > tau), 2 upper-bound
    // active (multiplier < -tau); layout matches ControlField.
    std::vector<std::uint8_t> mask;
    long lower_active = 0;
    long upper_active = 0;
    long inactive = 0;

    std::uint8_t at(int n, int k) const { return mask[static_cast<std::size_t>(n) * n_omega + k]; }
};

struct SSCReport {
    double beta = 0.0;
    double T = 0.0;
    double y0_linf = 0.0;
    double yd_linf = 0.0;
    double threshold = 0.0;  // 4 e^{3(beta+1)T} (|y0|_inf + |yd|_inf)
    double alpha = 0.0;
    double delta = 0.0;  // alpha - threshold (coercivity margin)
    bool satisfied = false;
};

// J(v) = 1/2 |y(T) - yd|^2_M + alpha/2 |v|^2_{L2(omega_T)}, with the terminal
// misfit in the scheme's mass inner product and the control norm from
// norms.hpp. Pre: y = solve_state(spec, ops, v, opts).
double cost(const ProblemSpec& spec, const AssembledOperators& ops, const SchemeOptions& opts,
            const ControlField& v, const Trajectory& y);

// Pointwise multiplier field alpha*u + y.q on omega_T. Pre: y = solve_state(u),
// q = solve_adjoint(u, y(T) - yd). Exact gradient of the discrete cost.
GradientField reduced_gradient(const ProblemSpec& spec, const AssembledOperators& ops,
                               const SchemeOptions& opts, const ControlField& u,
                               const Trajectory& y, const Trajectory& q);

// Independent algebraic route: accumulates the transpose-scheme dual chain
// with a reversed elimination order and never forms the adjoint trajectory.
ControlField algebraic_gradient(const ProblemSpec& spec, const AssembledOperators& ops,
                                const SchemeOptions& opts, const ControlField& u,
                                const Trajectory& y);

// J''(u)[w,h] via two linearized solves:
//   sum_{omega_T} [h G'(u)w + w G'(u)h] q + (G'(u)w)(T) . (G'(u)h)(T) + alpha <w,h>.
// Symmetric in (w,h) exactly (bitwise).
double hessian_form(const ProblemSpec& spec, const AssembledOperators& ops,
                    const SchemeOptions& opts, const ControlField& u, const Trajectory& y,
                    const Trajectory& q, const ControlField& w, const ControlField& h);

// Same with precomputed linearized states (used by sampling loops).
double hessian_form_with(const ProblemSpec& spec, const AssembledOperators& ops,
                         const SchemeOptions& opts, const Trajectory& q, const ControlField& w,
                         const ControlField& h, const Trajectory& rho_w, const Trajectory& rho_h);

// Pointwise clamp of a raw field to [m, M].
ControlField project_box(const ControlField& raw, double lower, double upper);

// |u - clamp(-(q/alpha) y, m, M)|_{L2(omega_T)}; zero exactly at first-order
// stationary points.
double stationarity_residual(const ProblemSpec& spec, const AssembledOperators& ops,
                             const SchemeOptions& opts, const ControlField& u,
                             const Trajectory& y, const Trajectory& q);

// Strongly active set: |alpha u + y q| > tau, classified by the multiplier
// sign (positive -> lower bound, negative -> upper bound).
ActiveSetReport active_set(const ProblemSpec& spec, const AssembledOperators& ops,
                           const SchemeOptions& opts, const ControlField& u, const Trajectory& y,
                           const Trajectory& q, double tau);

// true iff v >= 0 where u = m, v <= 0 where u = M, and v = 0 on the strongly
// active set. Checked on the dynamic levels 1..n_steps.
bool critical_cone_test(const ControlField& v, const ControlField& u,
                        const ActiveSetReport& report, double zero_tol = 0.0);

// Coercivity threshold for the penalty weight and its margin.
SSCReport ssc_threshold(const ProblemSpec& spec);

}  // namespace degopt
