#pragma once

#include <span>

#include "degopt/fields.hpp"
#include "degopt/geometry.hpp"

namespace degopt {

enum class MassKind { consistent, lumped };

struct SchemeOptions {
    double theta = 1.0;     // time scheme parameter in [1/2, 1]; 1 = implicit Euler
    MassKind mass = MassKind::consistent;
    double shift_r = 0.0;   // exponential-shift stabilization; 0 disables
    double linear_solver_tol = 1e-14;  // relative pivot threshold

    void validate() const;
};

// State equation  y_t - (a y_x)_x = v chi_omega y,  a y_x = 0 at x = +-1,
// y(0) = y0 from spec. Step n -> n+1 solves
//   (M + theta*dt*(K - B)) y^{n+1} = (M - (1-theta)*dt*(K - B)) y^n
// with B = diag(mu .* v) built from the control at level n+1 (the control is
// piecewise constant per step). Requires dt*|v|_inf < 1.
Trajectory solve_state(const ProblemSpec& spec, const AssembledOperators& ops,
                       const ControlField& v, const SchemeOptions& opts);

// Same scheme with source term M f^{n+theta} added and initial datum p0.
Trajectory solve_state_inhomogeneous(const ProblemSpec& spec, const AssembledOperators& ops,
                                     const ControlField& v, const Trajectory& f,
                                     std::span<const double> p0, const SchemeOptions& opts);

// Backward adjoint march: q[n_steps] = yT, then
//   A_m q^{m-1} = M q^m   (theta = 1)
// i.e. the M-inner-product adjoint of each forward step, using the control at
// level m. This makes the reduced gradient exact for the discrete cost: the
// gradient on step m pairs q^{m-1} with y^m. Requires shift_r = 0.
Trajectory solve_adjoint(const ProblemSpec& spec, const AssembledOperators& ops,
                         const ControlField& u, std::span<const double> yT,
                         const SchemeOptions& opts);

// Linearized state rho = G'(u)w: rho(0) = 0, source (u rho + w y) chi_omega
// with u implicit and the w y data built from the already-computed state.
Trajectory solve_linearized(const ProblemSpec& spec, const AssembledOperators& ops,
                            const ControlField& u, const ControlField& w, const Trajectory& y,
                            const SchemeOptions& opts);

// Second linearized state z = G''(u)[w,h]: z(0) = 0, source
// (u z + h G'(u)w + w G'(u)h) chi_omega.
Trajectory solve_second_linearized(const ProblemSpec& spec, const AssembledOperators& ops,
                                   const ControlField& u, const ControlField& w,
                                   const ControlField& h, const Trajectory& rho_w,
                                   const Trajectory& rho_h, const SchemeOptions& opts);

}  // namespace degopt
