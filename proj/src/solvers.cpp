#include "degopt/solvers.hpp"

#include <cmath>
#include <vector>

#include "degopt/errors.hpp"
#include "degopt/kernels.hpp"

namespace degopt {

void SchemeOptions::validate() const {
    if (!(theta >= 0.5 && theta <= 1.0))
        throw invalid_argument("SchemeOptions: theta must lie in [1/2, 1]");
    if (!(shift_r >= 0.0)) throw invalid_argument("SchemeOptions: shift_r must be >= 0");
    if (!(linear_solver_tol > 0.0))
        throw invalid_argument("SchemeOptions: linear_solver_tol must be > 0");
}

namespace {

void check_shapes(const AssembledOperators& ops, const ProblemSpec& spec, const ControlField& v) {
    if (v.n_omega() != ops.n_omega())
        throw invalid_argument("control field does not match the assembled region");
    if (v.grid().n_steps != spec.time.n_steps)
        throw invalid_argument("control field time grid does not match the problem");
}

void check_guard(const TimeGrid& grid, const ControlField& v) {
    const double g = grid.dt() * v.max_abs();
    if (!(g < 1.0))
        throw invalid_argument("solvability guard violated: dt*|v|_inf = " + std::to_string(g) +
                               " must be < 1 (dt = " + std::to_string(grid.dt()) +
                               ", |v|_inf = " + std::to_string(v.max_abs()) + ")");
}

// theta scheme with the bilinear term inside the step matrix. All matrices
// are symmetric tridiagonal; only diagonals change between steps.
class ThetaScheme {
public:
    ThetaScheme(const AssembledOperators& ops, const TimeGrid& grid, const SchemeOptions& opts)
        : ops_(ops), grid_(grid), opts_(opts), n_(ops.n_nodes()) {
        opts.validate();
        const double dt = grid.dt();
        const double th = opts.theta;
        const double r = opts.shift_r;

        msch_ = SymTriDiag(n_);
        if (opts.mass == MassKind::consistent) {
            msch_ = ops.mass;
        } else {
            msch_.diag = ops.mass_lumped;
        }

        // A = (1 + theta*dt*r) M + theta*dt*K - theta*dt*B(v)
        baseA_ = SymTriDiag(n_);
        for (int i = 0; i < n_; ++i)
            baseA_.diag[i] = (1.0 + th * dt * r) * msch_.diag[i] + th * dt * ops.stiffness.diag[i];
        for (int i = 0; i + 1 < n_; ++i)
            baseA_.off[i] = (1.0 + th * dt * r) * msch_.off[i] + th * dt * ops.stiffness.off[i];

        // C = (1 - (1-theta)*dt*r) M - (1-theta)*dt*K + (1-theta)*dt*B(v)
        explicit_side_ = th < 1.0;
        if (explicit_side_) {
            baseC_ = SymTriDiag(n_);
            const double c1 = 1.0 - (1.0 - th) * dt * r;
            for (int i = 0; i < n_; ++i)
                baseC_.diag[i] = c1 * msch_.diag[i] - (1.0 - th) * dt * ops.stiffness.diag[i];
            for (int i = 0; i + 1 < n_; ++i)
                baseC_.off[i] = c1 * msch_.off[i] - (1.0 - th) * dt * ops.stiffness.off[i];
        }
        work_A_ = baseA_;
        if (explicit_side_) work_C_ = baseC_;
        rhs_.resize(n_);
        tmp_.resize(n_);
    }

    const SymTriDiag& scheme_mass() const { return msch_; }
    int n() const { return n_; }

    // Loads the control level into the step matrices. v_level indexes the
    // compressed omega-node layout of the control field.
    void set_control(std::span<const double> v_level) {
        const double dt = grid_.dt();
        const double th = opts_.theta;
        work_A_.diag = baseA_.diag;
        if (explicit_side_) work_C_.diag = baseC_.diag;
        for (int k = 0; k < ops_.n_omega(); ++k) {
            const int i = ops_.omega_nodes[k];
            const double b = ops_.region_lumped[i] * v_level[k];
            work_A_.diag[i] -= th * dt * b;
            if (explicit_side_) work_C_.diag[i] += (1.0 - th) * dt * b;
        }
    }

    // out = C x (identity mass step when theta = 1)
    void apply_explicit(std::span<const double> x, std::span<double> out) {
        if (explicit_side_) {
            work_C_.matvec(x, out);
        } else {
            msch_.matvec(x, out);
        }
    }

    // Solves A x = rhs with the current control level; throws step_failure.
    void solve_implicit(std::span<const double> rhs, std::span<double> x, int step) {
        solver_.factor(work_A_, opts_.linear_solver_tol);
        if (solver_.singular()) throw step_failure("singular step matrix", step);
        solver_.solve(rhs, x);
    }

    const SymTriDiag& step_matrix() const { return work_A_; }

    std::span<double> rhs() { return rhs_; }
    std::span<double> tmp() { return tmp_; }

private:
    const AssembledOperators& ops_;
    TimeGrid grid_;
    SchemeOptions opts_;
    int n_;
    bool explicit_side_ = false;
    SymTriDiag msch_, baseA_, baseC_, work_A_, work_C_;
    TriDiagSolver solver_;
    std::vector<double> rhs_, tmp_;
};

// Shared forward driver. source(m, out) adds the step-m load vector
// (without the mass factor for nodal sources; see callers) into out.
template <class SourceFn>
Trajectory march_forward(const ProblemSpec& spec, const AssembledOperators& ops,
                         const ControlField& v, std::span<const double> init,
                         const SchemeOptions& opts, FieldRole role, SourceFn&& source) {
    check_shapes(ops, spec, v);
    check_guard(spec.time, v);
    ThetaScheme scheme(ops, spec.time, opts);
    const int n = scheme.n();
    const double r = opts.shift_r;

    Trajectory y(spec.time, n, role);
    std::copy(init.begin(), init.end(), y.level(0).begin());

    for (int m = 1; m <= spec.time.n_steps; ++m) {
        scheme.set_control(v.level(m));
        scheme.apply_explicit(y.level(m - 1), scheme.rhs());
        source(m, scheme.rhs());
        scheme.solve_implicit(scheme.rhs(), y.level(m), m);
    }

    if (r > 0.0) {
        // the march computed the shifted variable z = e^{-rt} y
        for (int m = 1; m <= spec.time.n_steps; ++m) {
            const double factor = std::exp(r * spec.time.t(m));
            for (double& val : y.level(m)) val *= factor;
        }
    }
    return y;
}

}  // namespace

Trajectory solve_state(const ProblemSpec& spec, const AssembledOperators& ops,
                       const ControlField& v, const SchemeOptions& opts) {
    spec.validate(ops.n_nodes());
    return march_forward(spec, ops, v, spec.y0, opts, FieldRole::state,
                         [](int, std::span<double>) {});
}

Trajectory solve_state_inhomogeneous(const ProblemSpec& spec, const AssembledOperators& ops,
                                     const ControlField& v, const Trajectory& f,
                                     std::span<const double> p0, const SchemeOptions& opts) {
    spec.validate(ops.n_nodes());
    if (f.n_nodes() != ops.n_nodes() || f.n_levels() != spec.time.n_steps + 1)
        throw invalid_argument("source field shape does not match the problem");
    if (p0.size() != static_cast<std::size_t>(ops.n_nodes()))
        throw invalid_argument("initial datum length does not match the mesh");

    const double th = opts.theta;
    const double dt = spec.time.dt();
    const double r = opts.shift_r;
    std::vector<double> fmix(ops.n_nodes()), mf(ops.n_nodes());
    SymTriDiag mass_for_source(ops.n_nodes());
    if (opts.mass == MassKind::consistent) {
        mass_for_source = ops.mass;
    } else {
        mass_for_source.diag = ops.mass_lumped;
    }

    auto source = [&](int m, std::span<double> rhs) {
        kern::active().axpby(th, f.level(m).data(), 1.0 - th, f.level(m - 1).data(), fmix.data(),
                             fmix.size());
        const double shift_factor =
            r > 0.0 ? std::exp(-r * (spec.time.t(m - 1) + th * dt)) : 1.0;
        mass_for_source.matvec(fmix, mf);
        for (std::size_t i = 0; i < mf.size(); ++i) rhs[i] += dt * shift_factor * mf[i];
    };
    return march_forward(spec, ops, v, p0, opts, FieldRole::state, source);
}

Trajectory solve_adjoint(const ProblemSpec& spec, const AssembledOperators& ops,
                         const ControlField& u, std::span<const double> yT,
                         const SchemeOptions& opts) {
    spec.validate(ops.n_nodes());
    check_shapes(ops, spec, u);
    check_guard(spec.time, u);
    if (opts.shift_r != 0.0)
        throw invalid_argument("solve_adjoint requires shift_r = 0");
    if (yT.size() != static_cast<std::size_t>(ops.n_nodes()))
        throw invalid_argument("terminal datum length does not match the mesh");

    ThetaScheme scheme(ops, spec.time, opts);
    const int n = scheme.n();
    Trajectory q(spec.time, n, FieldRole::adjoint);
    std::copy(yT.begin(), yT.end(), q.level(spec.time.n_steps).begin());

    // q^{m-1} = M^{-1} C_m A_m^{-1} M q^m; for theta = 1, C = M and the inner
    // solve is the whole step.
    TriDiagSolver mass_solver;
    const bool general = opts.theta < 1.0;
    if (general) {
        mass_solver.factor(scheme.scheme_mass(), opts.linear_solver_tol);
        if (mass_solver.singular()) throw step_failure("singular mass matrix", 0);
    }
    std::vector<double> cx(n);
    for (int m = spec.time.n_steps; m >= 1; --m) {
        scheme.set_control(u.level(m));
        scheme.scheme_mass().matvec(q.level(m), scheme.rhs());
        scheme.solve_implicit(scheme.rhs(), scheme.tmp(), m);
        if (general) {
            scheme.apply_explicit(scheme.tmp(), cx);
            mass_solver.solve(cx, q.level(m - 1));
        } else {
            std::copy(scheme.tmp().begin(), scheme.tmp().end(), q.level(m - 1).begin());
        }
    }
    return q;
}

Trajectory solve_linearized(const ProblemSpec& spec, const AssembledOperators& ops,
                            const ControlField& u, const ControlField& w, const Trajectory& y,
                            const SchemeOptions& opts) {
    spec.validate(ops.n_nodes());
    check_shapes(ops, spec, w);
    if (opts.shift_r != 0.0)
        throw invalid_argument("solve_linearized requires shift_r = 0");
    if (y.n_nodes() != ops.n_nodes() || y.n_levels() != spec.time.n_steps + 1)
        throw invalid_argument("state trajectory shape does not match the problem");

    const double th = opts.theta;
    const double dt = spec.time.dt();
    std::vector<double> zeros(ops.n_nodes(), 0.0);
    auto source = [&](int m, std::span<double> rhs) {
        for (int k = 0; k < ops.n_omega(); ++k) {
            const int i = ops.omega_nodes[k];
            const double ytheta = th * y.at(m, i) + (1.0 - th) * y.at(m - 1, i);
            rhs[i] += dt * ops.region_lumped[i] * w.at(m, k) * ytheta;
        }
    };
    Trajectory rho = march_forward(spec, ops, u, zeros, opts, FieldRole::linearized, source);
    return rho;
}

Trajectory solve_second_linearized(const ProblemSpec& spec, const AssembledOperators& ops,
                                   const ControlField& u, const ControlField& w,
                                   const ControlField& h, const Trajectory& rho_w,
                                   const Trajectory& rho_h, const SchemeOptions& opts) {
    spec.validate(ops.n_nodes());
    check_shapes(ops, spec, w);
    check_shapes(ops, spec, h);
    if (opts.shift_r != 0.0)
        throw invalid_argument("solve_second_linearized requires shift_r = 0");
    if (rho_w.n_nodes() != ops.n_nodes() || rho_h.n_nodes() != ops.n_nodes())
        throw invalid_argument("linearized trajectories do not match the mesh");

    const double th = opts.theta;
    const double dt = spec.time.dt();
    std::vector<double> zeros(ops.n_nodes(), 0.0);
    auto source = [&](int m, std::span<double> rhs) {
        for (int k = 0; k < ops.n_omega(); ++k) {
            const int i = ops.omega_nodes[k];
            const double rw = th * rho_w.at(m, i) + (1.0 - th) * rho_w.at(m - 1, i);
            const double rh = th * rho_h.at(m, i) + (1.0 - th) * rho_h.at(m - 1, i);
            rhs[i] += dt * ops.region_lumped[i] * (h.at(m, k) * rw + w.at(m, k) * rh);
        }
    };
    return march_forward(spec, ops, u, zeros, opts, FieldRole::second_linearized, source);
}

}  // namespace degopt
