#pragma once

#include <span>

#include "degopt/fields.hpp"
#include "degopt/geometry.hpp"

namespace degopt {

// Discrete norms matching the weighted-space estimates the solvers are tested
// against. Spatial integrals use the consistent operators; the control-space
// product on omega_T uses the lumped region weights with the step rule in
// time (the quadrature under which the reduced gradient is exact).

// sqrt(v' M v)
double norm_l2(const AssembledOperators& ops, std::span<const double> v);

// sqrt(v' (M + K_a) v)  -- the H^1_a norm: L2 part plus sqrt(a)-weighted gradient.
double norm_h1a(const AssembledOperators& ops, std::span<const double> v);

// max over time levels of norm_l2 at that level.
double norm_ct_l2(const AssembledOperators& ops, const Trajectory& y);

// Space-time L2 over Q, trapezoidal in time: sqrt(sum_n w_n dt * y_n' M y_n).
double norm_l2_Q(const AssembledOperators& ops, const Trajectory& y);

// Space-time H^1_a over (0,T), trapezoidal in time: sqrt(sum_n w_n dt * y_n'(M+K)y_n).
double norm_l2_h1a(const AssembledOperators& ops, const Trajectory& y);

// Control-space L2 over omega_T: sqrt(sum_{n>=1} dt * sum_k mu_k v_nk^2).
double norm_l2_omega(const AssembledOperators& ops, const ControlField& v);

// Control-space inner product paired with norm_l2_omega.
double inner_omega(const AssembledOperators& ops, const ControlField& v, const ControlField& w);

// max |value| over all levels/nodes.
double norm_linf(const Trajectory& y);
double norm_linf(const ControlField& v);
double norm_linf(std::span<const double> v);

}  // namespace degopt
