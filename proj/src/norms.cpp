#include "degopt/norms.hpp"

#include <algorithm>
#include <cmath>

#include "degopt/errors.hpp"
#include "degopt/kernels.hpp"

namespace degopt {

namespace {

void check_len(const AssembledOperators& ops, std::size_t n) {
    if (n != static_cast<std::size_t>(ops.n_nodes()))
        throw invalid_argument("norm: vector length does not match the mesh");
}

double trapezoid_weight(int n, int n_steps) {
    return (n == 0 || n == n_steps) ? 0.5 : 1.0;
}

}  // namespace

double norm_l2(const AssembledOperators& ops, std::span<const double> v) {
    check_len(ops, v.size());
    return std::sqrt(std::max(0.0, ops.mass.quad(v, v)));
}

double norm_h1a(const AssembledOperators& ops, std::span<const double> v) {
    check_len(ops, v.size());
    return std::sqrt(std::max(0.0, ops.mass.quad(v, v) + ops.stiffness.quad(v, v)));
}

double norm_ct_l2(const AssembledOperators& ops, const Trajectory& y) {
    if (y.n_nodes() == 0) throw invalid_argument("norm_ct_l2: empty trajectory");
    double m = 0.0;
    for (int n = 0; n < y.n_levels(); ++n) m = std::max(m, norm_l2(ops, y.level(n)));
    return m;
}

double norm_l2_Q(const AssembledOperators& ops, const Trajectory& y) {
    if (y.n_nodes() == 0) throw invalid_argument("norm_l2_Q: empty trajectory");
    check_len(ops, y.level(0).size());
    const double dt = y.grid().dt();
    double acc = 0.0;
    for (int n = 0; n < y.n_levels(); ++n) {
        const auto lv = y.level(n);
        acc += trapezoid_weight(n, y.grid().n_steps) * dt * ops.mass.quad(lv, lv);
    }
    return std::sqrt(std::max(0.0, acc));
}

double norm_l2_h1a(const AssembledOperators& ops, const Trajectory& y) {
    if (y.n_nodes() == 0) throw invalid_argument("norm_l2_h1a: empty trajectory");
    const double dt = y.grid().dt();
    double acc = 0.0;
    for (int n = 0; n < y.n_levels(); ++n) {
        const auto lv = y.level(n);
        acc += trapezoid_weight(n, y.grid().n_steps) * dt *
               (ops.mass.quad(lv, lv) + ops.stiffness.quad(lv, lv));
    }
    return std::sqrt(std::max(0.0, acc));
}

double norm_l2_omega(const AssembledOperators& ops, const ControlField& v) {
    return std::sqrt(std::max(0.0, inner_omega(ops, v, v)));
}

double inner_omega(const AssembledOperators& ops, const ControlField& v, const ControlField& w) {
    if (v.n_omega() != w.n_omega() || v.n_levels() != w.n_levels())
        throw invalid_argument("inner_omega: shape mismatch");
    if (v.n_omega() != ops.n_omega())
        throw invalid_argument("inner_omega: control does not match the assembled region");
    // compress the region weights to the omega-node ordering once
    std::vector<double> mu(ops.n_omega());
    for (int k = 0; k < ops.n_omega(); ++k) mu[k] = ops.region_lumped[ops.omega_nodes[k]];
    const double dt = v.grid().dt();
    double acc = 0.0;
    for (int n = 1; n < v.n_levels(); ++n)
        acc += dt * kern::active().dot3(mu.data(), v.level(n).data(), w.level(n).data(), mu.size());
    return acc;
}

double norm_linf(const Trajectory& y) {
    return kern::active().max_abs(y.raw().data(), y.raw().size());
}

double norm_linf(const ControlField& v) {
    return kern::active().max_abs(v.raw().data(), v.raw().size());
}

double norm_linf(std::span<const double> v) {
    return kern::active().max_abs(v.data(), v.size());
}

}  // namespace degopt
