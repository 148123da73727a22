#include "degopt/fields.hpp"

#include <algorithm>
#include <cmath>

#include "degopt/errors.hpp"
#include "degopt/kernels.hpp"

namespace degopt {

TimeGrid::TimeGrid(double horizon, int steps) : T(horizon), n_steps(steps) {
    if (!(T > 0.0)) throw invalid_argument("TimeGrid: T must be positive");
    if (n_steps < 1) throw invalid_argument("TimeGrid: n_steps must be >= 1");
}

Trajectory::Trajectory(const TimeGrid& grid, int n_nodes, FieldRole role)
    : grid_(grid), n_nodes_(n_nodes), role_(role),
      data_(static_cast<std::size_t>(grid.n_steps + 1) * n_nodes, 0.0) {}

bool Trajectory::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ControlField::ControlField(const TimeGrid& grid, const AssembledOperators& ops, double lower,
                           double upper)
    : grid_(grid), n_omega_(ops.n_omega()), lower_(lower), upper_(upper),
      omega_nodes_(ops.omega_nodes),
      data_(static_cast<std::size_t>(grid.n_steps + 1) * ops.n_omega(), 0.0) {
    if (!(lower < upper)) throw invalid_argument("ControlField: requires m < M");
}

void ControlField::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void ControlField::randomize(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (int n = 1; n < n_levels(); ++n)
        for (int k = 0; k < n_omega_; ++k) at(n, k) = dist(rng);
    mirror_level0();
}

void ControlField::mirror_level0() {
    if (n_levels() > 1)
        std::copy_n(data_.data() + n_omega_, n_omega_, data_.data());
}

double ControlField::max_abs() const {
    return kern::active().max_abs(data_.data(), data_.size());
}

bool ControlField::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool ControlField::inside_box(double tol) const {
    return std::all_of(data_.begin(), data_.end(),
                       [&](double v) { return v >= lower_ - tol && v <= upper_ + tol; });
}

double ProblemSpec::beta() const { return std::max(std::abs(lower), std::abs(upper)); }

void ProblemSpec::validate(int n_nodes) const {
    if (!(lower < upper)) throw invalid_argument("ProblemSpec: requires m < M");
    if (!(alpha > 0.0)) throw invalid_argument("ProblemSpec: requires alpha > 0");
    if (static_cast<int>(y0.size()) != n_nodes || static_cast<int>(yd.size()) != n_nodes)
        throw invalid_argument("ProblemSpec: y0/yd length must match the mesh");
    for (double v : y0)
        if (!std::isfinite(v)) throw invalid_argument("ProblemSpec: y0 must be bounded");
    for (double v : yd)
        if (!std::isfinite(v)) throw invalid_argument("ProblemSpec: yd must be bounded");
}

}  // namespace degopt
