#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "degopt/geometry.hpp"

namespace degopt {

struct TimeGrid {
    double T = 1.0;
    int n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double horizon, int steps);

    double dt() const { return T / n_steps; }
    double t(int n) const { return T * static_cast<double>(n) / n_steps; }
};

enum class FieldRole { state, adjoint, linearized, second_linearized };

// Space-time grid function on Q = (0,T) x (-1,1): levels 0..n_steps, one
// value per mesh node. Value-like; row-major storage.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(const TimeGrid& grid, int n_nodes, FieldRole role);

    int n_levels() const { return grid_.n_steps + 1; }
    int n_nodes() const { return n_nodes_; }
    const TimeGrid& grid() const { return grid_; }
    FieldRole role() const { return role_; }

    std::span<double> level(int n) { return {data_.data() + static_cast<std::size_t>(n) * n_nodes_, static_cast<std::size_t>(n_nodes_)}; }
    std::span<const double> level(int n) const { return {data_.data() + static_cast<std::size_t>(n) * n_nodes_, static_cast<std::size_t>(n_nodes_)}; }
    double& at(int n, int i) { return data_[static_cast<std::size_t>(n) * n_nodes_ + i]; }
    double at(int n, int i) const { return data_[static_cast<std::size_t>(n) * n_nodes_ + i]; }

    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

    bool all_finite() const;

private:
    TimeGrid grid_;
    int n_nodes_ = 0;
    FieldRole role_ = FieldRole::state;
    std::vector<double> data_;
};

// Control grid function on omega_T. Stores levels 0..n_steps over the nodes
// of the snapped region; the control is piecewise constant per time step and
// level n (n >= 1) is its value on the step (t_{n-1}, t_n]. Level 0 is the
// t = 0 sample (mirrors level 1 by convention); it enters neither the
// dynamics nor the control-space quadrature.
class ControlField {
public:
    ControlField() = default;
    ControlField(const TimeGrid& grid, const AssembledOperators& ops, double lower, double upper);

    int n_levels() const { return grid_.n_steps + 1; }
    int n_omega() const { return n_omega_; }
    const TimeGrid& grid() const { return grid_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    const std::vector<int>& omega_nodes() const { return omega_nodes_; }

    std::span<double> level(int n) { return {data_.data() + static_cast<std::size_t>(n) * n_omega_, static_cast<std::size_t>(n_omega_)}; }
    std::span<const double> level(int n) const { return {data_.data() + static_cast<std::size_t>(n) * n_omega_, static_cast<std::size_t>(n_omega_)}; }
    double& at(int n, int k) { return data_[static_cast<std::size_t>(n) * n_omega_ + k]; }
    double at(int n, int k) const { return data_[static_cast<std::size_t>(n) * n_omega_ + k]; }

    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

    void fill(double value);
    // Samples v(t_n, x_k) at every level; level 0 at t = 0.
    template <class F>
    void sample(F&& v, const Mesh1D& mesh) {
        for (int n = 0; n < n_levels(); ++n)
            for (int k = 0; k < n_omega_; ++k) at(n, k) = v(grid_.t(n), mesh.nodes[omega_nodes_[k]]);
    }
    // Uniform values in [lo,hi] on levels 1..n_steps; level 0 mirrors level 1.
    void randomize(std::mt19937_64& rng, double lo, double hi);
    void mirror_level0();

    double max_abs() const;
    bool all_finite() const;
    bool inside_box(double tol = 0.0) const;

private:
    TimeGrid grid_;
    int n_omega_ = 0;
    double lower_ = -1.0;
    double upper_ = 1.0;
    std::vector<int> omega_nodes_;
    std::vector<double> data_;
};

// Specification of y0 / yd profiles and the full continuous problem.
struct ProblemSpec {
    DiffusionCoefficient a = DiffusionCoefficient::budyko();
    ControlRegion omega = ControlRegion::whole_domain();
    TimeGrid time;
    double lower = -1.0;  // m
    double upper = 1.0;   // M
    double alpha = 1.0;
    std::vector<double> y0;  // nodal
    std::vector<double> yd;  // nodal

    // beta = max(|m|, |M|)
    double beta() const;
    void validate(int n_nodes) const;
};

}  // namespace degopt
