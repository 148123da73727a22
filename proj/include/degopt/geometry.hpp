#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "degopt/la.hpp"

namespace degopt {

// Diffusion coefficient a(x) on [-1,1]; vanishes at both endpoints, positive
// inside (strong degeneracy: 1/a is not integrable).
class DiffusionCoefficient {
public:
    enum class Kind { budyko, power, tabulated };

    // a(x) = 1 - x^2 (principal part of the Budyko-Sellers operator).
    static DiffusionCoefficient budyko();
    // a(x) = (1 - x^2)^p, p >= 1.
    static DiffusionCoefficient power(double p);
    // Piecewise-linear through (x_i, a_i); x strictly increasing spanning
    // [-1,1], a(+-1) = 0. Smoothness is the caller's responsibility.
    static DiffusionCoefficient tabulated(std::vector<double> x, std::vector<double> a);

    double operator()(double x) const { return eval_(x); }
    Kind kind() const { return kind_; }
    double exponent() const { return p_; }

private:
    DiffusionCoefficient(Kind kind, double p, std::function<double(double)> eval)
        : kind_(kind), p_(p), eval_(std::move(eval)) {}

    Kind kind_;
    double p_ = 1.0;
    std::function<double(double)> eval_;
};

enum class Grading { uniform, boundary_refined };

// Nodes of a 1D mesh on [-1,1].
struct Mesh1D {
    std::vector<double> nodes;  // strictly increasing, nodes.front()=-1, back()=1

    int n_cells() const { return static_cast<int>(nodes.size()) - 1; }
    int n_nodes() const { return static_cast<int>(nodes.size()); }
    double h(int cell) const { return nodes[cell + 1] - nodes[cell]; }
    double min_h() const;
};

// boundary_refined concentrates nodes near x = +-1 (where the diffusion
// coefficient degenerates) via the map x = sin(pi*xi/2) of a uniform grid.
Mesh1D build_mesh(int n_cells, Grading grading);

// Finite union of closed subintervals of [-1,1] where the control acts.
class ControlRegion {
public:
    // Normalizes: clamps to [-1,1], sorts, merges overlaps. Throws
    // invalid_argument when empty after normalization.
    explicit ControlRegion(std::vector<std::pair<double, double>> intervals);

    static ControlRegion whole_domain() { return ControlRegion({{-1.0, 1.0}}); }

    bool contains(double x) const;  // indicator of the closed union
    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }

private:
    std::vector<std::pair<double, double>> intervals_;
};

// Weighted finite-element operators for P1 elements on the mesh. Immutable
// after assembly; safe to share across concurrent solves.
struct AssembledOperators {
    Mesh1D mesh;
    SymTriDiag mass;          // M, consistent
    std::vector<double> mass_lumped;  // row sums of M
    SymTriDiag stiffness;     // K_a, entries from per-cell Gauss quadrature of a*phi'*phi'
    SymTriDiag region_mass;   // M_omega, consistent mass over the snapped region
    std::vector<double> region_lumped;  // mu_i = integral of phi_i over the region
    std::vector<int> omega_nodes;       // node indices covered by the snapped region
    std::vector<std::vector<double>> cell_quad_weights;  // per cell, Gauss weights * jacobian
    std::vector<std::string> snap_warnings;  // region endpoints moved more than one cell width

    int n_nodes() const { return mesh.n_nodes(); }
    int n_omega() const { return static_cast<int>(omega_nodes.size()); }
    bool node_in_omega(int i) const;
};

// Assembles M, M_L, K_a, M_omega and the region quadrature data. The region
// is snapped to the nearest mesh nodes; quad_order is the number of Gauss
// points per cell (>= 2; 3 is exact for the Budyko coefficient).
// Throws assembly_failure if a(x) < 0 at any quadrature point.
AssembledOperators assemble(const Mesh1D& mesh, const DiffusionCoefficient& a,
                            const ControlRegion& omega, int quad_order = 3);

}  // namespace degopt
