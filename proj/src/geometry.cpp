#include "degopt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "degopt/errors.hpp"

namespace degopt {

DiffusionCoefficient DiffusionCoefficient::budyko() {
    return DiffusionCoefficient(Kind::budyko, 1.0, [](double x) { return 1.0 - x * x; });
}

DiffusionCoefficient DiffusionCoefficient::power(double p) {
    if (!(p >= 1.0))
        throw invalid_argument("power coefficient needs p >= 1 (strong degeneracy), got p=" +
                               std::to_string(p));
    return DiffusionCoefficient(Kind::power, p,
                                [p](double x) { return std::pow(1.0 - x * x, p); });
}

DiffusionCoefficient DiffusionCoefficient::tabulated(std::vector<double> x,
                                                     std::vector<double> a) {
    if (x.size() != a.size() || x.size() < 2)
        throw invalid_argument("tabulated coefficient needs matching x/a tables of length >= 2");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1]))
            throw invalid_argument("tabulated coefficient abscissae must be strictly increasing");
    if (std::abs(x.front() + 1.0) > 1e-14 || std::abs(x.back() - 1.0) > 1e-14)
        throw invalid_argument("tabulated coefficient must span [-1,1]");
    if (std::abs(a.front()) > 1e-14 || std::abs(a.back()) > 1e-14)
        throw invalid_argument("tabulated coefficient must vanish at x = -1 and x = 1");
    auto xs = std::make_shared<std::vector<double>>(std::move(x));
    auto as = std::make_shared<std::vector<double>>(std::move(a));
    auto eval = [xs, as](double t) {
        const auto& xv = *xs;
        const auto& av = *as;
        if (t <= xv.front()) return av.front();
        if (t >= xv.back()) return av.back();
        const auto it = std::upper_bound(xv.begin(), xv.end(), t);
        const std::size_t j = static_cast<std::size_t>(it - xv.begin());
        const double s = (t - xv[j - 1]) / (xv[j] - xv[j - 1]);
        return (1.0 - s) * av[j - 1] + s * av[j];
    };
    return DiffusionCoefficient(Kind::tabulated, 1.0, eval);
}

double Mesh1D::min_h() const {
    double m = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_cells(); ++c) m = std::min(m, h(c));
    return m;
}

Mesh1D build_mesh(int n_cells, Grading grading) {
    if (n_cells < 2) throw invalid_argument("build_mesh: n_cells must be >= 2");
    Mesh1D mesh;
    mesh.nodes.resize(static_cast<std::size_t>(n_cells) + 1);
    for (int i = 0; i <= n_cells; ++i) {
        const double xi = -1.0 + 2.0 * static_cast<double>(i) / n_cells;
        if (grading == Grading::uniform) {
            mesh.nodes[i] = xi;
        } else {
            mesh.nodes[i] = std::sin(std::numbers::pi * xi / 2.0);
        }
    }
    mesh.nodes.front() = -1.0;
    mesh.nodes.back() = 1.0;
    return mesh;
}

ControlRegion::ControlRegion(std::vector<std::pair<double, double>> intervals) {
    std::vector<std::pair<double, double>> clean;
    for (auto [lo, hi] : intervals) {
        lo = std::max(lo, -1.0);
        hi = std::min(hi, 1.0);
        if (hi > lo) clean.emplace_back(lo, hi);
    }
    std::sort(clean.begin(), clean.end());
    for (const auto& iv : clean) {
        if (intervals_.empty() || iv.first > intervals_.back().second) {
            intervals_.push_back(iv);
        } else {
            intervals_.back().second = std::max(intervals_.back().second, iv.second);
        }
    }
    if (intervals_.empty())
        throw invalid_argument("control region is empty after normalization");
}

bool ControlRegion::contains(double x) const {
    for (const auto& [lo, hi] : intervals_)
        if (x >= lo && x <= hi) return true;
    return false;
}

bool AssembledOperators::node_in_omega(int i) const {
    return std::binary_search(omega_nodes.begin(), omega_nodes.end(), i);
}

namespace {

// Gauss-Legendre points/weights on [-1,1].
void gauss_rule(int order, std::vector<double>& pts, std::vector<double>& wts) {
    switch (order) {
        case 2:
            pts = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
            wts = {1.0, 1.0};
            return;
        case 3:
            pts = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
            wts = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            return;
        case 4: {
            const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
            const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
            pts = {-b, -a, a, b};
            wts = {wb, wa, wa, wb};
            return;
        }
        case 5: {
            const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
            const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
            pts = {-b, -a, 0.0, a, b};
            wts = {wb, wa, 128.0 / 225.0, wa, wb};
            return;
        }
        default:
            throw invalid_argument("quad_order must be in [2,5], got " + std::to_string(order));
    }
}

int nearest_node(const Mesh1D& mesh, double x) {
    int best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const double d = std::abs(mesh.nodes[i] - x);
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

AssembledOperators assemble(const Mesh1D& mesh, const DiffusionCoefficient& a,
                            const ControlRegion& omega, int quad_order) {
    if (quad_order < 2) throw invalid_argument("assemble: quad_order must be >= 2");
    if (mesh.n_cells() < 2) throw invalid_argument("assemble: mesh must have >= 2 cells");
    for (int c = 0; c < mesh.n_cells(); ++c)
        if (!(mesh.h(c) > 0.0)) throw invalid_argument("assemble: nodes must strictly increase");

    std::vector<double> qp, qw;
    gauss_rule(quad_order, qp, qw);

    const int n = mesh.n_nodes();
    AssembledOperators ops;
    ops.mesh = mesh;
    ops.mass = SymTriDiag(n);
    ops.stiffness = SymTriDiag(n);
    ops.region_mass = SymTriDiag(n);
    ops.mass_lumped.assign(n, 0.0);
    ops.region_lumped.assign(n, 0.0);
    ops.cell_quad_weights.resize(mesh.n_cells());

    // Snap region endpoints to the nearest nodes; a cell belongs to the
    // region iff both its endpoints land inside one snapped interval.
    std::vector<std::pair<int, int>> snapped;
    for (const auto& [lo, hi] : omega.intervals()) {
        const int il = nearest_node(mesh, lo);
        const int ih = nearest_node(mesh, hi);
        const double dl = std::abs(mesh.nodes[il] - lo);
        const double dh = std::abs(mesh.nodes[ih] - hi);
        const double wl = mesh.h(std::min(std::max(il, 0), mesh.n_cells() - 1));
        const double wh = mesh.h(std::min(std::max(ih - 1, 0), mesh.n_cells() - 1));
        if (dl > wl || dh > wh) {
            std::ostringstream msg;
            msg << "region endpoint snapped by more than one cell width: [" << lo << "," << hi
                << "] -> [" << mesh.nodes[il] << "," << mesh.nodes[ih] << "]";
            ops.snap_warnings.push_back(msg.str());
        }
        if (ih > il) snapped.emplace_back(il, ih);
    }
    if (snapped.empty())
        throw invalid_argument("control region collapsed to the empty set after node snapping");
    std::sort(snapped.begin(), snapped.end());

    auto cell_in_region = [&](int c) {
        for (const auto& [il, ih] : snapped)
            if (c >= il && c + 1 <= ih) return true;
        return false;
    };

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double xl = mesh.nodes[c];
        const double xr = mesh.nodes[c + 1];
        const double h = xr - xl;

        // integral of a over the cell, by Gauss quadrature
        double a_int = 0.0;
        ops.cell_quad_weights[c].resize(qp.size());
        for (std::size_t g = 0; g < qp.size(); ++g) {
            const double x = 0.5 * (xl + xr) + 0.5 * h * qp[g];
            const double w = 0.5 * h * qw[g];
            ops.cell_quad_weights[c][g] = w;
            const double av = a(x);
            if (av < 0.0)
                throw assembly_failure("diffusion coefficient negative at quadrature point x=" +
                                       std::to_string(x));
            a_int += w * av;
        }

        // P1 local matrices; the stiffness cell matrix annihilates constants
        // by construction, so K_a * 1 = 0 holds exactly after assembly.
        const double k = a_int / (h * h);
        ops.stiffness.diag[c] += k;
        ops.stiffness.diag[c + 1] += k;
        ops.stiffness.off[c] -= k;

        ops.mass.diag[c] += h / 3.0;
        ops.mass.diag[c + 1] += h / 3.0;
        ops.mass.off[c] += h / 6.0;

        if (cell_in_region(c)) {
            ops.region_mass.diag[c] += h / 3.0;
            ops.region_mass.diag[c + 1] += h / 3.0;
            ops.region_mass.off[c] += h / 6.0;
            ops.region_lumped[c] += h / 2.0;
            ops.region_lumped[c + 1] += h / 2.0;
        }
    }

    for (int i = 0; i < n; ++i) {
        double row = ops.mass.diag[i];
        if (i > 0) row += ops.mass.off[i - 1];
        if (i + 1 < n) row += ops.mass.off[i];
        ops.mass_lumped[i] = row;
    }

    for (int i = 0; i < n; ++i)
        if (ops.region_lumped[i] > 0.0) ops.omega_nodes.push_back(i);

    return ops;
}

}  // namespace degopt
