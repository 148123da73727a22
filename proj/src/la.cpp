#include "degopt/la.hpp"

#include <cmath>

#include "degopt/errors.hpp"
#include "degopt/kernels.hpp"

namespace degopt {

void SymTriDiag::matvec(std::span<const double> x, std::span<double> out) const {
    kern::active().tri_matvec(diag.data(), off.data(), x.data(), out.data(), diag.size());
}

double SymTriDiag::quad(std::span<const double> x, std::span<const double> y) const {
    return kern::active().tri_quad(diag.data(), off.data(), x.data(), y.data(), diag.size());
}

void TriDiagSolver::factor(const SymTriDiag& a, double rel_tol) {
    const std::size_t n = a.size();
    n_ = n;
    singular_ = false;
    c_.assign(n, 0.0);
    dinv_.assign(n, 0.0);
    sub_ = a.off;

    double scale = kern::active().max_abs(a.diag.data(), n);
    scale = std::max(scale, kern::active().max_abs(a.off.data(), a.off.size()));
    const double tiny = rel_tol * std::max(scale, 1e-300);

    double piv = a.diag[0];
    if (!(std::abs(piv) > tiny)) {
        singular_ = true;
        return;
    }
    dinv_[0] = 1.0 / piv;
    for (std::size_t i = 1; i < n; ++i) {
        c_[i - 1] = a.off[i - 1];
        const double m = a.off[i - 1] * dinv_[i - 1];
        piv = a.diag[i] - m * c_[i - 1];
        if (!(std::abs(piv) > tiny)) {
            singular_ = true;
            return;
        }
        dinv_[i] = 1.0 / piv;
    }
}

void TriDiagSolver::solve(std::span<const double> b, std::span<double> x) const {
    const std::size_t n = n_;
    if (n == 0) return;
    // forward elimination
    x[0] = b[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = b[i] - sub_[i - 1] * dinv_[i - 1] * x[i - 1];
    // back substitution
    x[n - 1] *= dinv_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - c_[i] * x[i + 1]) * dinv_[i];
}

bool solve_tridiag_reversed(const SymTriDiag& a, std::span<const double> b, std::span<double> x,
                            double rel_tol) {
    const std::size_t n = a.size();
    if (n == 0) return true;
    double scale = kern::active().max_abs(a.diag.data(), n);
    scale = std::max(scale, kern::active().max_abs(a.off.data(), a.off.size()));
    const double tiny = rel_tol * std::max(scale, 1e-300);

    // Eliminate from the last row upward, then substitute downward.
    std::vector<double> piv(n), rhs(b.begin(), b.end());
    piv[n - 1] = a.diag[n - 1];
    if (!(std::abs(piv[n - 1]) > tiny)) return false;
    for (std::size_t i = n - 1; i-- > 0;) {
        const double m = a.off[i] / piv[i + 1];
        piv[i] = a.diag[i] - m * a.off[i];
        if (!(std::abs(piv[i]) > tiny)) return false;
        rhs[i] -= m * rhs[i + 1];
    }
    x[0] = rhs[0] / piv[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = (rhs[i] - a.off[i - 1] * x[i - 1]) / piv[i];
    return true;
}

}  // namespace degopt
