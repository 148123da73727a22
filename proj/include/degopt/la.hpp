#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace degopt {

// Symmetric tridiagonal matrix: diag[0..n-1], off[0..n-2].
struct SymTriDiag {
    std::vector<double> diag;
    std::vector<double> off;

    SymTriDiag() = default;
    explicit SymTriDiag(std::size_t n) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}

    std::size_t size() const { return diag.size(); }

    void matvec(std::span<const double> x, std::span<double> out) const;
    // x' A y (floating-point commutative in x,y).
    double quad(std::span<const double> x, std::span<const double> y) const;
};

// In-place Thomas factorization/solve for a (not necessarily symmetric
// positive) tridiagonal system. The recurrence is sequential; no SIMD variant.
class TriDiagSolver {
public:
    // Factors diag/off of a symmetric tridiagonal matrix. Throws step-agnostic
    // std::runtime_error via pivot_failure() handling in callers when a pivot
    // falls below rel_tol * scale; callers translate to step_failure.
    void factor(const SymTriDiag& a, double rel_tol);
    bool factored() const { return n_ > 0; }
    // Solve A x = b using the stored factorization (top-down elimination).
    void solve(std::span<const double> b, std::span<double> x) const;
    // true if the last factor() hit a near-zero pivot.
    bool singular() const { return singular_; }

private:
    std::size_t n_ = 0;
    bool singular_ = false;
    std::vector<double> c_;   // modified superdiagonal
    std::vector<double> dinv_;  // reciprocal pivots
    std::vector<double> sub_;  // original subdiagonal (== superdiagonal, symmetric)
};

// One-shot solve with bottom-up elimination order. Numerically equivalent to
// TriDiagSolver but with an independent rounding path; used by the dual-route
// gradient check.
// Returns false when a pivot falls below rel_tol * scale.
bool solve_tridiag_reversed(const SymTriDiag& a, std::span<const double> b, std::span<double> x,
                            double rel_tol);

}  // namespace degopt
