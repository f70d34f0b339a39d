// Independent reference implementations used only by tests: adaptive Simpson
// quadrature, a dense pivoted solver, and small helpers. Deliberately written
// with different algorithms than the library so agreement is meaningful.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hmhf/assembly.hpp"

namespace oracle {

namespace detail {

template <typename F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive(F&& f, double a, double b, double fa, double fm, double fb,
                double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0)
        throw std::runtime_error("adaptive_simpson: max depth reached");
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integration of f over [a,b] to absolute tolerance tol.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = detail::simpson(f, a, b, fa, fm, fb);
    return detail::adaptive(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Integrates cell by cell on a uniform mesh, so kinks at cell boundaries of
/// piecewise polynomials never limit the adaptive refinement.
template <typename F>
double integrate_cells(F&& f, int n_cells, double tol = 1e-13) {
    double sum = 0.0;
    for (int c = 0; c < n_cells; ++c) {
        double a = static_cast<double>(c) / n_cells;
        double b = static_cast<double>(c + 1) / n_cells;
        sum += integrate(f, a, b, tol);
    }
    return sum;
}

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(a[i][col]) > std::abs(a[piv][col]))
                piv = i;
        if (a[piv][col] == 0.0)
            throw std::runtime_error("dense_solve: singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int i = col + 1; i < n; ++i) {
            double factor = a[i][col] / a[col][col];
            if (factor == 0.0)
                continue;
            for (int j = col; j < n; ++j)
                a[i][j] -= factor * a[col][j];
            b[i] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j)
            s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

inline std::vector<std::vector<double>> dense_from_banded(const hmhf::BandedSpdMatrix& m) {
    const int n = m.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a[i][j] = m.at(i, j);
    return a;
}

/// Symmetric central difference of a scalar function of one variable.
template <typename F>
double central_diff(F&& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
