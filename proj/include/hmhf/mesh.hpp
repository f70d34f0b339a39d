#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace hmhf {

/// Uniform partition of [0,1] into n_cells intervals, vertices r_i = i*h.
struct Mesh1D {
    int n_cells = 0;
    double h = 0.0;
    std::vector<double> vertices;  // size n_cells + 1, vertices[0] = 0, vertices[n_cells] = 1
};

/// n_cells >= 2; throws std::invalid_argument otherwise.
Mesh1D build_mesh(int n_cells);

/// Gauss-Legendre rule mapped to [0,1]. All points are strictly interior,
/// so integrands with 1/r or 1/r^2 factors are never evaluated at r = 0.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;  // sum to 1
    int order = 0;                // exact for polynomials up to this degree (2n-1)
};

/// 1 <= n_points <= 16; throws std::invalid_argument otherwise.
QuadratureRule gauss_rule(int n_points);

/// Lagrange basis of degree k on [0,1] with equispaced nodes j/k.
/// Values and first derivatives can be evaluated at arbitrary points.
struct ReferenceElement {
    explicit ReferenceElement(int degree);

    int degree = 0;
    std::vector<double> nodes;  // k+1 equispaced nodes in [0,1]

    int n_basis() const { return degree + 1; }

    /// values[i] = phi_i(x), i = 0..k
    void eval(double x, std::span<double> values) const;
    /// derivs[i] = phi_i'(x) (reference coordinate)
    void eval_deriv(double x, std::span<double> derivs) const;
};

/// Continuous Lagrange space of degree k on a Mesh1D. Global dofs are the
/// nodes r = i / (k*N), i = 0..k*N; cell c owns dofs c*k .. c*k+k. The two
/// endpoint dofs are the constrained (Dirichlet) dofs; free dofs are the
/// interior ones, numbered f = dof - 1.
struct FESpace {
    Mesh1D mesh;
    ReferenceElement element;
    std::array<int, 2> constrained_dofs{};  // {0, k*N}

    int degree() const { return element.degree; }
    int n_dofs_total() const { return degree() * mesh.n_cells + 1; }
    int n_free() const { return n_dofs_total() - 2; }

    int global_dof(int cell, int local) const { return cell * degree() + local; }
    bool is_constrained(int dof) const { return dof == 0 || dof == n_dofs_total() - 1; }
    /// Index into free-dof vectors; only valid for unconstrained dofs.
    int free_index(int dof) const { return dof - 1; }
    /// Node coordinate of a global dof.
    double dof_coordinate(int dof) const {
        return static_cast<double>(dof) / static_cast<double>(degree() * mesh.n_cells);
    }
};

/// degree in 1..4.
std::shared_ptr<const FESpace> make_space(const Mesh1D& mesh, int degree);

/// Piecewise-polynomial function: nodal coefficients over all dofs of a space
/// (constrained entries hold the prescribed boundary values).
struct FEFunction {
    std::shared_ptr<const FESpace> space;
    std::vector<double> coeffs;
};

FEFunction zero_function(std::shared_ptr<const FESpace> space);

/// Value at r in [0,1]; throws std::domain_error outside. Continuous across
/// cell boundaries, so either adjacent cell gives the same value.
double evaluate(const FEFunction& fe_fn, double r);

/// Derivative at r. At interior cell boundaries the left cell's polynomial
/// is used; derivatives only enter quadrature at interior points, so the
/// convention never affects computed norms.
double evaluate_derivative(const FEFunction& fe_fn, double r);

/// Evaluation pinned to a specific cell (r clamped to the cell in reference
/// coordinates). Used for nested-mesh error integration and continuity tests.
double evaluate_in_cell(const FEFunction& fe_fn, int cell, double r);
double evaluate_derivative_in_cell(const FEFunction& fe_fn, int cell, double r);

}  // namespace hmhf
