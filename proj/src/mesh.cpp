#include "hmhf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmhf {

Mesh1D build_mesh(int n_cells) {
    if (n_cells < 2)
        throw std::invalid_argument("build_mesh: n_cells must be >= 2");
    Mesh1D mesh;
    mesh.n_cells = n_cells;
    mesh.h = 1.0 / static_cast<double>(n_cells);
    mesh.vertices.resize(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i)
        mesh.vertices[i] = static_cast<double>(i) / static_cast<double>(n_cells);
    return mesh;
}

QuadratureRule gauss_rule(int n_points) {
    if (n_points < 1 || n_points > 16)
        throw std::invalid_argument("gauss_rule: n_points must be in 1..16");

    const int n = n_points;
    std::vector<double> x(n), w(n);
    // Roots of the Legendre polynomial P_n on [-1,1] by Newton iteration on
    // the three-term recurrence; symmetric pairs are mirrored.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15)
                break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }

    QuadratureRule rule;
    rule.order = 2 * n - 1;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.points[i] = 0.5 * (x[i] + 1.0);
        rule.weights[i] = 0.5 * w[i];
    }
    return rule;
}

ReferenceElement::ReferenceElement(int deg) : degree(deg) {
    if (deg < 1 || deg > 4)
        throw std::invalid_argument("ReferenceElement: degree must be in 1..4");
    nodes.resize(deg + 1);
    for (int j = 0; j <= deg; ++j)
        nodes[j] = static_cast<double>(j) / static_cast<double>(deg);
}

void ReferenceElement::eval(double x, std::span<double> values) const {
    const int m = n_basis();
    for (int i = 0; i < m; ++i) {
        double p = 1.0;
        for (int j = 0; j < m; ++j) {
            if (j == i)
                continue;
            p *= (x - nodes[j]) / (nodes[i] - nodes[j]);
        }
        values[i] = p;
    }
}

void ReferenceElement::eval_deriv(double x, std::span<double> derivs) const {
    const int m = n_basis();
    for (int i = 0; i < m; ++i) {
        double sum = 0.0;
        for (int l = 0; l < m; ++l) {
            if (l == i)
                continue;
            double term = 1.0 / (nodes[i] - nodes[l]);
            for (int j = 0; j < m; ++j) {
                if (j == i || j == l)
                    continue;
                term *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
            sum += term;
        }
        derivs[i] = sum;
    }
}

std::shared_ptr<const FESpace> make_space(const Mesh1D& mesh, int degree) {
    if (mesh.n_cells < 2 || mesh.vertices.size() != static_cast<size_t>(mesh.n_cells) + 1)
        throw std::invalid_argument("make_space: malformed mesh");
    auto space = std::make_shared<FESpace>(FESpace{mesh, ReferenceElement(degree), {0, 0}});
    space->constrained_dofs = {0, space->n_dofs_total() - 1};
    return space;
}

FEFunction zero_function(std::shared_ptr<const FESpace> space) {
    FEFunction fe_fn;
    fe_fn.coeffs.assign(space->n_dofs_total(), 0.0);
    fe_fn.space = std::move(space);
    return fe_fn;
}

namespace {

int locate_cell(const FESpace& space, double r) {
    if (!(r >= 0.0 && r <= 1.0))
        throw std::domain_error("evaluate: point outside [0,1]");
    const int n = space.mesh.n_cells;
    int cell = static_cast<int>(r * n);
    if (cell >= n)
        cell = n - 1;
    return cell;
}

}  // namespace

double evaluate_in_cell(const FEFunction& fe_fn, int cell, double r) {
    const FESpace& space = *fe_fn.space;
    const int k = space.degree();
    double x = r * space.mesh.n_cells - cell;
    x = std::clamp(x, 0.0, 1.0);
    double vals[5];
    space.element.eval(x, std::span<double>(vals, k + 1));
    double v = 0.0;
    for (int i = 0; i <= k; ++i)
        v += fe_fn.coeffs[space.global_dof(cell, i)] * vals[i];
    return v;
}

double evaluate_derivative_in_cell(const FEFunction& fe_fn, int cell, double r) {
    const FESpace& space = *fe_fn.space;
    const int k = space.degree();
    double x = r * space.mesh.n_cells - cell;
    x = std::clamp(x, 0.0, 1.0);
    double ders[5];
    space.element.eval_deriv(x, std::span<double>(ders, k + 1));
    double d = 0.0;
    for (int i = 0; i <= k; ++i)
        d += fe_fn.coeffs[space.global_dof(cell, i)] * ders[i];
    return d * space.mesh.n_cells;  // chain rule, dx/dr = 1/h
}

double evaluate(const FEFunction& fe_fn, double r) {
    return evaluate_in_cell(fe_fn, locate_cell(*fe_fn.space, r), r);
}

double evaluate_derivative(const FEFunction& fe_fn, double r) {
    const FESpace& space = *fe_fn.space;
    int cell = locate_cell(space, r);
    // Left-cell convention at interior vertices.
    double x = r * space.mesh.n_cells;
    if (cell >= 1 && x == static_cast<double>(cell))
        cell -= 1;
    return evaluate_derivative_in_cell(fe_fn, cell, r);
}

}  // namespace hmhf
