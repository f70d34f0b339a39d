#include "hmhf/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "hmhf/energy.hpp"

namespace hmhf {

AssemblyConfig default_assembly(int degree) {
    return {2 * degree + 2, 2 * degree + 6};
}

AssemblyConfig resolve_assembly(const AssemblyConfig& config, int degree) {
    AssemblyConfig out = config;
    if (out.quad_points_bulk == 0)
        out.quad_points_bulk = 2 * degree + 2;
    if (out.quad_points_first_cell == 0)
        out.quad_points_first_cell = 2 * degree + 6;
    if (out.quad_points_bulk < 1 || out.quad_points_bulk > 16 ||
        out.quad_points_first_cell < 1 || out.quad_points_first_cell > 16)
        throw std::invalid_argument("AssemblyConfig: quadrature points must be in 1..16");
    return out;
}

BandedSpdMatrix::BandedSpdMatrix(int n, int bandwidth) : n_(n), bw_(bandwidth) {
    if (n < 1 || bandwidth < 0)
        throw std::invalid_argument("BandedSpdMatrix: bad dimensions");
    bands_.resize(bw_ + 1);
    for (int d = 0; d <= bw_; ++d)
        bands_[d].assign(std::max(0, n_ - d), 0.0);
}

double BandedSpdMatrix::at(int i, int j) const {
    if (i < j)
        std::swap(i, j);
    int d = i - j;
    if (d > bw_)
        return 0.0;
    return bands_[d][j];
}

void BandedSpdMatrix::add(int i, int j, double value) {
    bands_[i - j][j] += value;
}

void BandedSpdMatrix::matvec(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n_; ++i)
        y[i] = bands_[0][i] * x[i];
    for (int d = 1; d <= bw_; ++d) {
        const auto& band = bands_[d];
        for (int j = 0; j + d < n_; ++j) {
            y[j + d] += band[j] * x[j];
            y[j] += band[j] * x[j + d];
        }
    }
}

double BandedSpdMatrix::quadratic_form(std::span<const double> x) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
        s += bands_[0][i] * x[i] * x[i];
    for (int d = 1; d <= bw_; ++d) {
        const auto& band = bands_[d];
        for (int j = 0; j + d < n_; ++j)
            s += 2.0 * band[j] * x[j] * x[j + d];
    }
    return s;
}

BandedSpdMatrix scaled_sum(double alpha, const BandedSpdMatrix& a,
                           double beta, const BandedSpdMatrix& b) {
    if (a.size() != b.size() || a.bandwidth() != b.bandwidth())
        throw std::invalid_argument("scaled_sum: shape mismatch");
    BandedSpdMatrix out(a.size(), a.bandwidth());
    for (int d = 0; d <= a.bandwidth(); ++d) {
        auto oa = a.band(d);
        auto ob = b.band(d);
        auto oo = out.band(d);
        for (size_t i = 0; i < oo.size(); ++i)
            oo[i] = alpha * oa[i] + beta * ob[i];
    }
    return out;
}

namespace {

QuadCache::CellRule make_cell_rule(const ReferenceElement& element, int n_points) {
    QuadCache::CellRule cr;
    cr.rule = gauss_rule(n_points);
    const int nb = element.n_basis();
    cr.basis_values.resize(n_points * nb);
    cr.basis_derivs.resize(n_points * nb);
    for (int q = 0; q < n_points; ++q) {
        element.eval(cr.rule.points[q],
                     std::span<double>(cr.basis_values.data() + q * nb, nb));
        element.eval_deriv(cr.rule.points[q],
                           std::span<double>(cr.basis_derivs.data() + q * nb, nb));
    }
    return cr;
}

}  // namespace

QuadCache make_quad_cache(const FESpace& space, const AssemblyConfig& config) {
    AssemblyConfig cfg = resolve_assembly(config, space.degree());
    QuadCache cache;
    cache.bulk = make_cell_rule(space.element, cfg.quad_points_bulk);
    cache.first = make_cell_rule(space.element, cfg.quad_points_first_cell);
    return cache;
}

namespace {

enum class Form { MassR, H1R };

BandedSpdMatrix assemble_form(const FESpace& space, const QuadCache& cache, Form form) {
    const int k = space.degree();
    const double h = space.mesh.h;
    BandedSpdMatrix mat(space.n_free(), k);

    for (int c = 0; c < space.mesh.n_cells; ++c) {
        const auto& cr = cache.for_cell(c);
        const int nq = static_cast<int>(cr.rule.points.size());
        double local[5][5] = {};
        for (int q = 0; q < nq; ++q) {
            const double r = (c + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double* phi = cr.basis_values.data() + q * (k + 1);
            const double* dphi = cr.basis_derivs.data() + q * (k + 1);
            for (int i = 0; i <= k; ++i) {
                for (int j = 0; j <= i; ++j) {
                    double v;
                    if (form == Form::MassR)
                        v = w * r * phi[i] * phi[j];
                    else
                        v = w * (dphi[i] * dphi[j] / (h * h) * r + phi[i] * phi[j] / r);
                    local[i][j] += v;
                }
            }
        }
        for (int i = 0; i <= k; ++i) {
            int gi = space.global_dof(c, i);
            if (space.is_constrained(gi))
                continue;
            for (int j = 0; j <= i; ++j) {
                int gj = space.global_dof(c, j);
                if (space.is_constrained(gj))
                    continue;
                mat.add(space.free_index(gi), space.free_index(gj), local[i][j]);
            }
        }
    }
    return mat;
}

}  // namespace

BandedSpdMatrix assemble_mass_r(const FESpace& space, const QuadCache& cache) {
    return assemble_form(space, cache, Form::MassR);
}

BandedSpdMatrix assemble_h1r(const FESpace& space, const QuadCache& cache) {
    return assemble_form(space, cache, Form::H1R);
}

BandedSpdMatrix assemble_mass_r(const FESpace& space, const AssemblyConfig& config) {
    return assemble_mass_r(space, make_quad_cache(space, config));
}

BandedSpdMatrix assemble_h1r(const FESpace& space, const AssemblyConfig& config) {
    return assemble_h1r(space, make_quad_cache(space, config));
}

std::vector<double> assemble_nonlinear_load(const FEFunction& state,
                                            const QuadCache& cache) {
    const FESpace& space = *state.space;
    const int k = space.degree();
    const double h = space.mesh.h;
    std::vector<double> load(space.n_free(), 0.0);

    for (int c = 0; c < space.mesh.n_cells; ++c) {
        const auto& cr = cache.for_cell(c);
        const int nq = static_cast<int>(cr.rule.points.size());
        for (int q = 0; q < nq; ++q) {
            const double r = (c + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double* phi = cr.basis_values.data() + q * (k + 1);
            double u = 0.0;
            for (int i = 0; i <= k; ++i)
                u += state.coeffs[space.global_dof(c, i)] * phi[i];
            const double scale = w * f_nonlin(u) / r;
            for (int i = 0; i <= k; ++i) {
                int gi = space.global_dof(c, i);
                if (!space.is_constrained(gi))
                    load[space.free_index(gi)] += scale * phi[i];
            }
        }
    }
    return load;
}

std::vector<double> assemble_nonlinear_load(const FEFunction& state,
                                            const AssemblyConfig& config) {
    return assemble_nonlinear_load(state, make_quad_cache(*state.space, config));
}

std::vector<double> assemble_h1r_boundary_coupling(const FESpace& space,
                                                   const QuadCache& cache,
                                                   double left_value,
                                                   double right_value) {
    const int k = space.degree();
    const double h = space.mesh.h;
    std::vector<double> coupling(space.n_free(), 0.0);

    // The lift is the FE function with the endpoint dofs set and all interior
    // dofs zero; only the first and last cells contribute.
    struct BoundaryCell {
        int cell;
        int local;  // local index of the constrained dof
        double value;
    };
    const BoundaryCell cells[2] = {{0, 0, left_value},
                                   {space.mesh.n_cells - 1, k, right_value}};
    for (const auto& bc : cells) {
        if (bc.value == 0.0)
            continue;
        const auto& cr = cache.for_cell(bc.cell);
        const int nq = static_cast<int>(cr.rule.points.size());
        for (int q = 0; q < nq; ++q) {
            const double r = (bc.cell + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double* phi = cr.basis_values.data() + q * (k + 1);
            const double* dphi = cr.basis_derivs.data() + q * (k + 1);
            for (int i = 0; i <= k; ++i) {
                int gi = space.global_dof(bc.cell, i);
                if (space.is_constrained(gi))
                    continue;
                double v = w * (dphi[i] * dphi[bc.local] / (h * h) * r +
                                phi[i] * phi[bc.local] / r) * bc.value;
                coupling[space.free_index(gi)] += v;
            }
        }
    }
    return coupling;
}

}  // namespace hmhf
