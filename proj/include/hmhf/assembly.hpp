#pragma once

#include <span>
#include <vector>

#include "hmhf/mesh.hpp"

namespace hmhf {

/// Quadrature resolution used throughout assembly, energy evaluation and the
/// time stepper. The 1/r factors are smooth on each cell's interior but vary
/// fastest on the first cell, which therefore gets a richer rule. Defaults
/// (2k+2 bulk, 2k+6 first cell) keep the quadrature error below the
/// discretization error of the targeted meshes; raise both to push quadrature
/// error toward machine precision.
struct AssemblyConfig {
    int quad_points_bulk = 0;
    int quad_points_first_cell = 0;
};

/// {2k+2, 2k+6} for polynomial degree k.
AssemblyConfig default_assembly(int degree);

/// Fills zero entries with the degree defaults and validates the 1..16 range.
AssemblyConfig resolve_assembly(const AssemblyConfig& config, int degree);

/// Symmetric positive definite band matrix, lower storage:
/// bands[d][i] = A(i+d, i) for d = 0..bandwidth.
class BandedSpdMatrix {
  public:
    BandedSpdMatrix(int n, int bandwidth);

    int size() const { return n_; }
    int bandwidth() const { return bw_; }

    /// Symmetric accessor; zero outside the band.
    double at(int i, int j) const;
    /// Accumulate into entry (i,j), i >= j, i-j <= bandwidth.
    void add(int i, int j, double value);

    void matvec(std::span<const double> x, std::span<double> y) const;
    double quadratic_form(std::span<const double> x) const;

    std::span<const double> band(int d) const { return bands_[d]; }
    std::span<double> band(int d) { return bands_[d]; }

  private:
    int n_;
    int bw_;
    std::vector<std::vector<double>> bands_;
};

/// alpha*A + beta*B for matrices of identical size and bandwidth.
BandedSpdMatrix scaled_sum(double alpha, const BandedSpdMatrix& a,
                           double beta, const BandedSpdMatrix& b);

/// Reference-element basis values/derivatives tabulated at the points of the
/// bulk and first-cell rules; shared by assembly, energy evaluation and the
/// stepper so that all of them integrate with the same points and weights.
struct QuadCache {
    struct CellRule {
        QuadratureRule rule;
        std::vector<double> basis_values;      // [q * (k+1) + i]
        std::vector<double> basis_derivs;      // reference-coordinate derivative
    };
    CellRule bulk;
    CellRule first;
    const CellRule& for_cell(int cell) const { return cell == 0 ? first : bulk; }
};

QuadCache make_quad_cache(const FESpace& space, const AssemblyConfig& config);

/// Weighted mass matrix over free dofs: M_ij = (phi_j, phi_i)_{0,r}.
BandedSpdMatrix assemble_mass_r(const FESpace& space, const AssemblyConfig& config);
BandedSpdMatrix assemble_mass_r(const FESpace& space, const QuadCache& cache);

/// Weighted H^1_r matrix over free dofs:
/// A_ij = (phi_j', phi_i')_{0,r} + integral of phi_i phi_j / r dr.
BandedSpdMatrix assemble_h1r(const FESpace& space, const AssemblyConfig& config);
BandedSpdMatrix assemble_h1r(const FESpace& space, const QuadCache& cache);

/// Load vector over free dofs: b_i = integral of f(u(r)) phi_i(r) / r dr,
/// with f(z) = z - sin(2z)/2.
std::vector<double> assemble_nonlinear_load(const FEFunction& state,
                                            const AssemblyConfig& config);
std::vector<double> assemble_nonlinear_load(const FEFunction& state,
                                            const QuadCache& cache);

/// Coupling of the H^1_r form between free and constrained dofs:
/// c_i = A(phi_i, lift) where lift has the given endpoint values. Needed on
/// the right-hand side when the boundary data is nonzero.
std::vector<double> assemble_h1r_boundary_coupling(const FESpace& space,
                                                   const QuadCache& cache,
                                                   double left_value,
                                                   double right_value);

}  // namespace hmhf
