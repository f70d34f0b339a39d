#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "hmhf/assembly.hpp"
#include "hmhf/mesh.hpp"

namespace hmhf {

/// f(z) = z - sin(2z)/2, the derivative of F.
double f_nonlin(double z);
/// F(z) = (z^2 - sin^2 z)/2; convex with F(0) = F'(0) = 0.
double F_potential(double z);

/// Dirichlet-type energy of v: E(v) = gradient_part + sine_part with
///   gradient_part = 1/2 * integral of v'(r)^2 r dr,
///   sine_part     = 1/2 * integral of sin(v)^2 / r dr.
/// The same quadrature also yields the splitting E(v) = h1r_half - potential,
/// which holds pointwise at every quadrature node and therefore to roundoff.
struct EnergyBreakdown {
    double total = 0.0;
    double gradient_part = 0.0;
    double sine_part = 0.0;
    double h1r_half = 0.0;   // 1/2 * ||v||_{H^1_r}^2
    double potential = 0.0;  // integral of F(v(r)) / r dr
};

EnergyBreakdown energy(const FEFunction& v, const AssemblyConfig& config);
EnergyBreakdown energy(const FEFunction& v, const QuadCache& cache);

/// Weighted norms. norm_h1r requires v(0) = 0 for the 1/r part to be finite;
/// FE functions handled here always satisfy it through the constrained dof.
double norm_l2r(const FEFunction& v, const AssemblyConfig& config);   // (int v^2 r dr)^(1/2)
double norm_1r(const FEFunction& v, const AssemblyConfig& config);    // (int v'^2 r dr)^(1/2)
double norm_h1r(const FEFunction& v, const AssemblyConfig& config);   // (|v|_{1,r}^2 + int v^2/r dr)^(1/2)

/// Unweighted L^2 and full H^1 norms, for the norm-chain comparisons.
double norm_l2(const FEFunction& v, const AssemblyConfig& config);
double norm_h1(const FEFunction& v, const AssemblyConfig& config);

/// sup-norm bound from the energy: 2*arcsin(sqrt(e/2)) for 0 <= e <= 2.
/// Throws std::domain_error outside [0,2], where no bound is available.
double sup_bound_from_energy(double e);

/// C_b = b(1-b)^2 / (2*arcsin^2(sqrt(b))) for 0 < b < 1, the constant in
/// F(z) >= C_b z^2 on |z| <= 2*arcsin(sqrt(b)); tends to 1/2 as b -> 0.
double norm_equivalence_constant(double b);

/// Nodal interpolant of g; boundary dofs are set from g.
/// Throws std::invalid_argument if g is non-finite at a node.
FEFunction interpolate(const std::function<double(double)>& g,
                       std::shared_ptr<const FESpace> space);

/// Target of a projection: value and derivative callbacks.
struct ScalarFunction {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
};

struct ProjectionResult {
    FEFunction fn;
    /// sup_i |(g - P g, phi_i)_{H^1_r}| over free dofs, from the solved system.
    double orthogonality_residual = 0.0;
};

/// Galerkin projection onto the homogeneous space: (P g, v)_{H^1_r} =
/// (g, v)_{H^1_r} for all v in the space. Requires g(0) = 0.
ProjectionResult galerkin_project_report(const ScalarFunction& g,
                                         std::shared_ptr<const FESpace> space,
                                         const AssemblyConfig& config);
FEFunction galerkin_project(const ScalarFunction& g,
                            std::shared_ptr<const FESpace> space,
                            const AssemblyConfig& config);
ProjectionResult galerkin_project_report(const FEFunction& g,
                                         std::shared_ptr<const FESpace> space,
                                         const AssemblyConfig& config);
FEFunction galerkin_project(const FEFunction& g,
                            std::shared_ptr<const FESpace> space,
                            const AssemblyConfig& config);

/// ||g||_{H^1_r} of a callback target, integrated cell by cell on the given
/// space's mesh with its quadrature. Requires g(0) = 0.
double norm_h1r_scalar(const ScalarFunction& g, const FESpace& space,
                       const AssemblyConfig& config);
/// ||g - v||_{H^1_r} for a callback target against an FE function.
double error_h1r_scalar(const ScalarFunction& g, const FEFunction& v,
                        const AssemblyConfig& config);
/// ||g - v||_{0,r} for a callback target against an FE function.
double error_l2r_scalar(const std::function<double(double)>& g, const FEFunction& v,
                        const AssemblyConfig& config);

/// max over a per-cell sample grid of |v(r)/r| (the r -> 0 limit |v'(0)| is
/// used at the origin).
double sup_over_r(const FEFunction& v, int samples_per_cell = 64);
/// Scaled ratio h * ||v/r||_inf / ||v||_{H^1_r}; bounded uniformly in h.
double inverse_estimate_ratio(const FEFunction& v, const AssemblyConfig& config,
                              int samples_per_cell = 64);

/// Distances between a coarse and a fine FE function; the fine mesh must be
/// a refinement of the coarse one (cell counts divide). Integration runs over
/// the fine cells with the fine space's quadrature.
struct ErrorReport {
    double err_l2r = 0.0;
    double err_semi_h1r = 0.0;  // derivative part only
    double err_h1r = 0.0;
    double err_sup_nodal = 0.0;  // max over fine nodes
};

ErrorReport error_between(const FEFunction& coarse, const FEFunction& fine,
                          const AssemblyConfig& fine_config);

/// Experimental orders of convergence: eoc[i-1] = log(e[i-1]/e[i]) / log(ratio).
std::vector<double> eoc(std::span<const double> errors, double ratio = 2.0);

/// Random FE function with iid U[-1,1] nodal values; the left boundary dof is
/// always zero, the right one optionally.
FEFunction random_fe_function(std::shared_ptr<const FESpace> space,
                              std::mt19937_64& rng, bool zero_right = true);

/// Bisection scale s > 0 with E(s*v) = target (tolerance 1e-12 relative).
FEFunction rescale_to_energy(const FEFunction& v, double target,
                             const AssemblyConfig& config);

}  // namespace hmhf
