#include "hmhf/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hmhf/banded.hpp"

namespace hmhf {

double f_nonlin(double z) {
    return z - 0.5 * std::sin(2.0 * z);
}

double F_potential(double z) {
    double s = std::sin(z);
    return 0.5 * (z * z - s * s);
}

namespace {

struct QuadSums {
    double v2r = 0.0;
    double dv2r = 0.0;
    double v2_over_r = 0.0;
    double sin2_over_r = 0.0;
    double pot_over_r = 0.0;
    double v2 = 0.0;
    double dv2 = 0.0;
};

QuadSums accumulate(const FEFunction& v, const QuadCache& cache) {
    const FESpace& space = *v.space;
    const int k = space.degree();
    const double h = space.mesh.h;
    QuadSums sums;
    for (int c = 0; c < space.mesh.n_cells; ++c) {
        const auto& cr = cache.for_cell(c);
        const int nq = static_cast<int>(cr.rule.points.size());
        for (int q = 0; q < nq; ++q) {
            const double r = (c + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double* phi = cr.basis_values.data() + q * (k + 1);
            const double* dphi = cr.basis_derivs.data() + q * (k + 1);
            double val = 0.0, der = 0.0;
            for (int i = 0; i <= k; ++i) {
                const double ci = v.coeffs[space.global_dof(c, i)];
                val += ci * phi[i];
                der += ci * dphi[i];
            }
            der /= h;
            const double s = std::sin(val);
            sums.v2r += w * val * val * r;
            sums.dv2r += w * der * der * r;
            sums.v2_over_r += w * val * val / r;
            sums.sin2_over_r += w * s * s / r;
            sums.pot_over_r += w * F_potential(val) / r;
            sums.v2 += w * val * val;
            sums.dv2 += w * der * der;
        }
    }
    return sums;
}

void require_left_zero(const FEFunction& v, const char* who) {
    if (v.coeffs[0] != 0.0)
        throw std::domain_error(std::string(who) + ": v(0) must vanish");
}

}  // namespace

EnergyBreakdown energy(const FEFunction& v, const QuadCache& cache) {
    QuadSums s = accumulate(v, cache);
    EnergyBreakdown e;
    e.gradient_part = 0.5 * s.dv2r;
    e.sine_part = 0.5 * s.sin2_over_r;
    e.total = e.gradient_part + e.sine_part;
    e.h1r_half = 0.5 * (s.dv2r + s.v2_over_r);
    e.potential = s.pot_over_r;
    return e;
}

EnergyBreakdown energy(const FEFunction& v, const AssemblyConfig& config) {
    return energy(v, make_quad_cache(*v.space, config));
}

double norm_l2r(const FEFunction& v, const AssemblyConfig& config) {
    return std::sqrt(accumulate(v, make_quad_cache(*v.space, config)).v2r);
}

double norm_1r(const FEFunction& v, const AssemblyConfig& config) {
    return std::sqrt(accumulate(v, make_quad_cache(*v.space, config)).dv2r);
}

double norm_h1r(const FEFunction& v, const AssemblyConfig& config) {
    require_left_zero(v, "norm_h1r");
    QuadSums s = accumulate(v, make_quad_cache(*v.space, config));
    return std::sqrt(s.dv2r + s.v2_over_r);
}

double norm_l2(const FEFunction& v, const AssemblyConfig& config) {
    return std::sqrt(accumulate(v, make_quad_cache(*v.space, config)).v2);
}

double norm_h1(const FEFunction& v, const AssemblyConfig& config) {
    QuadSums s = accumulate(v, make_quad_cache(*v.space, config));
    return std::sqrt(s.v2 + s.dv2);
}

double sup_bound_from_energy(double e) {
    if (!(e >= 0.0 && e <= 2.0))
        throw std::domain_error("sup_bound_from_energy: energy must be in [0,2]");
    return 2.0 * std::asin(std::sqrt(0.5 * e));
}

double norm_equivalence_constant(double b) {
    if (!(b > 0.0 && b < 1.0))
        throw std::domain_error("norm_equivalence_constant: b must be in (0,1)");
    double a = std::asin(std::sqrt(b));
    return b * (1.0 - b) * (1.0 - b) / (2.0 * a * a);
}

FEFunction interpolate(const std::function<double(double)>& g,
                       std::shared_ptr<const FESpace> space) {
    FEFunction fe_fn = zero_function(space);
    const int n = space->n_dofs_total();
    for (int i = 0; i < n; ++i) {
        double val = g(space->dof_coordinate(i));
        if (!std::isfinite(val))
            throw std::invalid_argument("interpolate: non-finite value at a node");
        fe_fn.coeffs[i] = val;
    }
    return fe_fn;
}

namespace {

/// Shared projection core: rhs entries (g, phi_i)_{H^1_r} over free dofs.
ProjectionResult project_from_rhs(std::shared_ptr<const FESpace> space,
                                  const QuadCache& cache,
                                  const std::vector<double>& rhs) {
    BandedSpdMatrix a = assemble_h1r(*space, cache);
    CholeskyFactor chol = factor(a);
    std::vector<double> x = solve(chol, rhs);

    std::vector<double> ax(x.size());
    a.matvec(x, ax);
    double residual = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
        residual = std::max(residual, std::abs(rhs[i] - ax[i]));

    ProjectionResult result;
    result.fn = zero_function(space);
    for (size_t i = 0; i < x.size(); ++i)
        result.fn.coeffs[i + 1] = x[i];
    result.orthogonality_residual = residual;
    return result;
}

template <typename Value, typename Deriv>
std::vector<double> h1r_rhs(const FESpace& space, const QuadCache& cache,
                            Value&& value, Deriv&& deriv) {
    const int k = space.degree();
    const double h = space.mesh.h;
    std::vector<double> rhs(space.n_free(), 0.0);
    for (int c = 0; c < space.mesh.n_cells; ++c) {
        const auto& cr = cache.for_cell(c);
        const int nq = static_cast<int>(cr.rule.points.size());
        for (int q = 0; q < nq; ++q) {
            const double r = (c + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double* phi = cr.basis_values.data() + q * (k + 1);
            const double* dphi = cr.basis_derivs.data() + q * (k + 1);
            const double gv = value(r);
            const double gd = deriv(r);
            for (int i = 0; i <= k; ++i) {
                int gi = space.global_dof(c, i);
                if (space.is_constrained(gi))
                    continue;
                rhs[space.free_index(gi)] +=
                    w * (gd * dphi[i] / h * r + gv * phi[i] / r);
            }
        }
    }
    return rhs;
}

}  // namespace

ProjectionResult galerkin_project_report(const ScalarFunction& g,
                                         std::shared_ptr<const FESpace> space,
                                         const AssemblyConfig& config) {
    if (std::abs(g.value(0.0)) > 1e-12)
        throw std::invalid_argument("galerkin_project: target must vanish at r=0");
    QuadCache cache = make_quad_cache(*space, config);
    std::vector<double> rhs = h1r_rhs(*space, cache, g.value, g.deriv);
    return project_from_rhs(space, cache, rhs);
}

FEFunction galerkin_project(const ScalarFunction& g,
                            std::shared_ptr<const FESpace> space,
                            const AssemblyConfig& config) {
    return galerkin_project_report(g, std::move(space), config).fn;
}

ProjectionResult galerkin_project_report(const FEFunction& g,
                                         std::shared_ptr<const FESpace> space,
                                         const AssemblyConfig& config) {
    require_left_zero(g, "galerkin_project");
    QuadCache cache = make_quad_cache(*space, config);
    std::vector<double> rhs =
        h1r_rhs(*space, cache,
                [&](double r) { return evaluate(g, r); },
                [&](double r) { return evaluate_derivative(g, r); });
    return project_from_rhs(space, cache, rhs);
}

FEFunction galerkin_project(const FEFunction& g,
                            std::shared_ptr<const FESpace> space,
                            const AssemblyConfig& config) {
    return galerkin_project_report(g, std::move(space), config).fn;
}

double norm_h1r_scalar(const ScalarFunction& g, const FESpace& space,
                       const AssemblyConfig& config) {
    if (std::abs(g.value(0.0)) > 1e-12)
        throw std::invalid_argument("norm_h1r_scalar: target must vanish at r=0");
    QuadCache cache = make_quad_cache(space, config);
    const double h = space.mesh.h;
    double sum = 0.0;
    for (int c = 0; c < space.mesh.n_cells; ++c) {
        const auto& cr = cache.for_cell(c);
        for (size_t q = 0; q < cr.rule.points.size(); ++q) {
            const double r = (c + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double gv = g.value(r);
            const double gd = g.deriv(r);
            sum += w * (gd * gd * r + gv * gv / r);
        }
    }
    return std::sqrt(sum);
}

double error_h1r_scalar(const ScalarFunction& g, const FEFunction& v,
                        const AssemblyConfig& config) {
    const FESpace& space = *v.space;
    require_left_zero(v, "error_h1r_scalar");
    if (std::abs(g.value(0.0)) > 1e-12)
        throw std::invalid_argument("error_h1r_scalar: target must vanish at r=0");
    QuadCache cache = make_quad_cache(space, config);
    const double h = space.mesh.h;
    double sum = 0.0;
    for (int c = 0; c < space.mesh.n_cells; ++c) {
        const auto& cr = cache.for_cell(c);
        for (size_t q = 0; q < cr.rule.points.size(); ++q) {
            const double r = (c + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double ev = g.value(r) - evaluate_in_cell(v, c, r);
            const double ed = g.deriv(r) - evaluate_derivative_in_cell(v, c, r);
            sum += w * (ed * ed * r + ev * ev / r);
        }
    }
    return std::sqrt(sum);
}

double error_l2r_scalar(const std::function<double(double)>& g, const FEFunction& v,
                        const AssemblyConfig& config) {
    const FESpace& space = *v.space;
    QuadCache cache = make_quad_cache(space, config);
    const double h = space.mesh.h;
    double sum = 0.0;
    for (int c = 0; c < space.mesh.n_cells; ++c) {
        const auto& cr = cache.for_cell(c);
        for (size_t q = 0; q < cr.rule.points.size(); ++q) {
            const double r = (c + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double ev = g(r) - evaluate_in_cell(v, c, r);
            sum += w * ev * ev * r;
        }
    }
    return std::sqrt(sum);
}

double sup_over_r(const FEFunction& v, int samples_per_cell) {
    const FESpace& space = *v.space;
    if (samples_per_cell < 2)
        throw std::invalid_argument("sup_over_r: need at least 2 samples per cell");
    const double h = space.mesh.h;
    double sup = 0.0;
    for (int c = 0; c < space.mesh.n_cells; ++c) {
        for (int j = 0; j < samples_per_cell; ++j) {
            const double x = static_cast<double>(j) / (samples_per_cell - 1);
            const double r = (c + x) * h;
            double val;
            if (r == 0.0)
                val = evaluate_derivative_in_cell(v, 0, 0.0);  // limit of v/r
            else
                val = evaluate_in_cell(v, c, r) / r;
            sup = std::max(sup, std::abs(val));
        }
    }
    return sup;
}

double inverse_estimate_ratio(const FEFunction& v, const AssemblyConfig& config,
                              int samples_per_cell) {
    require_left_zero(v, "inverse_estimate_ratio");
    double denom = norm_h1r(v, config);
    if (denom == 0.0)
        throw std::domain_error("inverse_estimate_ratio: zero function");
    return v.space->mesh.h * sup_over_r(v, samples_per_cell) / denom;
}

ErrorReport error_between(const FEFunction& coarse, const FEFunction& fine,
                          const AssemblyConfig& fine_config) {
    const FESpace& fine_space = *fine.space;
    const FESpace& coarse_space = *coarse.space;
    const int nf = fine_space.mesh.n_cells;
    const int nc = coarse_space.mesh.n_cells;
    if (nf % nc != 0)
        throw std::invalid_argument("error_between: meshes are not nested");

    QuadCache cache = make_quad_cache(fine_space, fine_config);
    const double h = fine_space.mesh.h;
    double sum_l2r = 0.0, sum_d2r = 0.0, sum_over_r = 0.0;
    for (int c = 0; c < nf; ++c) {
        const int cc = c * nc / nf;
        const auto& cr = cache.for_cell(c);
        for (size_t q = 0; q < cr.rule.points.size(); ++q) {
            const double r = (c + cr.rule.points[q]) * h;
            const double w = cr.rule.weights[q] * h;
            const double ev =
                evaluate_in_cell(coarse, cc, r) - evaluate_in_cell(fine, c, r);
            const double ed = evaluate_derivative_in_cell(coarse, cc, r) -
                              evaluate_derivative_in_cell(fine, c, r);
            sum_l2r += w * ev * ev * r;
            sum_d2r += w * ed * ed * r;
            sum_over_r += w * ev * ev / r;
        }
    }

    ErrorReport report;
    report.err_l2r = std::sqrt(sum_l2r);
    report.err_semi_h1r = std::sqrt(sum_d2r);
    report.err_h1r = std::sqrt(sum_d2r + sum_over_r);
    double sup = 0.0;
    for (int i = 0; i < fine_space.n_dofs_total(); ++i) {
        const double r = fine_space.dof_coordinate(i);
        sup = std::max(sup, std::abs(evaluate(coarse, r) - fine.coeffs[i]));
    }
    report.err_sup_nodal = sup;
    return report;
}

std::vector<double> eoc(std::span<const double> errors, double ratio) {
    if (!(ratio > 0.0) || ratio == 1.0)
        throw std::invalid_argument("eoc: ratio must be positive and != 1");
    std::vector<double> orders;
    for (size_t i = 1; i < errors.size(); ++i) {
        if (errors[i - 1] > 0.0 && errors[i] > 0.0)
            orders.push_back(std::log(errors[i - 1] / errors[i]) / std::log(ratio));
        else
            orders.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return orders;
}

FEFunction random_fe_function(std::shared_ptr<const FESpace> space,
                              std::mt19937_64& rng, bool zero_right) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    FEFunction fe_fn = zero_function(space);
    const int n = fe_fn.space->n_dofs_total();
    for (int i = 0; i < n; ++i)
        fe_fn.coeffs[i] = dist(rng);
    fe_fn.coeffs[0] = 0.0;
    if (zero_right)
        fe_fn.coeffs[n - 1] = 0.0;
    return fe_fn;
}

FEFunction rescale_to_energy(const FEFunction& v, double target,
                             const AssemblyConfig& config) {
    if (!(target > 0.0))
        throw std::invalid_argument("rescale_to_energy: target must be positive");
    QuadCache cache = make_quad_cache(*v.space, config);
    FEFunction scaled = v;
    auto energy_at = [&](double s) {
        for (size_t i = 0; i < v.coeffs.size(); ++i)
            scaled.coeffs[i] = s * v.coeffs[i];
        return energy(scaled, cache).total;
    };

    double hi = 1.0;
    int guard = 0;
    while (energy_at(hi) < target) {
        hi *= 2.0;
        if (++guard > 60)
            throw std::runtime_error("rescale_to_energy: cannot reach target");
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double e = energy_at(mid);
        if (std::abs(e - target) <= 1e-12 * target) {
            lo = hi = mid;
            break;
        }
        (e < target ? lo : hi) = mid;
    }
    energy_at(0.5 * (lo + hi));
    return scaled;
}

}  // namespace hmhf
