#include "hmhf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmhf {

int step_count(const StepperConfig& config) {
    if (!(config.tau > 0.0) || !std::isfinite(config.tau))
        throw std::invalid_argument("StepperConfig: tau must be positive");
    if (!(config.t_end > 0.0) || !std::isfinite(config.t_end))
        throw std::invalid_argument("StepperConfig: t_end must be positive");
    if (!(config.monitor_threshold > 0.0))
        throw std::invalid_argument("StepperConfig: monitor_threshold must be positive");
    double ratio = config.t_end / config.tau;
    double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-10 * ratio)
        throw std::invalid_argument("StepperConfig: t_end must be an integer multiple of tau");
    return static_cast<int>(rounded);
}

FlowOperators make_flow_operators(const FESpace& space, const StepperConfig& config,
                                  double left_value, double right_value) {
    AssemblyConfig acfg = resolve_assembly(config.assembly, space.degree());
    FlowOperators ops{make_quad_cache(space, acfg),
                      BandedSpdMatrix(1, 0), BandedSpdMatrix(1, 0),
                      std::nullopt, std::nullopt, {}, config.tau};
    ops.mass = assemble_mass_r(space, ops.cache);
    ops.h1r = assemble_h1r(space, ops.cache);
    ops.euler_system = factor(scaled_sum(1.0 / config.tau, ops.mass, 1.0, ops.h1r));
    if (config.scheme == Scheme::SemiImplicitBdf2)
        ops.bdf2_system = factor(scaled_sum(1.5 / config.tau, ops.mass, 1.0, ops.h1r));
    ops.boundary_coupling =
        assemble_h1r_boundary_coupling(space, ops.cache, left_value, right_value);
    return ops;
}

namespace {

std::vector<double> free_part(const FEFunction& u) {
    return {u.coeffs.begin() + 1, u.coeffs.end() - 1};
}

FEFunction with_free_part(const FEFunction& like, const std::vector<double>& w) {
    FEFunction out = like;
    std::copy(w.begin(), w.end(), out.coeffs.begin() + 1);
    return out;
}

double max_grad_first_cell(const FEFunction& u, const QuadCache& cache) {
    double m = 0.0;
    for (double x : cache.first.rule.points) {
        double r = x * u.space->mesh.h;
        m = std::max(m, std::abs(evaluate_derivative_in_cell(u, 0, r)));
    }
    return m;
}

double sup_nodal(const FEFunction& u) {
    double m = 0.0;
    for (double c : u.coeffs)
        m = std::max(m, std::abs(c));
    return m;
}

bool finite_coeffs(const FEFunction& u) {
    for (double c : u.coeffs)
        if (!std::isfinite(c))
            return false;
    return true;
}

}  // namespace

FEFunction step_semi_implicit(const FEFunction& u_prev, const FlowOperators& ops) {
    std::vector<double> w_prev = free_part(u_prev);
    std::vector<double> rhs(w_prev.size());
    ops.mass.matvec(w_prev, rhs);
    std::vector<double> load = assemble_nonlinear_load(u_prev, ops.cache);
    for (size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = rhs[i] / ops.tau + load[i] - ops.boundary_coupling[i];
    return with_free_part(u_prev, solve(*ops.euler_system, rhs));
}

FEFunction step_bdf2(const FEFunction& u_prev, const FEFunction& u_prev2,
                     const FlowOperators& ops) {
    FEFunction extrapolant = u_prev;
    for (size_t i = 0; i < extrapolant.coeffs.size(); ++i)
        extrapolant.coeffs[i] = 2.0 * u_prev.coeffs[i] - u_prev2.coeffs[i];

    std::vector<double> w_prev = free_part(u_prev);
    std::vector<double> w_prev2 = free_part(u_prev2);
    std::vector<double> combo(w_prev.size());
    for (size_t i = 0; i < combo.size(); ++i)
        combo[i] = 4.0 * w_prev[i] - w_prev2[i];
    std::vector<double> rhs(combo.size());
    ops.mass.matvec(combo, rhs);
    std::vector<double> load = assemble_nonlinear_load(extrapolant, ops.cache);
    for (size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = rhs[i] / (2.0 * ops.tau) + load[i] - ops.boundary_coupling[i];
    return with_free_part(u_prev, solve(*ops.bdf2_system, rhs));
}

RunResult run_flow(const FEFunction& u0, const StepperConfig& config) {
    const int n_steps = step_count(config);
    const FESpace& space = *u0.space;
    const double gamma_l = u0.coeffs.front();
    const double gamma_r = u0.coeffs.back();
    FlowOperators ops = make_flow_operators(space, config, gamma_l, gamma_r);

    FlowTrace trace;
    trace.records.reserve(n_steps + 1);
    trace.records.push_back({0, 0.0, energy(u0, ops.cache).total, 0.0, 0.0,
                             max_grad_first_cell(u0, ops.cache), sup_nodal(u0)});

    FEFunction u_prev2 = u0;
    FEFunction u = u0;
    trace.halt_step = 0;
    trace.halt_time = 0.0;

    for (int j = 1; j <= n_steps; ++j) {
        FEFunction u_next;
        if (config.scheme == Scheme::SemiImplicitBdf2 && j >= 2) {
            u_next = step_bdf2(u, u_prev2, ops);
        } else {
            u_next = step_semi_implicit(u, ops);
            if (config.scheme == Scheme::SemiImplicitBdf2)
                trace.euler_startup_steps = 1;
        }
        if (!finite_coeffs(u_next)) {
            trace.status = RunStatus::Diverged;
            break;
        }

        std::vector<double> delta(space.n_free());
        for (int i = 0; i < space.n_free(); ++i)
            delta[i] = u_next.coeffs[i + 1] - u.coeffs[i + 1];
        FlowRecord rec;
        rec.step = j;
        rec.t = j * config.tau;
        rec.energy = energy(u_next, ops.cache).total;
        rec.diss_l2 = ops.mass.quadratic_form(delta) / config.tau;
        rec.diss_h1r = ops.h1r.quadratic_form(delta);
        rec.max_grad_first_cell = max_grad_first_cell(u_next, ops.cache);
        rec.sup_nodal = sup_nodal(u_next);
        trace.records.push_back(rec);

        u_prev2 = std::move(u);
        u = std::move(u_next);
        trace.halt_step = j;
        trace.halt_time = rec.t;

        if (rec.max_grad_first_cell > config.monitor_threshold) {
            trace.status = RunStatus::MonitorExceeded;
            break;
        }
    }

    return {std::move(u), std::move(trace)};
}

}  // namespace hmhf
