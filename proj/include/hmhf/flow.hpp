#pragma once

#include <optional>
#include <vector>

#include "hmhf/assembly.hpp"
#include "hmhf/banded.hpp"
#include "hmhf/energy.hpp"
#include "hmhf/mesh.hpp"

namespace hmhf {

enum class Scheme { SemiImplicitEuler, SemiImplicitBdf2 };

/// Time-stepping parameters. t_end must be an integer multiple of tau
/// (relative tolerance 1e-10); the assembly config resolves per degree.
struct StepperConfig {
    double tau = 0.0;
    double t_end = 0.0;
    Scheme scheme = Scheme::SemiImplicitEuler;
    AssemblyConfig assembly{};
    double monitor_threshold = 1e6;
};

/// Number of steps J with J*tau = t_end; throws std::invalid_argument on a
/// non-integral ratio or nonpositive parameters.
int step_count(const StepperConfig& config);

/// Per-step record. diss_l2 = ||u^{j} - u^{j-1}||_{0,r}^2 / tau and
/// diss_h1r = ||u^{j} - u^{j-1}||_{H^1_r}^2 are the two increment terms of
/// the discrete energy identity; both are zero in the step-0 record.
struct FlowRecord {
    int step = 0;
    double t = 0.0;
    double energy = 0.0;
    double diss_l2 = 0.0;
    double diss_h1r = 0.0;
    double max_grad_first_cell = 0.0;  // max |u'| over first-cell quadrature points
    double sup_nodal = 0.0;            // max |coefficient|
};

enum class RunStatus { Completed, MonitorExceeded, Diverged };

struct FlowTrace {
    std::vector<FlowRecord> records;
    RunStatus status = RunStatus::Completed;
    int halt_step = 0;      // last step with a valid state
    double halt_time = 0.0;
    int euler_startup_steps = 0;  // 1 when BDF2 bootstraps with a single Euler step
};

/// Prefactored operators reused across all steps of a run. Dirichlet data is
/// frozen at the initial state's endpoint values; its H^1_r coupling enters
/// each right-hand side (the mass coupling cancels for constant-in-time data).
struct FlowOperators {
    QuadCache cache;
    BandedSpdMatrix mass;  // free dofs
    BandedSpdMatrix h1r;
    std::optional<CholeskyFactor> euler_system;  // M/tau + A
    std::optional<CholeskyFactor> bdf2_system;   // 3M/(2tau) + A
    std::vector<double> boundary_coupling;       // A(phi_i, lift)
    double tau = 0.0;
};

FlowOperators make_flow_operators(const FESpace& space, const StepperConfig& config,
                                  double left_value, double right_value);

/// One backward-Euler step with the nonlinearity lagged:
/// (M/tau + A) W = (M/tau) W_prev + b(u_prev) - coupling.
FEFunction step_semi_implicit(const FEFunction& u_prev, const FlowOperators& ops);

/// One BDF2 step with the load at the extrapolant 2 u_prev - u_prev2:
/// (3M/(2tau) + A) W = M (4 W_prev - W_prev2)/(2tau) + b(2u_prev - u_prev2) - coupling.
FEFunction step_bdf2(const FEFunction& u_prev, const FEFunction& u_prev2,
                     const FlowOperators& ops);

struct RunResult {
    FEFunction final;
    FlowTrace trace;
};

/// Runs the flow from u0 until t_end, a monitor stop, or divergence (non-
/// finite coefficients; the returned state is the last valid one).
RunResult run_flow(const FEFunction& u0, const StepperConfig& config);

}  // namespace hmhf
