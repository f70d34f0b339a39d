#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hmhf/assembly.hpp"
#include "hmhf/banded.hpp"
#include "hmhf/energy.hpp"
#include "hmhf/flow.hpp"
#include "hmhf/mesh.hpp"

using namespace hmhf;

namespace {

constexpr AssemblyConfig kBoosted{12, 14};
constexpr double kPi = std::numbers::pi;

FEFunction bump_state(int n_cells, int degree) {
    auto space = make_space(build_mesh(n_cells), degree);
    return interpolate([](double r) { return kPi * (1.0 - r) * r; }, space);
}

// LHS - RHS of the per-step dissipation identity with the provable 1/2 weight
// on the H^1_r increment; nonpositive up to roundoff for semi-implicit Euler.
double half_form_margin(const FlowRecord& cur, const FlowRecord& prev) {
    return cur.energy + cur.diss_l2 + 0.5 * cur.diss_h1r - prev.energy;
}

}  // namespace

TEST_CASE("step count divides the horizon") {
    CHECK(step_count({0.01, 0.05, Scheme::SemiImplicitEuler, {}, 1e6}) == 5);
    CHECK(step_count({1e-5, 0.1, Scheme::SemiImplicitEuler, {}, 1e6}) == 10000);
    CHECK_THROWS_AS(step_count({0.03, 0.1, Scheme::SemiImplicitEuler, {}, 1e6}),
                    std::invalid_argument);
    CHECK_THROWS_AS(step_count({0.0, 0.1, Scheme::SemiImplicitEuler, {}, 1e6}),
                    std::invalid_argument);
    CHECK_THROWS_AS(step_count({0.01, -1.0, Scheme::SemiImplicitEuler, {}, 1e6}),
                    std::invalid_argument);
    CHECK_THROWS_AS(step_count({0.01, 0.1, Scheme::SemiImplicitEuler, {}, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(step_count({0.2, 0.1, Scheme::SemiImplicitEuler, {}, 1e6}),
                    std::invalid_argument);
}

TEST_CASE("zero is a steady state of both schemes") {
    for (Scheme scheme : {Scheme::SemiImplicitEuler, Scheme::SemiImplicitBdf2}) {
        auto space = make_space(build_mesh(16), 1);
        RunResult res = run_flow(zero_function(space), {0.01, 0.05, scheme, {}, 1e6});
        CHECK(res.trace.status == RunStatus::Completed);
        CHECK(res.trace.records.size() == 6);
        CHECK(res.trace.halt_step == 5);
        CHECK(res.trace.halt_time == doctest::Approx(0.05).epsilon(1e-14));
        for (double c : res.final.coeffs)
            CHECK(c == 0.0);
        for (const FlowRecord& rec : res.trace.records) {
            CHECK(rec.energy == 0.0);
            CHECK(rec.diss_l2 == 0.0);
            CHECK(rec.diss_h1r == 0.0);
        }
    }
}

TEST_CASE("a single step decreases the energy of the bump") {
    FEFunction u0 = bump_state(64, 1);
    StepperConfig cfg{1e-3, 1e-3, Scheme::SemiImplicitEuler, {}, 1e6};
    FlowOperators ops = make_flow_operators(*u0.space, cfg, 0.0, 0.0);
    FEFunction u1 = step_semi_implicit(u0, ops);
    CHECK(energy(u1, ops.cache).total < energy(u0, ops.cache).total);
}

TEST_CASE("per step dissipation identity with the half weight") {
    for (int k : {1, 2}) {
        FEFunction u0 = bump_state(32, k);
        RunResult res = run_flow(u0, {1e-3, 0.05, Scheme::SemiImplicitEuler, {}, 1e6});
        REQUIRE(res.trace.status == RunStatus::Completed);
        double tol = 1e-13 * std::max(1.0, res.trace.records[0].energy);
        for (size_t j = 1; j < res.trace.records.size(); ++j)
            CHECK(half_form_margin(res.trace.records[j], res.trace.records[j - 1]) <= tol);
    }
}

TEST_CASE("energy decreases monotonically for both schemes") {
    std::mt19937_64 rng(211);
    for (Scheme scheme : {Scheme::SemiImplicitEuler, Scheme::SemiImplicitBdf2}) {
        for (int k : {1, 2}) {
            auto space = make_space(build_mesh(32), k);
            std::vector<FEFunction> states;
            states.push_back(bump_state(32, k));
            for (double target : {0.5, 1.2, 1.9})
                states.push_back(
                    rescale_to_energy(random_fe_function(space, rng), target, kBoosted));
            if (scheme == Scheme::SemiImplicitEuler)
                states.push_back(random_fe_function(space, rng));  // raw, large energy
            for (const FEFunction& u0 : states) {
                RunResult res = run_flow(u0, {1e-3, 0.05, scheme, {}, 1e12});
                REQUIRE(res.trace.status == RunStatus::Completed);
                double tol = 1e-10 * std::max(1.0, res.trace.records[0].energy);
                for (size_t j = 1; j < res.trace.records.size(); ++j)
                    CHECK(res.trace.records[j].energy <=
                          res.trace.records[j - 1].energy + tol);
            }
        }
    }
}

TEST_CASE("small initial energy keeps the solution below pi") {
    std::mt19937_64 rng(223);
    for (Scheme scheme : {Scheme::SemiImplicitEuler, Scheme::SemiImplicitBdf2}) {
        auto space = make_space(build_mesh(32), 2);
        for (int trial = 0; trial < 5; ++trial) {
            FEFunction u0 =
                rescale_to_energy(random_fe_function(space, rng), 1.99, AssemblyConfig{});
            RunResult res = run_flow(u0, {1e-3, 0.05, scheme, {}, 1e12});
            REQUIRE(res.trace.status == RunStatus::Completed);
            for (const FlowRecord& rec : res.trace.records)
                CHECK(rec.sup_nodal <= kPi + 1e-8);
        }
    }
}

TEST_CASE("the linearized step contracts both quadratic forms") {
    std::mt19937_64 rng(227);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    auto space = make_space(build_mesh(32), 1);
    BandedSpdMatrix m = assemble_mass_r(*space, resolve_assembly({}, 1));
    BandedSpdMatrix a = assemble_h1r(*space, resolve_assembly({}, 1));
    for (double tau : {1e-2, 1.0}) {
        CholeskyFactor sys = factor(scaled_sum(1.0 / tau, m, 1.0, a));
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> w0(m.size());
            for (double& v : w0)
                v = coef(rng);
            std::vector<double> rhs(m.size());
            m.matvec(w0, rhs);
            for (double& v : rhs)
                v /= tau;
            std::vector<double> w1 = solve(sys, rhs);
            CHECK(m.quadratic_form(w1) <= m.quadratic_form(w0) * (1.0 + 1e-12));
            CHECK(a.quadratic_form(w1) <= a.quadratic_form(w0) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("bdf2 bootstraps with one euler step") {
    FEFunction u0 = bump_state(32, 1);
    StepperConfig one_step{1e-3, 1e-3, Scheme::SemiImplicitBdf2, {}, 1e6};
    RunResult bdf2 = run_flow(u0, one_step);
    CHECK(bdf2.trace.euler_startup_steps == 1);

    one_step.scheme = Scheme::SemiImplicitEuler;
    RunResult euler = run_flow(u0, one_step);
    CHECK(euler.trace.euler_startup_steps == 0);
    CHECK(bdf2.final.coeffs == euler.final.coeffs);
}

TEST_CASE("bdf2 converges at second order in time") {
    FEFunction u0 = bump_state(64, 2);
    const double t_end = 0.02;
    FEFunction ref =
        run_flow(u0, {1.25e-4, t_end, Scheme::SemiImplicitBdf2, {}, 1e12}).final;
    std::vector<double> errors;
    for (double tau : {2e-3, 1e-3, 5e-4}) {
        RunResult res = run_flow(u0, {tau, t_end, Scheme::SemiImplicitBdf2, {}, 1e12});
        errors.push_back(error_between(res.final, ref, kBoosted).err_h1r);
    }
    std::vector<double> orders = eoc(errors);
    for (double o : orders) {
        CHECK(o > 1.7);
        CHECK(o < 2.3);
    }
}

TEST_CASE("euler error halves with the step size") {
    FEFunction u0 = bump_state(64, 2);
    const double t_end = 0.02;
    FEFunction ref =
        run_flow(u0, {2.5e-5, t_end, Scheme::SemiImplicitBdf2, {}, 1e12}).final;
    RunResult coarse = run_flow(u0, {1e-3, t_end, Scheme::SemiImplicitEuler, {}, 1e12});
    RunResult fine = run_flow(u0, {5e-4, t_end, Scheme::SemiImplicitEuler, {}, 1e12});
    double ratio = error_between(coarse.final, ref, kBoosted).err_h1r /
                   error_between(fine.final, ref, kBoosted).err_h1r;
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.5);
}

TEST_CASE("trace fields match a manual re-run") {
    FEFunction u0 = bump_state(16, 1);
    StepperConfig cfg{2e-3, 0.01, Scheme::SemiImplicitEuler, {}, 1e6};
    RunResult res = run_flow(u0, cfg);
    REQUIRE(res.trace.records.size() == 6);

    const FlowRecord& first = res.trace.records[0];
    CHECK(first.step == 0);
    CHECK(first.t == 0.0);
    CHECK(first.diss_l2 == 0.0);
    CHECK(first.diss_h1r == 0.0);

    FlowOperators ops = make_flow_operators(*u0.space, cfg, 0.0, 0.0);
    CHECK(first.energy == energy(u0, ops.cache).total);

    FEFunction state = u0;
    for (int j = 1; j <= 5; ++j) {
        FEFunction next = step_semi_implicit(state, ops);
        const FlowRecord& rec = res.trace.records[j];
        CHECK(rec.step == j);
        CHECK(rec.t == doctest::Approx(j * cfg.tau).epsilon(1e-14));
        CHECK(rec.energy == energy(next, ops.cache).total);

        std::vector<double> delta(u0.space->n_free());
        for (int i = 0; i < u0.space->n_free(); ++i)
            delta[i] = next.coeffs[i + 1] - state.coeffs[i + 1];
        CHECK(rec.diss_l2 == ops.mass.quadratic_form(delta) / cfg.tau);
        CHECK(rec.diss_h1r == ops.h1r.quadratic_form(delta));

        double sup = 0.0;
        for (double c : next.coeffs)
            sup = std::max(sup, std::abs(c));
        CHECK(rec.sup_nodal == sup);

        double grad = 0.0;
        for (double x : ops.cache.first.rule.points)
            grad = std::max(grad, std::abs(evaluate_derivative_in_cell(
                                      next, 0, x * u0.space->mesh.h)));
        CHECK(rec.max_grad_first_cell == doctest::Approx(grad).epsilon(1e-12));

        state = next;
    }
    CHECK(res.final.coeffs == state.coeffs);
}

TEST_CASE("non finite states stop the run as diverged") {
    auto space = make_space(build_mesh(8), 1);
    FEFunction u0 = zero_function(space);
    u0.coeffs[3] = std::numeric_limits<double>::quiet_NaN();
    RunResult res = run_flow(u0, {1e-3, 0.01, Scheme::SemiImplicitEuler, {}, 1e6});
    CHECK(res.trace.status == RunStatus::Diverged);
    CHECK(res.trace.halt_step == 0);
    CHECK(res.trace.halt_time == 0.0);
    CHECK(res.trace.records.size() == 1);
    CHECK(std::isnan(res.final.coeffs[3]));
}

TEST_CASE("gradient monitor halts after the first accepted step") {
    FEFunction u0 = bump_state(16, 1);
    RunResult res = run_flow(u0, {1e-3, 0.05, Scheme::SemiImplicitEuler, {}, 1.0});
    CHECK(res.trace.status == RunStatus::MonitorExceeded);
    // The step-0 record already exceeds the threshold but only accepted steps halt.
    CHECK(res.trace.records[0].max_grad_first_cell > 1.0);
    CHECK(res.trace.halt_step == 1);
    CHECK(res.trace.halt_time == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(res.trace.records.size() == 2);
}

TEST_CASE("inhomogeneous boundary data is frozen through the run") {
    auto space = make_space(build_mesh(32), 2);
    FEFunction u0 = interpolate([](double r) { return 0.3 * r; }, space);
    REQUIRE(u0.coeffs.back() == 0.3);
    for (Scheme scheme : {Scheme::SemiImplicitEuler, Scheme::SemiImplicitBdf2}) {
        RunResult res = run_flow(u0, {1e-3, 0.02, scheme, {}, 1e12});
        CHECK(res.trace.status == RunStatus::Completed);
        CHECK(res.final.coeffs.front() == 0.0);
        CHECK(res.final.coeffs.back() == 0.3);
        for (double c : res.final.coeffs)
            CHECK(std::isfinite(c));
    }

    FlowOperators lifted = make_flow_operators(*space, {1e-3, 0.02}, 0.0, 0.3);
    double coupling_norm = 0.0;
    for (double c : lifted.boundary_coupling)
        coupling_norm = std::max(coupling_norm, std::abs(c));
    CHECK(coupling_norm > 0.0);

    FlowOperators homogeneous = make_flow_operators(*space, {1e-3, 0.02}, 0.0, 0.0);
    for (double c : homogeneous.boundary_coupling)
        CHECK(c == 0.0);
}
