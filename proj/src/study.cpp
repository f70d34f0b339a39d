#include "hmhf/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hmhf {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int x) {
    return x > 0 && (x & (x - 1)) == 0;
}

std::string scheme_name(Scheme s) {
    return s == Scheme::SemiImplicitEuler ? "euler" : "bdf2";
}

/// null for non-finite values so the emitted JSON stays valid.
std::string json_num(double x) {
    if (!std::isfinite(x))
        return "null";
    return fmt17(x);
}

struct ConvRow {
    int level = 0;
    double h = 0.0;
    double tau = 0.0;
    double err_l2r = 0.0;
    double err_h1r = 0.0;
    bool ok = false;
    std::optional<double> eoc_l2r;
    std::optional<double> eoc_h1r;
};

void fill_eoc(std::vector<ConvRow>& rows) {
    for (size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i].ok || !rows[i - 1].ok)
            continue;
        if (rows[i - 1].err_l2r > 0.0 && rows[i].err_l2r > 0.0)
            rows[i].eoc_l2r = std::log2(rows[i - 1].err_l2r / rows[i].err_l2r);
        if (rows[i - 1].err_h1r > 0.0 && rows[i].err_h1r > 0.0)
            rows[i].eoc_h1r = std::log2(rows[i - 1].err_h1r / rows[i].err_h1r);
    }
}

std::string emit_convergence(const std::vector<ConvRow>& rows, OutputFormat format) {
    std::string out;
    if (format == OutputFormat::Csv) {
        out = "level,h,tau,err_l2r,eoc_l2r,err_h1r,eoc_h1r\n";
        for (const auto& r : rows) {
            out += std::to_string(r.level) + ',' + fmt17(r.h) + ',' + fmt17(r.tau) + ',';
            out += (r.ok ? fmt17(r.err_l2r) : "nan") + std::string(",");
            out += r.eoc_l2r ? fmt17(*r.eoc_l2r) : "";
            out += ',';
            out += (r.ok ? fmt17(r.err_h1r) : "nan") + std::string(",");
            out += r.eoc_h1r ? fmt17(*r.eoc_h1r) : "";
            out += '\n';
        }
        return out;
    }
    out = "[\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out += "  {\"level\": " + std::to_string(r.level) +
               ", \"h\": " + json_num(r.h) + ", \"tau\": " + json_num(r.tau) +
               ", \"err_l2r\": " + (r.ok ? json_num(r.err_l2r) : "null") +
               ", \"eoc_l2r\": " + (r.eoc_l2r ? json_num(*r.eoc_l2r) : "null") +
               ", \"err_h1r\": " + (r.ok ? json_num(r.err_h1r) : "null") +
               ", \"eoc_h1r\": " + (r.eoc_h1r ? json_num(*r.eoc_h1r) : "null") + "}";
        out += (i + 1 < rows.size()) ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

std::string emit_trace(const FlowTrace& trace, OutputFormat format,
                       const std::vector<std::string>& comments) {
    std::string out;
    if (format == OutputFormat::Csv) {
        for (const auto& c : comments)
            out += "# " + c + '\n';
        out += "step,t,energy,diss_l2,diss_h1r,max_grad_first_cell,sup_nodal\n";
        for (const auto& r : trace.records) {
            out += std::to_string(r.step) + ',' + fmt17(r.t) + ',' + fmt17(r.energy) +
                   ',' + fmt17(r.diss_l2) + ',' + fmt17(r.diss_h1r) + ',' +
                   fmt17(r.max_grad_first_cell) + ',' + fmt17(r.sup_nodal) + '\n';
        }
        return out;
    }
    out = "[\n";
    for (size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        out += "  {\"step\": " + std::to_string(r.step) + ", \"t\": " + json_num(r.t) +
               ", \"energy\": " + json_num(r.energy) +
               ", \"diss_l2\": " + json_num(r.diss_l2) +
               ", \"diss_h1r\": " + json_num(r.diss_h1r) +
               ", \"max_grad_first_cell\": " + json_num(r.max_grad_first_cell) +
               ", \"sup_nodal\": " + json_num(r.sup_nodal) + "}";
        out += (i + 1 < trace.records.size()) ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

struct RunSpec {
    int cells = 0;
    int degree = 0;
    double tau = 0.0;
    Scheme scheme = Scheme::SemiImplicitEuler;
};

RunResult execute_run(const StudyConfig& config, const RunSpec& spec) {
    auto space = make_space(build_mesh(spec.cells), spec.degree);
    FEFunction u0 = build_initial_state(config, space);
    StepperConfig stepper{spec.tau, config.t_end, spec.scheme, config.assembly,
                          config.monitor_threshold};
    return run_flow(u0, stepper);
}

void validate_common(const StudyConfig& config) {
    if (config.degree != 1 && config.degree != 2)
        throw std::invalid_argument("StudyConfig: degree must be 1 or 2");
    if (config.cells.empty())
        throw std::invalid_argument("StudyConfig: cells list is empty");
    for (int n : config.cells)
        if (n < 2)
            throw std::invalid_argument("StudyConfig: cell counts must be >= 2");
    if (config.taus.empty())
        throw std::invalid_argument("StudyConfig: tau list is empty");
    for (double t : config.taus)
        if (!(t > 0.0) || !std::isfinite(t))
            throw std::invalid_argument("StudyConfig: tau values must be positive");
    if (!(config.t_end > 0.0) || !std::isfinite(config.t_end))
        throw std::invalid_argument("StudyConfig: t_end must be positive");
    resolve_assembly(config.assembly, config.degree);
    if (!(config.monitor_threshold > 0.0))
        throw std::invalid_argument("StudyConfig: monitor_threshold must be positive");
    if (!std::isfinite(config.u0_amplitude))
        throw std::invalid_argument("StudyConfig: u0 amplitude must be finite");
    // Every run must hit t_end exactly.
    for (double t : config.taus)
        step_count({t, config.t_end, config.scheme, {}, config.monitor_threshold});
}

void require_single_run(const StudyConfig& config) {
    if (config.cells.size() != 1 || config.taus.size() != 1)
        throw std::invalid_argument(
            "StudyConfig: this experiment takes a single cells and tau value");
}

void validate_dyadic_cells(const std::vector<int>& cells) {
    if (cells.size() < 2)
        throw std::invalid_argument("converge-space: need at least two mesh levels");
    for (size_t i = 1; i < cells.size(); ++i)
        if (cells[i] != 2 * cells[i - 1])
            throw std::invalid_argument("converge-space: cell counts must double per level");
}

void validate_halving_taus(const std::vector<double>& taus) {
    if (taus.size() < 2)
        throw std::invalid_argument("converge-time: need at least two tau levels");
    for (size_t i = 1; i < taus.size(); ++i)
        if (std::abs(taus[i - 1] - 2.0 * taus[i]) > 1e-12 * taus[i - 1])
            throw std::invalid_argument("converge-time: tau must halve per level");
}

/// Reference validation: rerun with the other scheme and warn when the two
/// reference solutions differ by more than 10x the finest study error.
void cross_check_reference(const StudyConfig& config, const RunSpec& ref_spec,
                           const RunResult& ref, const std::vector<ConvRow>& rows,
                           std::vector<std::string>& warnings) {
    if (!config.ref_check)
        return;
    RunSpec cross = ref_spec;
    cross.scheme = ref_spec.scheme == Scheme::SemiImplicitEuler
                       ? Scheme::SemiImplicitBdf2
                       : Scheme::SemiImplicitEuler;
    RunResult other = execute_run(config, cross);
    if (other.trace.status == RunStatus::Diverged) {
        warnings.push_back("reference cross-check run (" + scheme_name(cross.scheme) +
                           ") diverged");
        return;
    }
    AssemblyConfig acfg = resolve_assembly(config.assembly, ref_spec.degree);
    ErrorReport gap = error_between(ref.final, other.final, acfg);
    double finest_l2r = 0.0, finest_h1r = 0.0;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (it->ok) {
            finest_l2r = it->err_l2r;
            finest_h1r = it->err_h1r;
            break;
        }
    }
    if (finest_l2r > 0.0 && gap.err_l2r > 10.0 * finest_l2r)
        warnings.push_back("reference schemes disagree in L2_r by " + fmt17(gap.err_l2r) +
                           ", more than 10x the finest study error " + fmt17(finest_l2r));
    if (finest_h1r > 0.0 && gap.err_h1r > 10.0 * finest_h1r)
        warnings.push_back("reference schemes disagree in H1_r by " + fmt17(gap.err_h1r) +
                           ", more than 10x the finest study error " + fmt17(finest_h1r));
}

StudyOutcome study_converge_space(const StudyConfig& config) {
    validate_dyadic_cells(config.cells);
    if (config.taus.size() != 1)
        throw std::invalid_argument("converge-space: exactly one tau is required");
    if (config.u0_preset == U0Preset::Random)
        throw std::invalid_argument("converge-space: random initial data is not comparable across meshes");
    const int finest = config.cells.back();
    if (config.ref_cells < finest || config.ref_cells % finest != 0 ||
        !is_pow2(config.ref_cells / finest))
        throw std::invalid_argument(
            "converge-space: ref_cells must be a dyadic multiple of the finest level");
    if (config.ref_degree != 1 && config.ref_degree != 2)
        throw std::invalid_argument("converge-space: ref_degree must be 1 or 2");
    const double tau = config.taus[0];
    double ref_tau = config.ref_tau > 0.0 ? config.ref_tau : tau;
    step_count({ref_tau, config.t_end, config.scheme, {}, config.monitor_threshold});
    Scheme ref_scheme = config.ref_scheme.value_or(config.scheme);

    StudyOutcome outcome;
    if (config.ref_cells < 8 * finest)
        outcome.warnings.push_back("ref_cells is less than 8x the finest study mesh");

    RunSpec ref_spec{config.ref_cells, config.ref_degree, ref_tau, ref_scheme};
    RunResult ref = execute_run(config, ref_spec);

    std::vector<ConvRow> rows;
    bool any_diverged = false;
    if (ref.trace.status == RunStatus::Diverged) {
        outcome.warnings.push_back("reference run diverged; no errors computed");
        any_diverged = true;
        for (size_t i = 0; i < config.cells.size(); ++i)
            rows.push_back({static_cast<int>(i), 1.0 / config.cells[i], tau,
                            0.0, 0.0, false, {}, {}});
    } else {
        AssemblyConfig ref_acfg = resolve_assembly(config.assembly, config.ref_degree);
        for (size_t i = 0; i < config.cells.size(); ++i) {
            RunSpec spec{config.cells[i], config.degree, tau, config.scheme};
            RunResult run = execute_run(config, spec);
            ConvRow row{static_cast<int>(i), 1.0 / config.cells[i], tau,
                        0.0, 0.0, false, {}, {}};
            if (run.trace.status == RunStatus::Diverged) {
                any_diverged = true;
                outcome.warnings.push_back("study run at cells=" +
                                           std::to_string(config.cells[i]) + " diverged");
            } else {
                ErrorReport err = error_between(run.final, ref.final, ref_acfg);
                row.err_l2r = err.err_l2r;
                row.err_h1r = err.err_h1r;
                row.ok = true;
            }
            rows.push_back(row);
        }
        fill_eoc(rows);
        cross_check_reference(config, ref_spec, ref, rows, outcome.warnings);
    }

    outcome.payload = emit_convergence(rows, config.format);
    outcome.exit_code = any_diverged ? 2 : 0;
    return outcome;
}

StudyOutcome study_converge_time(const StudyConfig& config) {
    validate_halving_taus(config.taus);
    if (config.cells.size() != 1)
        throw std::invalid_argument("converge-time: exactly one cells value is required");
    if (config.u0_preset == U0Preset::Random)
        throw std::invalid_argument("converge-time: random initial data is not reproducible across runs");
    const int n_cells = config.cells[0];
    double ref_tau = config.ref_tau > 0.0 ? config.ref_tau : config.taus.back() / 8.0;
    if (!(ref_tau < config.taus.back()))
        throw std::invalid_argument("converge-time: ref_tau must be below the smallest tau");
    step_count({ref_tau, config.t_end, config.scheme, {}, config.monitor_threshold});
    Scheme ref_scheme = config.ref_scheme.value_or(Scheme::SemiImplicitBdf2);

    StudyOutcome outcome;
    if (ref_tau > config.taus.back() / 4.0)
        outcome.warnings.push_back("ref_tau is less than 4x below the smallest study tau");

    RunSpec ref_spec{n_cells, config.degree, ref_tau, ref_scheme};
    RunResult ref = execute_run(config, ref_spec);

    std::vector<ConvRow> rows;
    bool any_diverged = false;
    const double h = 1.0 / n_cells;
    if (ref.trace.status == RunStatus::Diverged) {
        outcome.warnings.push_back("reference run diverged; no errors computed");
        any_diverged = true;
        for (size_t i = 0; i < config.taus.size(); ++i)
            rows.push_back({static_cast<int>(i), h, config.taus[i], 0.0, 0.0, false, {}, {}});
    } else {
        AssemblyConfig acfg = resolve_assembly(config.assembly, config.degree);
        for (size_t i = 0; i < config.taus.size(); ++i) {
            RunSpec spec{n_cells, config.degree, config.taus[i], config.scheme};
            RunResult run = execute_run(config, spec);
            ConvRow row{static_cast<int>(i), h, config.taus[i], 0.0, 0.0, false, {}, {}};
            if (run.trace.status == RunStatus::Diverged) {
                any_diverged = true;
                outcome.warnings.push_back("study run at tau=" + fmt17(config.taus[i]) +
                                           " diverged");
            } else {
                ErrorReport err = error_between(run.final, ref.final, acfg);
                row.err_l2r = err.err_l2r;
                row.err_h1r = err.err_h1r;
                row.ok = true;
            }
            rows.push_back(row);
        }
        fill_eoc(rows);
        cross_check_reference(config, ref_spec, ref, rows, outcome.warnings);
    }

    outcome.payload = emit_convergence(rows, config.format);
    outcome.exit_code = any_diverged ? 2 : 0;
    return outcome;
}

std::vector<std::string> trace_comments(const FlowTrace& trace) {
    std::vector<std::string> comments;
    if (trace.euler_startup_steps > 0)
        comments.push_back("euler_startup_steps=" +
                           std::to_string(trace.euler_startup_steps));
    if (trace.status == RunStatus::MonitorExceeded)
        comments.push_back("status=monitor-exceeded halt_step=" +
                           std::to_string(trace.halt_step) +
                           " halt_time=" + fmt17(trace.halt_time));
    if (trace.status == RunStatus::Diverged)
        comments.push_back("status=diverged halt_step=" +
                           std::to_string(trace.halt_step) +
                           " halt_time=" + fmt17(trace.halt_time));
    return comments;
}

StudyOutcome study_energy_trace(const StudyConfig& config) {
    require_single_run(config);
    RunSpec spec{config.cells[0], config.degree, config.taus[0], config.scheme};
    RunResult run = execute_run(config, spec);
    StudyOutcome outcome;
    outcome.payload = emit_trace(run.trace, config.format, trace_comments(run.trace));
    if (run.trace.status == RunStatus::Diverged) {
        outcome.warnings.push_back("run diverged at step " +
                                   std::to_string(run.trace.halt_step + 1));
        outcome.exit_code = 2;
    } else if (run.trace.status == RunStatus::MonitorExceeded) {
        outcome.warnings.push_back("gradient monitor exceeded at t=" +
                                   fmt17(run.trace.halt_time));
    }
    return outcome;
}

StudyOutcome study_blowup(const StudyConfig& config) {
    require_single_run(config);
    if (config.u0_preset != U0Preset::Linear)
        throw std::invalid_argument("blowup: requires the linear initial preset");
    RunSpec spec{config.cells[0], config.degree, config.taus[0], config.scheme};
    RunResult run = execute_run(config, spec);

    StudyOutcome outcome;
    switch (run.trace.status) {
        case RunStatus::MonitorExceeded:
            outcome.verdict = "monitor-exceeded";
            break;
        case RunStatus::Diverged:
            outcome.verdict = "diverged";
            outcome.exit_code = 2;
            break;
        case RunStatus::Completed:
            outcome.verdict = "no-blowup-detected";
            break;
    }
    std::string meta = "verdict=" + outcome.verdict +
                       " halt_step=" + std::to_string(run.trace.halt_step) +
                       " halt_time=" + fmt17(run.trace.halt_time);
    if (config.format == OutputFormat::Csv) {
        std::vector<std::string> comments{meta};
        for (const auto& c : trace_comments(run.trace))
            comments.push_back(c);
        outcome.payload = emit_trace(run.trace, config.format, comments);
    } else {
        std::string rows = emit_trace(run.trace, OutputFormat::Json, {});
        outcome.payload = "{\"verdict\": \"" + outcome.verdict +
                          "\", \"halt_step\": " + std::to_string(run.trace.halt_step) +
                          ", \"halt_time\": " + json_num(run.trace.halt_time) +
                          ", \"rows\": " + rows + "}\n";
    }
    return outcome;
}

StudyOutcome study_solve(const StudyConfig& config) {
    require_single_run(config);
    RunSpec spec{config.cells[0], config.degree, config.taus[0], config.scheme};
    RunResult run = execute_run(config, spec);
    StudyOutcome outcome;
    if (config.format == OutputFormat::Csv) {
        outcome.payload = write_solution_dump(run.final, run.trace.halt_time);
    } else {
        const FESpace& space = *run.final.space;
        std::string rows;
        for (int i = 0; i < space.n_dofs_total(); ++i) {
            rows += "  {\"r\": " + json_num(space.dof_coordinate(i)) +
                    ", \"value\": " + json_num(run.final.coeffs[i]) + "}";
            rows += (i + 1 < space.n_dofs_total()) ? ",\n" : "\n";
        }
        outcome.payload = "{\"degree\": " + std::to_string(space.degree()) +
                          ", \"cells\": " + std::to_string(space.mesh.n_cells) +
                          ", \"t\": " + json_num(run.trace.halt_time) +
                          ", \"rows\": [\n" + rows + "]}\n";
    }
    if (run.trace.status == RunStatus::Diverged) {
        outcome.warnings.push_back("run diverged; dumping last valid state");
        outcome.exit_code = 2;
    } else if (run.trace.status == RunStatus::MonitorExceeded) {
        outcome.warnings.push_back("gradient monitor exceeded at t=" +
                                   fmt17(run.trace.halt_time));
    }
    return outcome;
}

StudyOutcome study_lift(const StudyConfig& config) {
    require_single_run(config);
    if (config.lift_radial < 2 || config.lift_angular < 3)
        throw std::invalid_argument("lift: need at least 2 radial and 3 angular samples");
    RunSpec spec{config.cells[0], config.degree, config.taus[0], config.scheme};
    RunResult run = execute_run(config, spec);

    StudyOutcome outcome;
    std::string csv = "x,y,u1,u2,u3\n";
    std::string json = "[\n";
    const int nr = config.lift_radial;
    const int na = config.lift_angular;
    for (int i = 0; i < nr; ++i) {
        const double r = static_cast<double>(i) / (nr - 1);
        const double u = evaluate(run.final, r);
        const double su = std::sin(u), cu = std::cos(u);
        for (int j = 0; j < na; ++j) {
            const double phi = 2.0 * kPi * j / na;
            const double cp = std::cos(phi), sp = std::sin(phi);
            const double x = r * cp, y = r * sp;
            const double u1 = cp * su, u2 = sp * su;
            if (config.format == OutputFormat::Csv) {
                csv += fmt17(x) + ',' + fmt17(y) + ',' + fmt17(u1) + ',' + fmt17(u2) +
                       ',' + fmt17(cu) + '\n';
            } else {
                json += "  {\"x\": " + json_num(x) + ", \"y\": " + json_num(y) +
                        ", \"u1\": " + json_num(u1) + ", \"u2\": " + json_num(u2) +
                        ", \"u3\": " + json_num(cu) + "}";
                json += (i == nr - 1 && j == na - 1) ? "\n" : ",\n";
            }
        }
    }
    json += "]\n";
    outcome.payload = config.format == OutputFormat::Csv ? csv : json;
    if (run.trace.status == RunStatus::Diverged) {
        outcome.warnings.push_back("run diverged; lifting last valid state");
        outcome.exit_code = 2;
    }
    return outcome;
}

struct ProjectRow {
    std::string preset;
    int level = 0;
    double h = 0.0;
    double err_h1r = 0.0;
    std::optional<double> eoc_h1r;
    double orth_residual = 0.0;
    double stability_ratio = 0.0;
};

StudyOutcome study_project_test(const StudyConfig& config) {
    if (config.cells.size() < 2)
        throw std::invalid_argument("project-test: need at least two mesh levels");
    validate_dyadic_cells(config.cells);

    std::vector<ProjectRow> rows;
    for (const char* preset : {"inspace", "sinr"}) {
        std::vector<double> errs;
        size_t base = rows.size();
        for (size_t i = 0; i < config.cells.size(); ++i) {
            auto space = make_space(build_mesh(config.cells[i]), config.degree);
            AssemblyConfig acfg = resolve_assembly(config.assembly, config.degree);
            ProjectRow row;
            row.preset = preset;
            row.level = static_cast<int>(i);
            row.h = space->mesh.h;
            if (std::string(preset) == "inspace") {
                FEFunction g = interpolate(
                    [](double r) { return kPi * (1.0 - r) * r; }, space);
                ProjectionResult res = galerkin_project_report(g, space, acfg);
                row.err_h1r = error_between(g, res.fn, acfg).err_h1r;
                row.orth_residual = res.orthogonality_residual;
                row.stability_ratio = norm_h1r(res.fn, acfg) / norm_h1r(g, acfg);
            } else {
                ScalarFunction g{
                    [](double r) { return std::sin(kPi * r) * r; },
                    [](double r) { return kPi * std::cos(kPi * r) * r + std::sin(kPi * r); }};
                ProjectionResult res = galerkin_project_report(g, space, acfg);
                row.err_h1r = error_h1r_scalar(g, res.fn, acfg);
                row.orth_residual = res.orthogonality_residual;
                row.stability_ratio =
                    norm_h1r(res.fn, acfg) / norm_h1r_scalar(g, *space, acfg);
            }
            errs.push_back(row.err_h1r);
            rows.push_back(row);
        }
        for (size_t i = 1; i < errs.size(); ++i)
            if (errs[i - 1] > 1e-13 && errs[i] > 1e-13)
                rows[base + i].eoc_h1r = std::log2(errs[i - 1] / errs[i]);
    }

    StudyOutcome outcome;
    if (config.format == OutputFormat::Csv) {
        std::string out = "preset,level,h,err_h1r,eoc_h1r,orth_residual,stability_ratio\n";
        for (const auto& r : rows) {
            out += r.preset + ',' + std::to_string(r.level) + ',' + fmt17(r.h) + ',' +
                   fmt17(r.err_h1r) + ',' + (r.eoc_h1r ? fmt17(*r.eoc_h1r) : "") + ',' +
                   fmt17(r.orth_residual) + ',' + fmt17(r.stability_ratio) + '\n';
        }
        outcome.payload = out;
    } else {
        std::string out = "[\n";
        for (size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            out += "  {\"preset\": \"" + r.preset +
                   "\", \"level\": " + std::to_string(r.level) +
                   ", \"h\": " + json_num(r.h) + ", \"err_h1r\": " + json_num(r.err_h1r) +
                   ", \"eoc_h1r\": " + (r.eoc_h1r ? json_num(*r.eoc_h1r) : "null") +
                   ", \"orth_residual\": " + json_num(r.orth_residual) +
                   ", \"stability_ratio\": " + json_num(r.stability_ratio) + "}";
            out += (i + 1 < rows.size()) ? ",\n" : "\n";
        }
        out += "]\n";
        outcome.payload = out;
    }
    return outcome;
}

}  // namespace

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

FEFunction build_initial_state(const StudyConfig& config,
                               std::shared_ptr<const FESpace> space) {
    AssemblyConfig acfg = resolve_assembly(config.assembly, space->degree());
    const double a = config.u0_amplitude;
    switch (config.u0_preset) {
        case U0Preset::PolyBump: {
            ScalarFunction g{[a](double r) { return a * (1.0 - r) * r; },
                             [a](double r) { return a * (1.0 - 2.0 * r); }};
            return config.init == InitMode::Interpolate
                       ? interpolate(g.value, space)
                       : galerkin_project(g, space, acfg);
        }
        case U0Preset::Linear: {
            if (config.init == InitMode::Project)
                throw std::invalid_argument(
                    "linear preset requires interp init; projection drops the boundary value");
            return interpolate([a](double r) { return a * r; }, space);
        }
        case U0Preset::Random: {
            if (!(a > 0.0) || a > 2.0)
                throw std::invalid_argument(
                    "random preset: amplitude is the target energy, must be in (0,2]");
            std::mt19937_64 rng(config.seed);
            FEFunction v = random_fe_function(space, rng);
            return rescale_to_energy(v, a, acfg);
        }
        case U0Preset::Custom: {
            if (config.u0_path.empty())
                throw std::invalid_argument("custom preset requires --u0-file");
            std::ifstream in(config.u0_path, std::ios::binary);
            if (!in)
                throw std::invalid_argument("cannot read " + config.u0_path);
            std::stringstream ss;
            ss << in.rdbuf();
            SolutionDump dump = read_solution_dump(ss.str());
            if (config.init == InitMode::Interpolate)
                return interpolate(
                    [&](double r) { return evaluate(dump.fn, r); }, space);
            return galerkin_project(dump.fn, space, acfg);
        }
    }
    throw std::invalid_argument("unknown initial preset");
}

StudyOutcome run_study(const StudyConfig& config) {
    validate_common(config);
    switch (config.experiment) {
        case Experiment::Solve:
            return study_solve(config);
        case Experiment::ConvergeSpace:
            return study_converge_space(config);
        case Experiment::ConvergeTime:
            return study_converge_time(config);
        case Experiment::EnergyTrace:
            return study_energy_trace(config);
        case Experiment::Blowup:
            return study_blowup(config);
        case Experiment::ProjectTest:
            return study_project_test(config);
        case Experiment::Lift:
            return study_lift(config);
    }
    throw std::invalid_argument("unknown experiment");
}

std::string write_solution_dump(const FEFunction& fe_fn, double t) {
    const FESpace& space = *fe_fn.space;
    std::string out = "# degree=" + std::to_string(space.degree()) +
                      " cells=" + std::to_string(space.mesh.n_cells) +
                      " t=" + fmt17(t) + '\n';
    for (int i = 0; i < space.n_dofs_total(); ++i)
        out += fmt17(space.dof_coordinate(i)) + ',' + fmt17(fe_fn.coeffs[i]) + '\n';
    return out;
}

SolutionDump read_solution_dump(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("solution dump: empty input");
    int degree = 0, cells = 0;
    double t = 0.0;
    if (std::sscanf(line.c_str(), "# degree=%d cells=%d t=%lf", &degree, &cells, &t) != 3)
        throw std::invalid_argument("solution dump: malformed header");
    if (degree < 1 || degree > 4 || cells < 2)
        throw std::invalid_argument("solution dump: bad degree or cells");

    auto space = make_space(build_mesh(cells), degree);
    FEFunction fn = zero_function(space);
    const int n = space->n_dofs_total();
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw std::invalid_argument("solution dump: truncated data");
        double r = 0.0, v = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &r, &v) != 2)
            throw std::invalid_argument("solution dump: malformed data line");
        if (std::abs(r - space->dof_coordinate(i)) > 1e-12)
            throw std::invalid_argument("solution dump: node grid mismatch");
        if (!std::isfinite(v))
            throw std::invalid_argument("solution dump: non-finite value");
        fn.coeffs[i] = v;
    }
    return {std::move(fn), t};
}

std::vector<std::string> config_file_to_args(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("cannot read config file " + path);
    std::vector<std::string> args;
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        auto last = line.find_last_not_of(" \t\r");
        std::string trimmed = line.substr(first, last - first + 1);
        if (trimmed[0] == '#')
            continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("config file: expected key=value, got: " + trimmed);
        std::string key = trimmed.substr(0, eq);
        std::string value = trimmed.substr(eq + 1);
        auto kend = key.find_last_not_of(" \t");
        key = key.substr(0, kend + 1);
        auto vstart = value.find_first_not_of(" \t");
        value = vstart == std::string::npos ? "" : value.substr(vstart);
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

}  // namespace hmhf
