#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmhf/flow.hpp"

namespace hmhf {

enum class Experiment {
    Solve,
    ConvergeSpace,
    ConvergeTime,
    EnergyTrace,
    Blowup,
    ProjectTest,
    Lift,
};

enum class U0Preset { PolyBump, Linear, Random, Custom };
enum class InitMode { Interpolate, Project };
enum class OutputFormat { Csv, Json };

/// Full description of one experiment. Ladder experiments read the whole
/// cells/taus vectors; single-run experiments require singletons. Zeros in
/// the quadrature config resolve to the per-degree defaults.
struct StudyConfig {
    Experiment experiment = Experiment::Solve;
    int degree = 1;
    std::vector<int> cells = {64};
    std::vector<double> taus = {1e-3};
    double t_end = 0.1;

    U0Preset u0_preset = U0Preset::PolyBump;
    /// Amplitude for poly/linear presets, target energy for random.
    double u0_amplitude = 3.14159265358979312;
    std::string u0_path;  // custom preset: solution dump to load

    int ref_cells = 1024;
    int ref_degree = 2;
    double ref_tau = 0.0;  // 0: study tau (space) or smallest tau / 8 (time)
    std::optional<Scheme> ref_scheme;  // default: study scheme (space), BDF2 (time)
    bool ref_check = true;

    Scheme scheme = Scheme::SemiImplicitEuler;
    InitMode init = InitMode::Interpolate;
    AssemblyConfig assembly{};
    double monitor_threshold = 1e6;
    std::uint64_t seed = 1;
    OutputFormat format = OutputFormat::Csv;
    std::string out_path;  // empty: stdout

    int lift_radial = 33;
    int lift_angular = 64;
};

struct StudyOutcome {
    std::string payload;                 // table / dump, CSV or JSON
    std::vector<std::string> warnings;   // human-oriented diagnostics
    std::string verdict;                 // blowup experiment only
    int exit_code = 0;                   // 0 ok, 2 diverged
};

/// Runs the configured experiment. Invalid configurations throw
/// std::invalid_argument (the CLI maps that to exit code 3).
StudyOutcome run_study(const StudyConfig& config);

/// Initial state for a single run per the u0/init settings.
FEFunction build_initial_state(const StudyConfig& config,
                               std::shared_ptr<const FESpace> space);

/// 17-significant-digit decimal rendering used by all emitters.
std::string fmt17(double x);

/// Solution dump: "# degree=<k> cells=<N> t=<t>" then one "r,value" line per
/// node. read_solution_dump validates the grid and throws on mismatch.
std::string write_solution_dump(const FEFunction& fe_fn, double t);
struct SolutionDump {
    FEFunction fn;
    double t = 0.0;
};
SolutionDump read_solution_dump(const std::string& text);

/// Expands "key=value" lines (blank lines and '#' comments allowed) into
/// "--key value" argv tokens for the CLI.
std::vector<std::string> config_file_to_args(const std::string& path);

}  // namespace hmhf
