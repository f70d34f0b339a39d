#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmhf/study.hpp"

namespace {

using hmhf::StudyConfig;

struct CliState {
    StudyConfig cfg;
    std::string cells = "64";
    std::string taus = "0.001";
    std::string u0 = "poly";
    std::string u0_file;
    std::string scheme = "euler";
    std::string ref_scheme;
    std::string init = "interp";
    std::string format = "csv";
    bool no_ref_check = false;
};

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": bad integer '" + item + "'");
        }
        if (pos != item.size())
            throw std::invalid_argument(std::string(what) + ": bad integer '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": bad number '" + item + "'");
        }
        if (pos != item.size())
            throw std::invalid_argument(std::string(what) + ": bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

void parse_u0(const std::string& spec, StudyConfig& cfg) {
    std::string name = spec;
    std::string amp;
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        name = spec.substr(0, colon);
        amp = spec.substr(colon + 1);
    }
    if (name == "poly") {
        cfg.u0_preset = hmhf::U0Preset::PolyBump;
    } else if (name == "linear") {
        cfg.u0_preset = hmhf::U0Preset::Linear;
    } else if (name == "random") {
        cfg.u0_preset = hmhf::U0Preset::Random;
        cfg.u0_amplitude = 1.0;  // default target energy
    } else if (name == "custom") {
        cfg.u0_preset = hmhf::U0Preset::Custom;
    } else {
        throw std::invalid_argument("--u0: unknown preset '" + name + "'");
    }
    if (!amp.empty()) {
        size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(amp, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("--u0: bad amplitude '" + amp + "'");
        }
        if (pos != amp.size())
            throw std::invalid_argument("--u0: bad amplitude '" + amp + "'");
        cfg.u0_amplitude = v;
    }
}

hmhf::Scheme parse_scheme(const std::string& name) {
    if (name == "euler")
        return hmhf::Scheme::SemiImplicitEuler;
    if (name == "bdf2")
        return hmhf::Scheme::SemiImplicitBdf2;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

/// Splices the config file's key=value pairs in right after the subcommand,
/// so later command-line flags override them.
std::vector<std::string> splice_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& subcommands) {
    std::string config_path;
    std::vector<std::string> stripped;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw std::invalid_argument("--config expects a path");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            stripped.push_back(args[i]);
        }
    }
    if (config_path.empty())
        return stripped;

    std::vector<std::string> expanded = hmhf::config_file_to_args(config_path);
    std::vector<std::string> out;
    bool spliced = false;
    for (const auto& a : stripped) {
        out.push_back(a);
        if (!spliced &&
            std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end()) {
            out.insert(out.end(), expanded.begin(), expanded.end());
            spliced = true;
        }
    }
    if (!spliced)
        throw std::invalid_argument("--config requires an experiment subcommand");
    return out;
}

void add_options(CLI::App* sub, CliState& s) {
    auto opt = [](CLI::Option* o) { o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); };
    opt(sub->add_option("--degree", s.cfg.degree, "Polynomial degree (1 or 2)"));
    opt(sub->add_option("--cells", s.cells, "Cell count or comma list"));
    opt(sub->add_option("--tau", s.taus, "Time step or comma list"));
    opt(sub->add_option("--t-end", s.cfg.t_end, "Final time"));
    opt(sub->add_option("--u0", s.u0, "Initial data: poly|linear|random|custom[:amplitude]"));
    opt(sub->add_option("--u0-file", s.u0_file, "Solution dump for --u0 custom"));
    opt(sub->add_option("--ref-cells", s.cfg.ref_cells, "Reference mesh cells"));
    opt(sub->add_option("--ref-degree", s.cfg.ref_degree, "Reference polynomial degree"));
    opt(sub->add_option("--ref-tau", s.cfg.ref_tau, "Reference time step (0 = auto)"));
    opt(sub->add_option("--ref-scheme", s.ref_scheme, "Reference scheme: euler|bdf2"));
    sub->add_flag("--no-ref-check", s.no_ref_check, "Skip the reference cross-check");
    opt(sub->add_option("--scheme", s.scheme, "Time scheme: euler|bdf2"));
    opt(sub->add_option("--init", s.init, "Initial data transfer: interp|project"));
    opt(sub->add_option("--quad-bulk", s.cfg.assembly.quad_points_bulk,
                        "Gauss points per bulk cell (0 = default)"));
    opt(sub->add_option("--quad-first", s.cfg.assembly.quad_points_first_cell,
                        "Gauss points on the first cell (0 = default)"));
    opt(sub->add_option("--monitor-threshold", s.cfg.monitor_threshold,
                        "Gradient monitor threshold"));
    opt(sub->add_option("--out", s.cfg.out_path, "Output path (default stdout)"));
    opt(sub->add_option("--seed", s.cfg.seed, "Seed for randomized initial data"));
    opt(sub->add_option("--format", s.format, "Output format: csv|json"));
    opt(sub->add_option("--n-radial", s.cfg.lift_radial, "Lift: radial samples"));
    opt(sub->add_option("--n-angular", s.cfg.lift_angular, "Lift: angular samples"));
    sub->add_option("--config", "Key=value config file (expanded before parsing)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite element solver for the corotational harmonic map heat flow"};
    app.require_subcommand(0, 1);

    CliState s;
    const std::vector<std::string> names = {"solve",        "converge-space",
                                            "converge-time", "energy-trace",
                                            "blowup",        "project-test",
                                            "lift"};
    const std::vector<hmhf::Experiment> experiments = {
        hmhf::Experiment::Solve,        hmhf::Experiment::ConvergeSpace,
        hmhf::Experiment::ConvergeTime, hmhf::Experiment::EnergyTrace,
        hmhf::Experiment::Blowup,       hmhf::Experiment::ProjectTest,
        hmhf::Experiment::Lift};
    std::vector<CLI::App*> subs;
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        add_options(sub, s);
        subs.push_back(sub);
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> final_args;
    try {
        final_args = splice_config(args, names);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& a : final_args)
        cargs.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    int which = -1;
    for (size_t i = 0; i < subs.size(); ++i)
        if (app.got_subcommand(subs[i]))
            which = static_cast<int>(i);
    if (which < 0) {
        std::cerr << app.help();
        return 3;
    }

    hmhf::StudyOutcome outcome;
    try {
        s.cfg.experiment = experiments[which];
        s.cfg.cells = parse_int_list(s.cells, "--cells");
        s.cfg.taus = parse_double_list(s.taus, "--tau");
        parse_u0(s.u0, s.cfg);
        if (!s.u0_file.empty())
            s.cfg.u0_path = s.u0_file;
        s.cfg.scheme = parse_scheme(s.scheme);
        if (!s.ref_scheme.empty())
            s.cfg.ref_scheme = parse_scheme(s.ref_scheme);
        s.cfg.ref_check = !s.no_ref_check;
        if (s.init == "interp")
            s.cfg.init = hmhf::InitMode::Interpolate;
        else if (s.init == "project")
            s.cfg.init = hmhf::InitMode::Project;
        else
            throw std::invalid_argument("--init must be interp or project");
        if (s.format == "csv")
            s.cfg.format = hmhf::OutputFormat::Csv;
        else if (s.format == "json")
            s.cfg.format = hmhf::OutputFormat::Json;
        else
            throw std::invalid_argument("--format must be csv or json");

        outcome = hmhf::run_study(s.cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    if (!outcome.verdict.empty())
        std::cerr << "verdict: " << outcome.verdict << '\n';
    for (const auto& w : outcome.warnings)
        std::cerr << "warning: " << w << '\n';

    if (s.cfg.out_path.empty()) {
        std::cout << outcome.payload;
    } else {
        std::ofstream out(s.cfg.out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << s.cfg.out_path << '\n';
            return 3;
        }
        out << outcome.payload;
    }
    return outcome.exit_code;
}
