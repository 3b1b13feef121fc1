#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyfsi/config.hpp"
#include "polyfsi/errors.hpp"
#include "polyfsi/presets.hpp"
#include "polyfsi/suite.hpp"

namespace {

const char* category_of(polyfsi::ExitCode c) {
    switch (c) {
        case polyfsi::ExitCode::ok:
            return "ok";
        case polyfsi::ExitCode::inequality_violated:
            return "inequality";
        case polyfsi::ExitCode::config_error:
            return "config";
        case polyfsi::ExitCode::solver_diverged:
            return "solver";
        case polyfsi::ExitCode::admissibility_termination:
            return "admissibility";
    }
    return "internal";
}

struct RunOptions {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
};

polyfsi::RunConfig make_config(const RunOptions& opt) {
    polyfsi::RunConfig cfg;
    if (!opt.preset.empty()) cfg = polyfsi::preset_config(opt.preset);
    if (!opt.config_path.empty()) cfg.load_file(opt.config_path);
    for (const std::string& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw polyfsi::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void add_run_options(CLI::App* cmd, RunOptions& opt, bool config_required) {
    cmd->add_option("config", opt.config_path, "configuration file (sectioned key=value)")
        ->required(config_required);
    cmd->add_option("--preset", opt.preset, "start from a named scenario preset");
    cmd->add_option("--set", opt.overrides, "override one configuration key (key=value)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polyfsi: dilute polymer fluid in a flexible-boundary slab"};
    app.require_subcommand(1);
    std::string help_footer =
        "Configuration keys (defaults in brackets):\n" + polyfsi::RunConfig().help_text();
    app.footer(help_footer);

    RunOptions sim_opt, fpk_opt, shell_opt, sweep_opt;
    CLI::App* sim = app.add_subcommand("simulate", "full coupled run of a scenario config");
    add_run_options(sim, sim_opt, false);
    CLI::App* fpk = app.add_subcommand(
        "fpk", "configuration/number density run under a prescribed shear, fixed domain");
    add_run_options(fpk, fpk_opt, false);
    CLI::App* shl = app.add_subcommand("shell", "elastic shell dynamics alone");
    add_run_options(shl, shell_opt, false);
    CLI::App* swp = app.add_subcommand("sweep-rho", "regularization refinement study");
    add_run_options(swp, sweep_opt, false);

    std::string suite_kind = "fast";
    CLI::App* val = app.add_subcommand("validate", "run the validation suite");
    val->add_option("--suite", suite_kind, "fast or full")
        ->check(CLI::IsMember({"fast", "full"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const polyfsi::RunConfig cfg = make_config(sim_opt);
            return polyfsi::run_scenario(cfg, std::cout);
        }
        if (fpk->parsed()) {
            const polyfsi::RunConfig cfg = make_config(fpk_opt);
            const polyfsi::FpkRunResult r = polyfsi::run_fpk(cfg, true);
            std::cout << "entropy slack " << polyfsi::format_full(r.entropy_slack)
                      << ", min psi " << polyfsi::format_full(r.min_psi_all) << ", mass drift "
                      << polyfsi::format_full(r.mass_drift) << ", outputs in " << r.out_dir
                      << "\n";
            return (r.entropy_slack <= 1e-3 && r.min_psi_all >= -1e-8)
                       ? static_cast<int>(polyfsi::ExitCode::ok)
                       : static_cast<int>(polyfsi::ExitCode::inequality_violated);
        }
        if (shl->parsed()) {
            const polyfsi::RunConfig cfg = make_config(shell_opt);
            const polyfsi::ShellRunResult r = polyfsi::run_shell(cfg, true);
            std::cout << "final total shell energy " << polyfsi::format_full(r.total.back())
                      << ", outputs in " << r.out_dir << "\n";
            return static_cast<int>(polyfsi::ExitCode::ok);
        }
        if (swp->parsed()) {
            const polyfsi::RunConfig cfg = make_config(sweep_opt);
            const polyfsi::SweepResult r = polyfsi::run_sweep_rho(cfg, true);
            std::cout << "cauchy monotone " << (r.report.cauchy_monotone ? "yes" : "no")
                      << ", regularizer drops " << (r.report.reg_drops ? "yes" : "no")
                      << ", outputs in " << r.out_dir << "\n";
            return static_cast<int>(polyfsi::ExitCode::ok);
        }
        if (val->parsed()) {
            const bool ok = polyfsi::run_validation(suite_kind == "full", std::cout);
            return ok ? static_cast<int>(polyfsi::ExitCode::ok)
                      : static_cast<int>(polyfsi::ExitCode::inequality_violated);
        }
    } catch (const polyfsi::Error& e) {
        std::cerr << "error: " << category_of(e.code) << ": " << e.what() << "\n";
        return static_cast<int>(e.code);
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return static_cast<int>(polyfsi::ExitCode::solver_diverged);
    }
    return static_cast<int>(polyfsi::ExitCode::config_error);
}
