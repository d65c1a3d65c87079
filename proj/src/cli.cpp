#include <deterrence/cli.hpp>

#include <deterrence/estimation.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

namespace deterrence::cli {

namespace {

void emit(const Json& report, const std::string& out_dir, const std::string& name) {
    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (out_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream f(std::filesystem::path(out_dir) / (name + ".json"), std::ios::binary);
    if (!f) throw ValidationError("cannot write report into " + out_dir);
    f << text;
}

int fail(int code, const std::string& kind, const std::string& message) {
    Json j{{"schema_version", kSchemaVersion}, {"status", kind}, {"error", message}};
    std::cout << j.dump(2) << "\n";
    std::cerr << "error: " << message << "\n";
    return code;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Welfare model of fines and delayed imprisonment: survey fitting, welfare evaluation, "
                 "optimisation, phase sweeps and agent simulation"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool strict = false;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--out", out_dir, "output directory for reports and CSV tables");
    app.add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
    app.add_flag("--strict", strict, "exit 3 on degenerate or phase-failure results");

    std::string survey_input;
    auto* fit = app.add_subcommand("fit-survey", "estimate discount, weighting and harshness parameters");
    fit->add_option("--input", survey_input, "survey CSV (overrides survey.input)");
    auto* eval = app.add_subcommand("eval-welfare", "welfare in all three tiers");
    auto* opt = app.add_subcommand("optimize", "reduced (v, p) optimum and implied raw strategy");
    auto* sweep = app.add_subcommand("phase-sweep", "finite-kappa0 argmax over an (r, f) grid");
    auto* sim = app.add_subcommand("simulate", "agent simulation against the analytic welfare");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        RunConfig cfg = config_path.empty() ? parse_config(Json{{"schema_version", kSchemaVersion}})
                                            : load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        cfg.strict = cfg.strict || strict;

        CommandResult res;
        std::string name;
        if (fit->parsed()) {
            res = cmd_fit_survey(cfg, survey_input, out_dir);
            name = "fit_report";
            std::cout << res.report.dump(2) << "\n";  // fit-survey writes its own report file
            return res.exit_code;
        }
        if (eval->parsed()) {
            res = cmd_eval_welfare(cfg);
            name = "eval_welfare";
        } else if (opt->parsed()) {
            res = cmd_optimize(cfg);
            name = "optimize";
        } else if (sweep->parsed()) {
            res = cmd_phase_sweep(cfg, out_dir);
            name = "phase_sweep";
        } else if (sim->parsed()) {
            res = cmd_simulate(cfg);
            name = "simulate";
        }
        emit(res.report, out_dir, name);
        return res.exit_code;
    } catch (const ValidationError& e) {
        return fail(kExitValidation, "invalid", e.what());
    } catch (const DomainError& e) {
        return fail(kExitValidation, "invalid", e.what());
    } catch (const FormatError& e) {
        return fail(kExitValidation, "invalid", e.what());
    } catch (const DegenerateStrategy& e) {
        return fail(strict ? kExitResult : kExitOk, "degenerate", e.what());
    } catch (const std::exception& e) {
        return fail(1, "internal-error", e.what());
    }
}

}  // namespace deterrence::cli
