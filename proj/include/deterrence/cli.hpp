#ifndef DETERRENCE_CLI_HPP
#define DETERRENCE_CLI_HPP

// Command layer: JSON run configuration and the five pipeline verbs.
// Implemented in src/, linked as deterrence_cli.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "behavior.hpp"
#include "distributions.hpp"
#include "simulator.hpp"
#include "welfare.hpp"

namespace deterrence::cli {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitResult = 3;

// Bad configuration or input; maps to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimulationOptions {
    std::size_t n_agents = 100000;
    double delta_t = 1.0;
    double lambda_rate = 1e-5;
    GammaMode gamma_mode = GammaMode::shared_mean;
    std::optional<double> burglary_gain;
};

struct OptimizeOptions {
    std::optional<double> r;
    double kappa0 = 40.0;  // finite kappa0 at which the raw strategy is reported
};

// Ranges default to multiples of the analytic thresholds: r over
// [0.5, 3] x (b - s) beta / 2 and f over [1, 4] x the smallest feasible fine.
struct PhaseOptions {
    double p = 1.0;
    std::optional<double> r_min, r_max, f_min, f_max;
    int r_points = 20;
    int f_points = 20;
    double kappa_max = 60.0;
    int kappa_points = 120;
};

struct SurveyOptions {
    std::string input;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 0;
    int threads = 1;
    bool strict = false;  // degenerate and phase-failure results exit 3
    PopulationModel population;
    CrimeParams crime;
    CostParams costs;
    std::optional<PenalStrategy> strategy;
    std::optional<StrategyTargets> targets;
    SimulationOptions simulation;
    OptimizeOptions optimize;
    PhaseOptions phase_sweep;
    SurveyOptions survey;
};

// Throws ValidationError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::string& path);
Json to_json(const RunConfig& c);

struct CommandResult {
    Json report;       // always carries schema_version and the resolved config
    int exit_code = kExitOk;
};

// Commands with file output write into out_dir when it is non-empty.
CommandResult cmd_fit_survey(const RunConfig& c, const std::string& input, const std::string& out_dir);
CommandResult cmd_eval_welfare(const RunConfig& c);
CommandResult cmd_optimize(const RunConfig& c);
CommandResult cmd_phase_sweep(const RunConfig& c, const std::string& out_dir);
CommandResult cmd_simulate(const RunConfig& c);

int run_cli(int argc, char** argv);

}  // namespace deterrence::cli

#endif
