// Command-line harness for the receding-horizon LQ control library.
//
// Subcommands: dare, synthesize, evaluate, bound, sweep, identify, adaptive.
// Each reads an optional JSON config (strict schema, see README) and writes
// CSV or JSON to --out (stdout when omitted). Exit codes: 0 success,
// 2 config/schema error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rhc/harness/config.hpp"
#include "rhc/harness/experiments.hpp"
#include "rhc/rhc.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config");
    cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
    cmd->add_option("--out", flags.out, "output path (default: stdout)");
    cmd->add_option("--format", flags.format, "csv|json (overrides config)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--jobs", flags.jobs, "parallelism level (results are identical at any level)")
        ->check(CLI::PositiveNumber);
}

rhc::harness::ExperimentConfig load(const CommonFlags& flags, rhc::harness::Kind kind) {
    using rhc::harness::ExperimentConfig;
    ExperimentConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = rhc::harness::parse_config_file(flags.config_path);
        if (cfg.kind != kind)
            throw rhc::ConfigError(std::string("config kind '") + rhc::harness::kind_name(cfg.kind) +
                                   "' does not match the subcommand");
    } else {
        cfg.kind = kind;
    }
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.out) cfg.out = *flags.out;
    if (flags.format) cfg.format = *flags.format == "json" ? rhc::harness::Format::Json
                                                           : rhc::harness::Format::Csv;
    if (flags.jobs) cfg.jobs = *flags.jobs;
    return cfg;
}

void deliver(const rhc::harness::ExperimentConfig& cfg, const std::string& csv,
             const nlohmann::json& json) {
    std::string payload;
    if (cfg.format == rhc::harness::Format::Csv)
        payload = csv;
    else
        payload = json.dump(2) + "\n";
    if (cfg.out.empty())
        std::cout << payload;
    else
        rhc::harness::write_file(cfg.out, payload);
}

int dispatch(const CommonFlags& flags, rhc::harness::Kind kind) {
    using namespace rhc::harness;
    const ExperimentConfig cfg = load(flags, kind);
    const rhc::LinearSystem sys = cfg.resolved_system();
    const rhc::CostSpec cost = cfg.resolved_cost();
    switch (kind) {
        case Kind::Dare: {
            const DareResult r = run_dare(sys, cost, cfg.dare);
            deliver(cfg, to_csv(r), to_json(r));
            break;
        }
        case Kind::Synthesize: {
            const SynthesizeResult r = run_synthesize(sys, cost, cfg.synthesize);
            deliver(cfg, to_csv(r), to_json(r));
            break;
        }
        case Kind::Evaluate: {
            const rhc::PerformanceReport r = run_evaluate(sys, cost, cfg.evaluate);
            deliver(cfg, to_csv(r), to_json(r));
            break;
        }
        case Kind::Bound: {
            const BoundSurvey r = run_bound(sys, cost, cfg.bound);
            deliver(cfg, to_csv(r), to_json(r));
            break;
        }
        case Kind::Sweep: {
            const SweepResult r = run_sweep(sys, cost, cfg.sweep, cfg.seed, cfg.jobs);
            deliver(cfg, to_csv(r), to_json(r));
            break;
        }
        case Kind::Identify: {
            const IdentifyResult r = run_identify(sys, cfg.identify, cfg.seed, cfg.jobs);
            deliver(cfg, to_csv(r), to_json(r));
            break;
        }
        case Kind::Adaptive: {
            const AdaptiveExperimentResult r =
                run_adaptive_experiment(sys, cost, cfg.adaptive, cfg.seed, cfg.jobs);
            deliver(cfg, to_csv(r), to_json(r));
            break;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Receding-horizon LQ control experiments"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        rhc::harness::Kind kind;
    };
    const Entry entries[] = {
        {"dare", "solve the Riccati fixed point and optimal gain", rhc::harness::Kind::Dare},
        {"synthesize", "compute the N-step receding-horizon gain", rhc::harness::Kind::Synthesize},
        {"evaluate", "closed-loop performance of a gain on the true system",
         rhc::harness::Kind::Evaluate},
        {"bound", "evaluate the performance-gap bounds over a horizon grid",
         rhc::harness::Kind::Bound},
        {"sweep", "perturbed-model x horizon performance-gap study", rhc::harness::Kind::Sweep},
        {"identify", "least-squares error scaling over rollout counts",
         rhc::harness::Kind::Identify},
        {"adaptive", "epoch-doubling adaptive control with regret accounting",
         rhc::harness::Kind::Adaptive},
    };

    CommonFlags flags[std::size(entries)];
    for (std::size_t i = 0; i < std::size(entries); ++i)
        add_common(app.add_subcommand(entries[i].name, entries[i].help), flags[i]);

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < std::size(entries); ++i) {
        if (!app.get_subcommand(entries[i].name)->parsed()) continue;
        try {
            return dispatch(flags[i], entries[i].kind);
        } catch (const rhc::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 3;
        }
    }
    return 2;
}
