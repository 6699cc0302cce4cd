#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhc/errors.hpp"
#include "rhc/harness/emit.hpp"
#include "rhc/types.hpp"

// Experiment configuration: a strict JSON schema (version 1). Unknown fields
// are rejected by name; every scalar has a default so a minimal config is
// just {"schema_version": 1, "kind": "..."}.

namespace rhc::harness {

enum class Kind { Dare, Synthesize, Evaluate, Bound, Sweep, Identify, Adaptive };
enum class Format { Csv, Json };

/// The built-in 2D study system: open-loop unstable, one input, unit noise.
inline LinearSystem default_study_system() {
    MatrixXd A(2, 2);
    A << 1.0, 2.0, 1.0, 0.5;
    MatrixXd B(2, 1);
    B << 1.0, 0.5;
    return LinearSystem(std::move(A), std::move(B), 1.0, 0.0);
}

/// Companion terminal weight used by the sweep study.
inline MatrixXd default_terminal_weight() {
    MatrixXd P(2, 2);
    P << 2.4, 1.2, 1.2, 3.4;
    return P;
}

inline CostSpec identity_cost(Eigen::Index n, Eigen::Index m) {
    return CostSpec(MatrixXd::Identity(n, n), MatrixXd::Identity(m, m));
}

struct DareParams {
    double tol = 1e-12;
    int max_iter = 100000;
};

struct SynthesizeParams {
    int N = 5;
    std::optional<MatrixXd> terminal;  // default: zero terminal weight
    std::optional<LinearSystem> nominal;  // default: the configured system
};

struct EvaluateParams {
    std::optional<MatrixXd> K;  // evaluate this gain directly...
    SynthesizeParams synth;     // ...or synthesize one first
};

struct BoundParams {
    double eps_m = 0.0;
    double eps_p = 0.0;
    std::vector<int> horizons;  // default 1..15
};

struct SweepParams {
    int num_models = 20;
    double perturbation_range = 0.5;
    std::vector<int> horizons;  // default 1..15
    std::optional<MatrixXd> terminal;  // default: the built-in study weight
};

struct IdentifyParams {
    std::vector<long> T_grid = {64, 256, 1024, 4096};
    int num_seeds = 20;
    double sigma_u = 1.0;
    int t_h = 2;
    bool single_trajectory = false;  // fit one length-T rollout on all transitions
};

struct AdaptiveParams {
    std::vector<std::string> modes = {"fixed", "adaptive_log"};
    int fixed_N = 2;
    std::vector<long> T_grid = {16384};
    int num_seeds = 20;
    int k0 = 3;
    double sigma0 = 1.0;
    double sigma_decay = 0.25;
    int max_N = 200;
    bool oracle = false;
    std::optional<double> gamma_bar;  // default: derived from the true system
    std::optional<MatrixXd> K0;       // default: optimal gain of the true system
};

struct ExperimentConfig {
    Kind kind = Kind::Dare;
    std::uint64_t seed = 1;
    std::string out;  // empty: stdout
    Format format = Format::Csv;
    int jobs = 1;
    std::optional<LinearSystem> system;  // default: the built-in study system
    std::optional<CostSpec> cost;        // default: identity weights

    DareParams dare;
    SynthesizeParams synthesize;
    EvaluateParams evaluate;
    BoundParams bound;
    SweepParams sweep;
    IdentifyParams identify;
    AdaptiveParams adaptive;

    LinearSystem resolved_system() const { return system ? *system : default_study_system(); }
    CostSpec resolved_cost() const {
        if (cost) return *cost;
        const LinearSystem sys = resolved_system();
        return identity_cost(sys.n(), sys.m());
    }
};

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& scope,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError("unknown field '" + (scope.empty() ? "" : scope + ".") +
                              item.key() + "'");
    }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback, const std::string& scope) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("field '" + (scope.empty() ? "" : scope + ".") + key +
                          "' has the wrong type");
    }
}

inline std::vector<int> parse_horizons(const nlohmann::json& obj, const char* key,
                                       const std::string& scope) {
    std::vector<int> out;
    if (!obj.contains(key)) {
        for (int i = 1; i <= 15; ++i) out.push_back(i);
        return out;
    }
    const auto& h = obj.at(key);
    if (h.is_array()) {
        for (const auto& v : h) {
            if (!v.is_number_integer() || v.get<int>() < 1)
                throw ConfigError("field '" + scope + "." + key + "' entries must be integers >= 1");
            out.push_back(v.get<int>());
        }
    } else if (h.is_object()) {
        require_keys(h, scope + "." + key, {"from", "to"});
        const int from = get_or<int>(h, "from", 1, scope);
        const int to = get_or<int>(h, "to", 15, scope);
        if (from < 1 || to < from)
            throw ConfigError("field '" + scope + "." + key + "' has an empty range");
        for (int i = from; i <= to; ++i) out.push_back(i);
    } else {
        throw ConfigError("field '" + scope + "." + key + "' must be an array or a range object");
    }
    if (out.empty()) throw ConfigError("field '" + scope + "." + key + "' is empty");
    return out;
}

inline LinearSystem parse_system(const nlohmann::json& obj, const std::string& scope) {
    require_keys(obj, scope, {"A", "B", "sigma_w", "sigma_x"});
    if (!obj.contains("A") || !obj.contains("B"))
        throw ConfigError("field '" + scope + "' requires A and B");
    try {
        return LinearSystem(matrix_from_json(obj.at("A"), scope + ".A"),
                            matrix_from_json(obj.at("B"), scope + ".B"),
                            get_or<double>(obj, "sigma_w", 1.0, scope),
                            get_or<double>(obj, "sigma_x", 0.0, scope));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("field '" + scope + "': " + e.what());
    }
}

inline CostSpec parse_cost(const nlohmann::json& obj, const std::string& scope) {
    require_keys(obj, scope, {"Q", "R"});
    if (!obj.contains("Q") || !obj.contains("R"))
        throw ConfigError("field '" + scope + "' requires Q and R");
    try {
        return CostSpec(matrix_from_json(obj.at("Q"), scope + ".Q"),
                        matrix_from_json(obj.at("R"), scope + ".R"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("field '" + scope + "': " + e.what());
    }
}

inline std::vector<long> parse_long_grid(const nlohmann::json& obj, const char* key,
                                         std::vector<long> fallback, const std::string& scope) {
    if (!obj.contains(key)) return fallback;
    const auto& g = obj.at(key);
    if (!g.is_array() || g.empty())
        throw ConfigError("field '" + scope + "." + key + "' must be a non-empty array");
    std::vector<long> out;
    for (const auto& v : g) {
        if (!v.is_number_integer() || v.get<long>() < 1)
            throw ConfigError("field '" + scope + "." + key + "' entries must be integers >= 1");
        out.push_back(v.get<long>());
    }
    return out;
}

}  // namespace detail

inline Kind parse_kind(const std::string& s) {
    if (s == "dare") return Kind::Dare;
    if (s == "synthesize") return Kind::Synthesize;
    if (s == "evaluate") return Kind::Evaluate;
    if (s == "bound") return Kind::Bound;
    if (s == "sweep") return Kind::Sweep;
    if (s == "identify") return Kind::Identify;
    if (s == "adaptive") return Kind::Adaptive;
    throw ConfigError("field 'kind' must be one of dare|synthesize|evaluate|bound|sweep|identify|adaptive");
}

inline const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Dare: return "dare";
        case Kind::Synthesize: return "synthesize";
        case Kind::Evaluate: return "evaluate";
        case Kind::Bound: return "bound";
        case Kind::Sweep: return "sweep";
        case Kind::Identify: return "identify";
        case Kind::Adaptive: return "adaptive";
    }
    return "?";
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::get_or;
    if (!j.is_object()) throw ConfigError("config root must be an object");
    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
        j.at("schema_version").get<int>() != 1)
        throw ConfigError("field 'schema_version' must be the integer 1");
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("field 'kind' is required and must be a string");

    ExperimentConfig cfg;
    cfg.kind = parse_kind(j.at("kind").get<std::string>());

    detail::require_keys(j, "", {"schema_version", "kind", "seed", "out", "format", "jobs",
                                 "system", "cost", kind_name(cfg.kind)});

    cfg.seed = get_or<std::uint64_t>(j, "seed", 1, "");
    cfg.out = get_or<std::string>(j, "out", "", "");
    const std::string fmt = get_or<std::string>(j, "format", "csv", "");
    if (fmt == "csv")
        cfg.format = Format::Csv;
    else if (fmt == "json")
        cfg.format = Format::Json;
    else
        throw ConfigError("field 'format' must be csv or json");
    cfg.jobs = get_or<int>(j, "jobs", 1, "");
    if (cfg.jobs < 1) throw ConfigError("field 'jobs' must be >= 1");

    if (j.contains("system")) cfg.system = detail::parse_system(j.at("system"), "system");
    if (j.contains("cost")) cfg.cost = detail::parse_cost(j.at("cost"), "cost");

    const nlohmann::json block =
        j.contains(kind_name(cfg.kind)) ? j.at(kind_name(cfg.kind)) : nlohmann::json::object();
    const std::string scope = kind_name(cfg.kind);
    if (!block.is_object()) throw ConfigError("field '" + scope + "' must be an object");

    switch (cfg.kind) {
        case Kind::Dare: {
            detail::require_keys(block, scope, {"tol", "max_iter"});
            cfg.dare.tol = get_or<double>(block, "tol", 1e-12, scope);
            cfg.dare.max_iter = get_or<int>(block, "max_iter", 100000, scope);
            if (cfg.dare.tol <= 0.0 || cfg.dare.max_iter < 1)
                throw ConfigError("field 'dare': tol must be > 0 and max_iter >= 1");
            break;
        }
        case Kind::Synthesize: {
            detail::require_keys(block, scope, {"N", "terminal", "nominal_system"});
            cfg.synthesize.N = get_or<int>(block, "N", 5, scope);
            if (cfg.synthesize.N < 1) throw ConfigError("field 'synthesize.N' must be >= 1");
            if (block.contains("terminal"))
                cfg.synthesize.terminal = matrix_from_json(block.at("terminal"), scope + ".terminal");
            if (block.contains("nominal_system"))
                cfg.synthesize.nominal =
                    detail::parse_system(block.at("nominal_system"), scope + ".nominal_system");
            break;
        }
        case Kind::Evaluate: {
            detail::require_keys(block, scope, {"K", "N", "terminal", "nominal_system"});
            if (block.contains("K"))
                cfg.evaluate.K = matrix_from_json(block.at("K"), scope + ".K");
            cfg.evaluate.synth.N = get_or<int>(block, "N", 5, scope);
            if (cfg.evaluate.synth.N < 1) throw ConfigError("field 'evaluate.N' must be >= 1");
            if (block.contains("terminal"))
                cfg.evaluate.synth.terminal =
                    matrix_from_json(block.at("terminal"), scope + ".terminal");
            if (block.contains("nominal_system"))
                cfg.evaluate.synth.nominal =
                    detail::parse_system(block.at("nominal_system"), scope + ".nominal_system");
            break;
        }
        case Kind::Bound: {
            detail::require_keys(block, scope, {"eps_m", "eps_p", "horizons"});
            cfg.bound.eps_m = get_or<double>(block, "eps_m", 0.0, scope);
            cfg.bound.eps_p = get_or<double>(block, "eps_p", 0.0, scope);
            if (cfg.bound.eps_m < 0.0 || cfg.bound.eps_p < 0.0)
                throw ConfigError("field 'bound': error bounds must be >= 0");
            cfg.bound.horizons = detail::parse_horizons(block, "horizons", scope);
            break;
        }
        case Kind::Sweep: {
            detail::require_keys(block, scope,
                                 {"num_models", "perturbation_range", "horizons", "terminal"});
            cfg.sweep.num_models = get_or<int>(block, "num_models", 20, scope);
            cfg.sweep.perturbation_range = get_or<double>(block, "perturbation_range", 0.5, scope);
            if (cfg.sweep.num_models < 1 || cfg.sweep.perturbation_range < 0.0)
                throw ConfigError("field 'sweep': num_models >= 1 and perturbation_range >= 0 required");
            cfg.sweep.horizons = detail::parse_horizons(block, "horizons", scope);
            if (block.contains("terminal"))
                cfg.sweep.terminal = matrix_from_json(block.at("terminal"), scope + ".terminal");
            break;
        }
        case Kind::Identify: {
            detail::require_keys(block, scope,
                                 {"T_grid", "num_seeds", "sigma_u", "t_h", "single_trajectory"});
            cfg.identify.T_grid =
                detail::parse_long_grid(block, "T_grid", cfg.identify.T_grid, scope);
            cfg.identify.num_seeds = get_or<int>(block, "num_seeds", 20, scope);
            cfg.identify.sigma_u = get_or<double>(block, "sigma_u", 1.0, scope);
            cfg.identify.t_h = get_or<int>(block, "t_h", 2, scope);
            cfg.identify.single_trajectory = get_or<bool>(block, "single_trajectory", false, scope);
            if (cfg.identify.num_seeds < 1 || cfg.identify.sigma_u < 0.0 || cfg.identify.t_h < 1)
                throw ConfigError("field 'identify': invalid parameter");
            break;
        }
        case Kind::Adaptive: {
            detail::require_keys(block, scope,
                                 {"modes", "fixed_N", "T_grid", "num_seeds", "k0", "sigma0",
                                  "sigma_decay", "max_N", "oracle", "gamma_bar", "K0"});
            if (block.contains("modes")) {
                cfg.adaptive.modes.clear();
                for (const auto& mj : block.at("modes")) {
                    const std::string mode = mj.is_string() ? mj.get<std::string>() : "";
                    if (mode != "fixed" && mode != "adaptive_log")
                        throw ConfigError("field 'adaptive.modes' entries must be fixed|adaptive_log");
                    cfg.adaptive.modes.push_back(mode);
                }
                if (cfg.adaptive.modes.empty())
                    throw ConfigError("field 'adaptive.modes' is empty");
            }
            cfg.adaptive.fixed_N = get_or<int>(block, "fixed_N", 2, scope);
            cfg.adaptive.T_grid =
                detail::parse_long_grid(block, "T_grid", cfg.adaptive.T_grid, scope);
            cfg.adaptive.num_seeds = get_or<int>(block, "num_seeds", 20, scope);
            cfg.adaptive.k0 = get_or<int>(block, "k0", 3, scope);
            cfg.adaptive.sigma0 = get_or<double>(block, "sigma0", 1.0, scope);
            cfg.adaptive.sigma_decay = get_or<double>(block, "sigma_decay", 0.25, scope);
            cfg.adaptive.max_N = get_or<int>(block, "max_N", 200, scope);
            cfg.adaptive.oracle = get_or<bool>(block, "oracle", false, scope);
            if (block.contains("gamma_bar"))
                cfg.adaptive.gamma_bar = get_or<double>(block, "gamma_bar", 0.5, scope);
            if (block.contains("K0"))
                cfg.adaptive.K0 = matrix_from_json(block.at("K0"), scope + ".K0");
            if (cfg.adaptive.fixed_N < 1 || cfg.adaptive.num_seeds < 1 || cfg.adaptive.k0 < 1 ||
                cfg.adaptive.max_N < 1)
                throw ConfigError("field 'adaptive': invalid parameter");
            break;
        }
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace rhc::harness
