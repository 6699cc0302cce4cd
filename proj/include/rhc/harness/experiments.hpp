#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhc/adaptive.hpp"
#include "rhc/bounds.hpp"
#include "rhc/harness/config.hpp"
#include "rhc/harness/emit.hpp"
#include "rhc/harness/parallel.hpp"
#include "rhc/performance.hpp"
#include "rhc/riccati.hpp"
#include "rhc/stats.hpp"
#include "rhc/sysid.hpp"
#include "rhc/types.hpp"

// Experiment drivers. Each driver expands the master seed into per-cell
// streams (model index, grid index, trial index), so any parallelism level
// produces identical results, and each result type has CSV and JSON
// serializers with stable byte output.

namespace rhc::harness {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// sweep: perturbed nominal models x horizon grid
// ---------------------------------------------------------------------------

struct SweepEntry {
    int model_index = 0;
    int N = 0;
    bool stable = false;
    double gap = kMissing;             // absent unless stable
    double normalized_gap = kMissing;  // gap / max stable gap of the sweep
};

struct SweepModel {
    int index = 0;
    MatrixXd delta_A;
    MatrixXd delta_B;
    int argmin_N = -1;  // -1: no stable horizon
    std::string argmin_class = "none";  // min_horizon | max_horizon | interior | none
};

struct SweepResult {
    std::vector<int> horizons;
    std::vector<SweepModel> models;
    std::vector<SweepEntry> entries;  // models x horizons, model-major
    double max_gap = 0.0;
};

inline SweepResult run_sweep(const LinearSystem& true_sys, const CostSpec& cost,
                             const SweepParams& params, std::uint64_t seed, int jobs = 1) {
    const Eigen::Index n = true_sys.n();
    const Eigen::Index m = true_sys.m();
    const MatrixXd terminal = params.terminal ? *params.terminal
                              : (n == 2 && m == 1) ? default_terminal_weight()
                                                   : MatrixXd::Zero(n, n);

    const OptimalSolution opt = solve_optimal(true_sys, cost);
    const double J_star = infinite_horizon_cost(true_sys, cost, opt.K_star);

    SweepResult result;
    result.horizons = params.horizons;
    result.models.resize(static_cast<std::size_t>(params.num_models));
    result.entries.resize(static_cast<std::size_t>(params.num_models) * params.horizons.size());

    parallel_for(static_cast<std::size_t>(params.num_models), jobs, [&](std::size_t j) {
        Rng rng(derive_seed(seed, {0x6d6fu, static_cast<std::uint64_t>(j)}));
        SweepModel& model = result.models[j];
        model.index = static_cast<int>(j);
        model.delta_A = rng.uniform_matrix(n, n, -params.perturbation_range,
                                           params.perturbation_range);
        model.delta_B = rng.uniform_matrix(n, m, -params.perturbation_range,
                                           params.perturbation_range);
        const LinearSystem nominal(true_sys.A + model.delta_A, true_sys.B + model.delta_B,
                                   true_sys.sigma_w);
        for (std::size_t h = 0; h < params.horizons.size(); ++h) {
            SweepEntry& entry = result.entries[j * params.horizons.size() + h];
            entry.model_index = model.index;
            entry.N = params.horizons[h];
            try {
                const MatrixXd K = mpc_gain(nominal, cost, RhcConfig(entry.N, terminal));
                if (is_stabilizing(true_sys, K)) {
                    entry.stable = true;
                    entry.gap = infinite_horizon_cost(true_sys, cost, K) - J_star;
                }
            } catch (const NumericalError&) {
            } catch (const NonConvergence&) {
            } catch (const Unstable&) {
            }
        }
    });

    double max_gap = 0.0;
    for (const auto& e : result.entries)
        if (e.stable && e.gap > max_gap) max_gap = e.gap;
    result.max_gap = max_gap;
    for (auto& e : result.entries)
        if (e.stable && max_gap > 0.0)
            e.normalized_gap = std::max(0.0, e.gap / max_gap);

    for (auto& model : result.models) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < params.horizons.size(); ++h) {
            const auto& e =
                result.entries[static_cast<std::size_t>(model.index) * params.horizons.size() + h];
            if (e.stable && e.gap < best) {
                best = e.gap;
                model.argmin_N = e.N;
            }
        }
        if (model.argmin_N < 0)
            model.argmin_class = "none";
        else if (model.argmin_N == params.horizons.front())
            model.argmin_class = "min_horizon";
        else if (model.argmin_N == params.horizons.back())
            model.argmin_class = "max_horizon";
        else
            model.argmin_class = "interior";
    }
    return result;
}

inline std::string to_csv(const SweepResult& result) {
    CsvWriter csv({"model_index", "N", "stable", "gap", "normalized_gap"});
    for (const auto& e : result.entries)
        csv.row({cell(e.model_index), cell(e.N), cell(e.stable), cell(e.gap),
                 cell(e.normalized_gap)});
    return csv.str();
}

inline nlohmann::json to_json(const SweepResult& result) {
    nlohmann::json j;
    j["kind"] = "sweep";
    j["horizons"] = result.horizons;
    j["max_gap"] = result.max_gap;
    j["models"] = nlohmann::json::array();
    for (const auto& model : result.models) {
        nlohmann::json mj;
        mj["index"] = model.index;
        mj["delta_A"] = matrix_to_json(model.delta_A);
        mj["delta_B"] = matrix_to_json(model.delta_B);
        mj["argmin_N"] = model.argmin_N;
        mj["argmin_class"] = model.argmin_class;
        j["models"].push_back(std::move(mj));
    }
    j["entries"] = nlohmann::json::array();
    for (const auto& e : result.entries) {
        nlohmann::json ej;
        ej["model_index"] = e.model_index;
        ej["N"] = e.N;
        ej["stable"] = e.stable;
        if (e.stable) {
            ej["gap"] = e.gap;
            if (!std::isnan(e.normalized_gap)) ej["normalized_gap"] = e.normalized_gap;
        }
        j["entries"].push_back(std::move(ej));
    }
    return j;
}

// ---------------------------------------------------------------------------
// identify: LS error vs rollout count
// ---------------------------------------------------------------------------

/// Experiment-format serialization of raw rollout data.
inline nlohmann::json to_json(const RolloutData& data) {
    nlohmann::json j;
    j["kind"] = "rollouts";
    j["num_rollouts"] = data.num_rollouts;
    j["t_h"] = data.t_h;
    j["seed"] = data.seed;
    j["states"] = nlohmann::json::array();
    j["inputs"] = nlohmann::json::array();
    for (const auto& xs : data.states) {
        nlohmann::json rollout = nlohmann::json::array();
        for (const auto& x : xs) rollout.push_back(std::vector<double>(x.data(), x.data() + x.size()));
        j["states"].push_back(std::move(rollout));
    }
    for (const auto& us : data.inputs) {
        nlohmann::json rollout = nlohmann::json::array();
        for (const auto& u : us) rollout.push_back(std::vector<double>(u.data(), u.data() + u.size()));
        j["inputs"].push_back(std::move(rollout));
    }
    return j;
}

inline RolloutData rollouts_from_json(const nlohmann::json& j) {
    RolloutData data;
    data.num_rollouts = j.at("num_rollouts").get<int>();
    data.t_h = j.at("t_h").get<int>();
    data.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& rollout : j.at("states")) {
        std::vector<Eigen::VectorXd> xs;
        for (const auto& xj : rollout) {
            const auto vals = xj.get<std::vector<double>>();
            xs.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                           static_cast<Eigen::Index>(vals.size())));
        }
        data.states.push_back(std::move(xs));
    }
    for (const auto& rollout : j.at("inputs")) {
        std::vector<Eigen::VectorXd> us;
        for (const auto& uj : rollout) {
            const auto vals = uj.get<std::vector<double>>();
            us.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                           static_cast<Eigen::Index>(vals.size())));
        }
        data.inputs.push_back(std::move(us));
    }
    return data;
}

struct IdentifyRow {
    long T = 0;
    double median_eps = kMissing;
    double q25 = kMissing;
    double q75 = kMissing;
};

struct IdentifyResult {
    std::vector<IdentifyRow> rows;
    std::vector<std::vector<double>> eps;  // eps[grid index][seed index]
    double loglog_slope = kMissing;        // fit of log(median) against log(T)
};

inline IdentifyResult run_identify(const LinearSystem& true_sys, const IdentifyParams& params,
                                   std::uint64_t seed, int jobs = 1) {
    IdentifyResult result;
    const std::size_t n_cells = params.T_grid.size() * static_cast<std::size_t>(params.num_seeds);
    result.eps.assign(params.T_grid.size(),
                      std::vector<double>(static_cast<std::size_t>(params.num_seeds), kMissing));

    parallel_for(n_cells, jobs, [&](std::size_t cell) {
        const std::size_t gi = cell / static_cast<std::size_t>(params.num_seeds);
        const std::size_t si = cell % static_cast<std::size_t>(params.num_seeds);
        const auto T = static_cast<int>(params.T_grid[gi]);
        const std::uint64_t cell_seed = derive_seed(seed, {0x6964u, gi, si});
        try {
            if (params.single_trajectory) {
                // one closed-record trajectory of length T, fit on every transition
                const RolloutData data =
                    generate_rollouts(true_sys, params.sigma_u, 1, T, cell_seed);
                const EstimateResult est =
                    ls_estimate_single(data.states.front(), data.inputs.front(), &true_sys);
                result.eps[gi][si] = est.eps_measured.value();
            } else {
                const RolloutData data =
                    generate_rollouts(true_sys, params.sigma_u, T, params.t_h, cell_seed);
                const EstimateResult est = ls_estimate(data, &true_sys);
                result.eps[gi][si] = est.eps_measured.value();
            }
        } catch (const RankDeficient&) {
        }
    });

    std::vector<double> log_T, log_median;
    for (std::size_t gi = 0; gi < params.T_grid.size(); ++gi) {
        IdentifyRow row;
        row.T = params.T_grid[gi];
        std::vector<double> sample;
        for (double v : result.eps[gi])
            if (!std::isnan(v)) sample.push_back(v);
        if (!sample.empty()) {
            row.median_eps = median(sample);
            row.q25 = quantile(sample, 0.25);
            row.q75 = quantile(sample, 0.75);
        }
        if (row.median_eps > 0.0) {
            log_T.push_back(std::log(static_cast<double>(row.T)));
            log_median.push_back(std::log(row.median_eps));
        }
        result.rows.push_back(row);
    }
    if (log_T.size() >= 2) result.loglog_slope = fit_line(log_T, log_median).slope;
    return result;
}

inline std::string to_csv(const IdentifyResult& result) {
    CsvWriter csv({"T", "median_eps", "q25", "q75"});
    for (const auto& row : result.rows)
        csv.row({cell(row.T), cell(row.median_eps), cell(row.q25), cell(row.q75)});
    return csv.str();
}

inline nlohmann::json to_json(const IdentifyResult& result) {
    nlohmann::json j;
    j["kind"] = "identify";
    if (!std::isnan(result.loglog_slope)) j["loglog_slope"] = result.loglog_slope;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : result.rows) {
        nlohmann::json rj;
        rj["T"] = row.T;
        rj["median_eps"] = row.median_eps;
        rj["q25"] = row.q25;
        rj["q75"] = row.q75;
        j["rows"].push_back(std::move(rj));
    }
    j["eps"] = result.eps;
    return j;
}

// ---------------------------------------------------------------------------
// adaptive: regret curves per (mode, T, seed)
// ---------------------------------------------------------------------------

struct CurvePoint {
    long t = 0;
    int epoch = 0;
    double stage_cost = 0.0;
    double cum_regret = 0.0;
};

struct AdaptiveRun {
    std::string mode;
    long T = 0;
    int seed_index = 0;
    bool diverged = false;
    long diverged_t = -1;
    RegretSummary summary;
    std::vector<CurvePoint> curve;
    std::vector<EpochRecord> epochs;
};

struct AdaptiveExperimentResult {
    std::vector<AdaptiveRun> runs;
};

/// Derived default for the AdaptiveLog schedule rate: √(1 − β★⁻¹/√2) from
/// the true system's DARE solution.
inline double default_gamma_bar(const LinearSystem& true_sys, const CostSpec& cost) {
    const RiccatiSolution sol = solve_dare(true_sys, cost);
    const double beta = spectral_norm(sol.P) / min_eigenvalue(cost.Q);
    return std::sqrt(1.0 - 1.0 / (beta * std::sqrt(2.0)));
}

inline AdaptiveExperimentResult run_adaptive_experiment(const LinearSystem& true_sys,
                                                        const CostSpec& cost,
                                                        const AdaptiveParams& params,
                                                        std::uint64_t seed, int jobs = 1) {
    const OptimalSolution opt = solve_optimal(true_sys, cost);
    const double gamma_bar = params.gamma_bar ? *params.gamma_bar
                                              : default_gamma_bar(true_sys, cost);
    const MatrixXd K0 = params.K0 ? *params.K0 : opt.K_star;

    AdaptiveExperimentResult result;
    const std::size_t n_runs = params.modes.size() * params.T_grid.size() *
                               static_cast<std::size_t>(params.num_seeds);
    result.runs.resize(n_runs);

    parallel_for(n_runs, jobs, [&](std::size_t idx) {
        const std::size_t per_mode = params.T_grid.size() * static_cast<std::size_t>(params.num_seeds);
        const std::size_t mi = idx / per_mode;
        const std::size_t ti = (idx % per_mode) / static_cast<std::size_t>(params.num_seeds);
        const std::size_t si = idx % static_cast<std::size_t>(params.num_seeds);

        AdaptiveRun& run = result.runs[idx];
        run.mode = params.modes[mi];
        run.T = params.T_grid[ti];
        run.seed_index = static_cast<int>(si);

        AdaptiveConfig cfg;
        cfg.K0 = K0;
        cfg.k0 = params.k0;
        cfg.T_total = run.T;
        cfg.mode = run.mode == "fixed" ? HorizonMode::Fixed : HorizonMode::AdaptiveLog;
        cfg.fixed_N = params.fixed_N;
        cfg.gamma_bar = gamma_bar;
        cfg.sigma0 = params.sigma0;
        cfg.sigma_decay = params.sigma_decay;
        cfg.max_N = params.max_N;
        cfg.oracle_mode = params.oracle;
        cfg.seed = derive_seed(seed, {0x6570u, mi, ti, si});

        RegretTrace trace;
        try {
            trace = run_adaptive(true_sys, cost, cfg);
        } catch (const Diverged& d) {
            trace = d.partial;
            run.diverged = true;
            run.diverged_t = trace.diverged_t;
        }
        run.curve.reserve(trace.steps.size());
        for (std::size_t i = 0; i < trace.steps.size(); ++i)
            run.curve.push_back(CurvePoint{trace.steps[i].t, trace.steps[i].epoch,
                                           trace.steps[i].stage_cost,
                                           trace.cumulative_regret[i]});
        run.epochs = trace.epochs;
        if (trace.cumulative_regret.size() >= 4)
            run.summary = regret_summary(trace, true_sys, cost);
    });
    return result;
}

inline std::string to_csv(const AdaptiveExperimentResult& result) {
    CsvWriter csv({"seed", "mode", "t", "epoch", "stage_cost", "cum_regret"});
    for (const auto& run : result.runs)
        for (const auto& point : run.curve)
            csv.row({cell(run.seed_index), run.mode, cell(point.t), cell(point.epoch),
                     cell(point.stage_cost), cell(point.cum_regret)});
    return csv.str();
}

inline nlohmann::json to_json(const AdaptiveExperimentResult& result) {
    nlohmann::json j;
    j["kind"] = "adaptive";
    j["runs"] = nlohmann::json::array();
    for (const auto& run : result.runs) {
        nlohmann::json rj;
        rj["mode"] = run.mode;
        rj["T"] = run.T;
        rj["seed"] = run.seed_index;
        rj["diverged"] = run.diverged;
        if (run.diverged) rj["diverged_t"] = run.diverged_t;
        rj["final_regret"] = run.summary.final_regret;
        rj["sqrtT_ratio"] = run.summary.sqrtT_ratio;
        rj["linear_slope"] = run.summary.linear_slope;
        rj["epochs"] = nlohmann::json::array();
        for (const auto& ep : run.epochs) {
            nlohmann::json ej;
            ej["k"] = ep.k;
            ej["t_k"] = ep.t_k;
            ej["N"] = ep.N;
            ej["sigma"] = ep.sigma;
            ej["reestimated"] = ep.reestimated;
            if (ep.eps_measured) ej["eps_measured"] = *ep.eps_measured;
            ej["regressor_min_singular"] = ep.regressor_min_singular;
            rj["epochs"].push_back(std::move(ej));
        }
        j["runs"].push_back(std::move(rj));
    }
    return j;
}

// ---------------------------------------------------------------------------
// dare / synthesize / evaluate / bound
// ---------------------------------------------------------------------------

struct DareResult {
    RiccatiSolution solution;
    MatrixXd K_star;
    MatrixXd L_star;
    double J_star = 0.0;
    double closed_loop_radius = 0.0;
};

inline DareResult run_dare(const LinearSystem& sys, const CostSpec& cost, const DareParams& p) {
    DareResult out;
    const OptimalSolution opt = solve_optimal(sys, cost, p.tol, p.max_iter);
    out.solution = opt.riccati;
    out.K_star = opt.K_star;
    out.L_star = opt.L_star;
    out.J_star = opt.J_star;
    out.closed_loop_radius = spectral_radius(opt.L_star);
    return out;
}

inline nlohmann::json to_json(const DareResult& r) {
    nlohmann::json j;
    j["kind"] = "dare";
    j["P"] = matrix_to_json(r.solution.P);
    j["iterations"] = r.solution.iterations;
    j["residual"] = r.solution.residual;
    j["K_star"] = matrix_to_json(r.K_star);
    j["closed_loop_radius"] = r.closed_loop_radius;
    j["J_star"] = r.J_star;
    return j;
}

namespace detail {

inline void matrix_rows(CsvWriter& csv, const std::string& name, const MatrixXd& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            csv.row({name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                     format_double(M(i, j))});
}

}  // namespace detail

inline std::string to_csv(const DareResult& r) {
    CsvWriter csv({"key", "value"});
    csv.row({"iterations", cell(r.solution.iterations)});
    csv.row({"residual", cell(r.solution.residual)});
    csv.row({"closed_loop_radius", cell(r.closed_loop_radius)});
    csv.row({"J_star", cell(r.J_star)});
    detail::matrix_rows(csv, "P", r.solution.P);
    detail::matrix_rows(csv, "K_star", r.K_star);
    return csv.str();
}

struct SynthesizeResult {
    MatrixXd K_mpc;
    int N = 1;
};

inline SynthesizeResult run_synthesize(const LinearSystem& system, const CostSpec& cost,
                                       const SynthesizeParams& p) {
    const LinearSystem& nominal = p.nominal ? *p.nominal : system;
    const MatrixXd terminal =
        p.terminal ? *p.terminal : MatrixXd::Zero(nominal.n(), nominal.n()).eval();
    SynthesizeResult out;
    out.N = p.N;
    out.K_mpc = mpc_gain(nominal, cost, RhcConfig(p.N, terminal));
    return out;
}

inline nlohmann::json to_json(const SynthesizeResult& r) {
    nlohmann::json j;
    j["kind"] = "synthesize";
    j["N"] = r.N;
    j["K_mpc"] = matrix_to_json(r.K_mpc);
    return j;
}

inline std::string to_csv(const SynthesizeResult& r) {
    CsvWriter csv({"key", "value"});
    csv.row({"N", cell(r.N)});
    detail::matrix_rows(csv, "K_mpc", r.K_mpc);
    return csv.str();
}

inline PerformanceReport run_evaluate(const LinearSystem& true_sys, const CostSpec& cost,
                                      const EvaluateParams& p) {
    const MatrixXd K = p.K ? *p.K : run_synthesize(true_sys, cost, p.synth).K_mpc;
    return evaluate_controller(true_sys, cost, K);
}

inline nlohmann::json to_json(const PerformanceReport& r) {
    nlohmann::json j;
    j["kind"] = "evaluate";
    j["K"] = matrix_to_json(r.K);
    j["stable"] = r.stable;
    j["spectral_radius"] = r.spectral_radius;
    if (r.Sigma_K) j["Sigma_K"] = matrix_to_json(*r.Sigma_K);
    if (r.J_K) j["J_K"] = *r.J_K;
    if (r.gap) j["gap"] = *r.gap;
    return j;
}

inline std::string to_csv(const PerformanceReport& r) {
    CsvWriter csv({"key", "value"});
    csv.row({"stable", cell(r.stable)});
    csv.row({"spectral_radius", cell(r.spectral_radius)});
    csv.row({"J_K", cell(r.J_K ? *r.J_K : kMissing)});
    csv.row({"gap", cell(r.gap ? *r.gap : kMissing)});
    detail::matrix_rows(csv, "K", r.K);
    if (r.Sigma_K) detail::matrix_rows(csv, "Sigma_K", *r.Sigma_K);
    return csv.str();
}

struct BoundRow {
    int N = 0;
    double e_hat = 0.0;
    bool e_hat_ok = false;
    double gap_bound = 0.0;
    bool gap_bound_ok = false;
    double known_model_bound = 0.0;
    bool known_model_ok = false;
};

struct BoundSurvey {
    BoundContext ctx;
    double psi_value = 0.0;
    double gamma1_value = 0.0;
    double alpha = 0.0;
    double gamma2 = 0.0;
    double psi_tilde_value = 0.0;
    double criterion = kMissing;
    std::string advice = "unavailable";
    std::vector<BoundRow> rows;
};

inline BoundSurvey run_bound(const LinearSystem& sys, const CostSpec& cost,
                             const BoundParams& p) {
    BoundSurvey out;
    const RiccatiSolution sol = solve_dare(sys, cost);
    out.ctx = BoundContext::from_matrices(sys, cost, sol.P, p.eps_m, p.eps_p);
    out.psi_value = psi(out.ctx);
    out.gamma1_value = gamma1(out.ctx);
    out.psi_tilde_value = psi_tilde(out.ctx);
    try {
        const AlphaGamma2 ag = alpha_gamma2(out.ctx);
        out.alpha = ag.alpha;
        out.gamma2 = ag.gamma2;
        out.criterion = recommendation_criterion(out.ctx);
        out.advice = to_string(horizon_recommendation(out.ctx));
    } catch (const ModelErrorTooLarge&) {
        out.alpha = std::numeric_limits<double>::infinity();
        out.gamma2 = kMissing;
    } catch (const RateProductNotContractive&) {
        out.advice = "rate_product_not_contractive";
    }
    for (int N : p.horizons) {
        BoundRow row;
        row.N = N;
        const BoundReport eh = e_hat(out.ctx, N - 1);
        row.e_hat = eh.value;
        row.e_hat_ok = eh.preconditions_met;
        const BoundReport g = mpc_gap_bound(out.ctx, N);
        row.gap_bound = g.value;
        row.gap_bound_ok = g.preconditions_met;
        const BoundReport known = known_model_gap_bound(out.ctx, N);
        row.known_model_bound = known.value;
        row.known_model_ok = known.preconditions_met;
        out.rows.push_back(row);
    }
    return out;
}

inline nlohmann::json to_json(const BoundSurvey& r) {
    nlohmann::json j;
    j["kind"] = "bound";
    j["context"] = {{"eps_m", r.ctx.eps_m},
                    {"eps_p", r.ctx.eps_p},
                    {"upsilon", r.ctx.upsilon},
                    {"beta", r.ctx.beta},
                    {"p_star_norm", r.ctx.p_star_norm},
                    {"sigma_w", r.ctx.sigma_w},
                    {"m_dim", r.ctx.m_dim},
                    {"r_min", r.ctx.r_min},
                    {"r_max", r.ctx.r_max},
                    {"q_min", r.ctx.q_min}};
    j["psi"] = r.psi_value;
    j["gamma1"] = r.gamma1_value;
    j["alpha"] = r.alpha;
    if (!std::isnan(r.gamma2)) j["gamma2"] = r.gamma2;
    j["psi_tilde"] = r.psi_tilde_value;
    if (!std::isnan(r.criterion)) j["criterion"] = r.criterion;
    j["recommendation"] = r.advice;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json rj;
        rj["N"] = row.N;
        rj["e_hat"] = std::isfinite(row.e_hat) ? nlohmann::json(row.e_hat) : nlohmann::json("inf");
        rj["e_hat_preconditions_ok"] = row.e_hat_ok;
        rj["gap_bound"] =
            std::isfinite(row.gap_bound) ? nlohmann::json(row.gap_bound) : nlohmann::json("inf");
        rj["gap_bound_preconditions_ok"] = row.gap_bound_ok;
        rj["known_model_bound"] = row.known_model_bound;
        rj["known_model_preconditions_ok"] = row.known_model_ok;
        j["rows"].push_back(std::move(rj));
    }
    return j;
}

inline std::string to_csv(const BoundSurvey& r) {
    CsvWriter csv({"N", "e_hat", "e_hat_ok", "gap_bound", "gap_bound_ok", "known_model_bound",
                   "known_model_ok"});
    for (const auto& row : r.rows)
        csv.row({cell(row.N), std::isfinite(row.e_hat) ? format_double(row.e_hat) : "inf",
                 cell(row.e_hat_ok),
                 std::isfinite(row.gap_bound) ? format_double(row.gap_bound) : "inf",
                 cell(row.gap_bound_ok), cell(row.known_model_bound), cell(row.known_model_ok)});
    return csv.str();
}

}  // namespace rhc::harness
