#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rhc/errors.hpp"
#include "rhc/linalg.hpp"
#include "rhc/performance.hpp"
#include "rhc/riccati.hpp"
#include "rhc/rng.hpp"
#include "rhc/stats.hpp"
#include "rhc/sysid.hpp"
#include "rhc/types.hpp"

// Epoch-doubling adaptive receding-horizon controller: epochs end at
// t_k = 2^k; after a warmup under an initially stabilizing gain with unit
// exploration noise, the model is re-estimated at each t_k from the previous
// interval's transitions, the N-step controller (zero terminal weight) is
// re-synthesized, and decaying exploration noise keeps the loop data
// informative. Regret is accounted against J★ of the true system.

namespace rhc {

enum class HorizonMode { Fixed, AdaptiveLog };

struct AdaptiveConfig {
    MatrixXd K0;                 // initial stabilizing controller
    int k0 = 3;                  // warmup epochs: estimation starts at t = 2^k0
    long T_total = 0;            // total closed-loop steps
    HorizonMode mode = HorizonMode::Fixed;
    int fixed_N = 1;             // horizon in Fixed mode
    double gamma_bar = 0.5;      // decay rate driving the AdaptiveLog schedule
    double sigma0 = 1.0;         // exploration scale: σ_k = σ₀ t_k^{−sigma_decay}
    double sigma_decay = 0.25;   // default σ_k² = 1/√t_k
    int max_N = 200;
    bool oracle_mode = false;    // skip estimation, use the true model
    double informativity_threshold = 1e-6;  // min regressor singular value
    double overflow_guard = 1e8;
    std::uint64_t seed = 0;

    void validate(const LinearSystem& true_sys) const {
        if (K0.rows() != true_sys.m() || K0.cols() != true_sys.n())
            throw DimensionError("AdaptiveConfig: K0 must be m x n");
        if (spectral_radius(true_sys.A - true_sys.B * K0) >= 1.0)
            throw Unstable("AdaptiveConfig: K0 does not stabilize the system");
        if (k0 < 1) throw std::invalid_argument("AdaptiveConfig: k0 must be >= 1");
        if (T_total < (2L << k0))
            throw std::invalid_argument("AdaptiveConfig: T_total must be >= 2^(k0+1)");
        if (mode == HorizonMode::Fixed && fixed_N < 1)
            throw std::invalid_argument("AdaptiveConfig: fixed_N must be >= 1");
        if (mode == HorizonMode::AdaptiveLog && (gamma_bar <= 0.0 || gamma_bar >= 1.0))
            throw InvalidRate("AdaptiveConfig: gamma_bar must lie in (0, 1)");
        if (sigma0 < 0.0 || max_N < 1 || overflow_guard <= 0.0)
            throw std::invalid_argument("AdaptiveConfig: invalid scalar field");
    }
};

/// Horizon schedule N = max(1, ceil(−log(t_k)/(4 log γ̄))), clamped at max_N.
inline int horizon_schedule(long t_k, double gamma_bar, int max_N = 200) {
    if (gamma_bar <= 0.0 || gamma_bar >= 1.0)
        throw InvalidRate("horizon_schedule: gamma_bar must lie in (0, 1)");
    if (t_k < 2) throw InvalidRange("horizon_schedule: t_k must be >= 2");
    const double raw = -std::log(static_cast<double>(t_k)) / (4.0 * std::log(gamma_bar));
    const double clamped = std::min(raw, static_cast<double>(max_N));
    return std::max(1, static_cast<int>(std::ceil(clamped)));
}

struct EpochRecord {
    int k = 0;
    long t_k = 0;
    MatrixXd A_hat;
    MatrixXd B_hat;
    std::optional<double> eps_measured;  // absent when the estimate was carried over
    double regressor_min_singular = 0.0;
    bool reestimated = false;
    int N = 0;
    MatrixXd K;
    double sigma = 0.0;
};

struct StepRecord {
    long t = 0;
    int epoch = 0;
    double stage_cost = 0.0;
};

struct RegretTrace {
    std::vector<StepRecord> steps;
    std::vector<VectorXd> states;   // x_t, aligned with steps
    std::vector<VectorXd> inputs;   // u_t, aligned with steps
    std::vector<EpochRecord> epochs;
    std::vector<double> cumulative_regret;
    double J_star = 0.0;
    bool diverged = false;
    long diverged_t = -1;
    int diverged_epoch = -1;
};

/// State norm crossed the overflow guard; carries the partial trace so the
/// caller can still account for the run.
struct Diverged : DivergedError {
    Diverged(const std::string& msg, RegretTrace trace)
        : DivergedError(msg), partial(std::move(trace)) {}
    RegretTrace partial;
};

namespace detail {

inline int epoch_of(long t) {
    if (t < 1) return 0;
    int k = 0;
    while ((2L << k) <= t) ++k;  // largest k with 2^k <= t
    return k;
}

}  // namespace detail

/// Runs the adaptive loop for cfg.T_total steps from x₀ = 0 and returns the
/// full trace. Throws Diverged (with the partial trace) if the overflow
/// guard trips; rank-deficient estimation epochs keep the previous
/// controller and are recorded, not fatal.
inline RegretTrace run_adaptive(const LinearSystem& true_sys, const CostSpec& cost,
                                const AdaptiveConfig& cfg) {
    cfg.validate(true_sys);
    detail::check_compatible(true_sys, cost);
    const Eigen::Index n = true_sys.n();
    const Eigen::Index m = true_sys.m();

    const OptimalSolution opt = solve_optimal(true_sys, cost);
    const double J_star = infinite_horizon_cost(true_sys, cost, opt.K_star);

    RegretTrace trace;
    trace.J_star = J_star;
    trace.steps.reserve(static_cast<std::size_t>(cfg.T_total));
    trace.cumulative_regret.reserve(static_cast<std::size_t>(cfg.T_total));

    Rng rng(derive_seed(cfg.seed, {0x6164u}));
    VectorXd x = VectorXd::Zero(n);
    MatrixXd K = cfg.K0;
    MatrixXd nominal_A = cfg.oracle_mode ? true_sys.A : MatrixXd::Zero(n, n);
    MatrixXd nominal_B = cfg.oracle_mode ? true_sys.B : MatrixXd::Zero(n, m);
    bool have_model = cfg.oracle_mode;
    double sigma = cfg.sigma0;  // warmup exploration is sigma0 * N(0, I)
    double cum = 0.0;
    const long first_update = 1L << cfg.k0;

    for (long t = 0; t < cfg.T_total; ++t) {
        const int k = detail::epoch_of(t);
        const bool epoch_start = t >= first_update && (t & (t - 1)) == 0;
        if (epoch_start) {
            EpochRecord rec;
            rec.k = k;
            rec.t_k = t;
            rec.sigma = sigma = cfg.sigma0 * std::pow(static_cast<double>(t), -cfg.sigma_decay);
            if (cfg.oracle_mode) {
                rec.reestimated = true;
                rec.eps_measured = 0.0;
            } else {
                // Fit on the previous interval [t/2, t): rows (x_s, u_s) -> x_{s+1}.
                const long lo = t / 2;
                const long rows = t - lo;
                MatrixXd regressor(rows, n + m);
                MatrixXd targets(rows, n);
                for (long s = lo; s < t; ++s) {
                    const auto us = static_cast<std::size_t>(s);
                    regressor.row(s - lo).head(n) = trace.states[us];
                    regressor.row(s - lo).tail(m) = trace.inputs[us];
                    targets.row(s - lo) = (s + 1 == t) ? x : trace.states[us + 1];
                }
                try {
                    EstimateResult est = ls_solve(regressor, targets, n, m);
                    if (est.regressor_min_singular < cfg.informativity_threshold)
                        throw RankDeficient("insufficient excitation");
                    nominal_A = est.A_hat;
                    nominal_B = est.B_hat;
                    have_model = true;
                    rec.reestimated = true;
                    rec.regressor_min_singular = est.regressor_min_singular;
                    rec.eps_measured = std::max(spectral_norm(nominal_A - true_sys.A),
                                                spectral_norm(nominal_B - true_sys.B));
                } catch (const RankDeficient&) {
                    rec.reestimated = false;  // carry the previous controller
                }
            }
            rec.N = (cfg.mode == HorizonMode::Fixed)
                        ? cfg.fixed_N
                        : horizon_schedule(t, cfg.gamma_bar, cfg.max_N);
            if (have_model && (rec.reestimated || cfg.oracle_mode)) {
                const LinearSystem nominal(nominal_A, nominal_B, true_sys.sigma_w);
                K = mpc_gain(nominal, cost, RhcConfig(rec.N, MatrixXd::Zero(n, n)));
            }
            rec.A_hat = nominal_A;
            rec.B_hat = nominal_B;
            rec.K = K;
            trace.epochs.push_back(std::move(rec));
        }

        const VectorXd u = -K * x + sigma * rng.normal_vector(m);
        const double stage = cost.stage_cost(x, u);
        trace.steps.push_back(StepRecord{t, k, stage});
        trace.states.push_back(x);
        trace.inputs.push_back(u);
        cum += stage - J_star;
        trace.cumulative_regret.push_back(cum);

        x = true_sys.A * x + true_sys.B * u + true_sys.sigma_w * rng.normal_vector(n);
        if (x.norm() > cfg.overflow_guard) {
            trace.diverged = true;
            trace.diverged_t = t;
            trace.diverged_epoch = k;
            throw Diverged("run_adaptive: state norm exceeded overflow guard at t=" +
                               std::to_string(t) + " (epoch " + std::to_string(k) + ")",
                           std::move(trace));
        }
    }
    return trace;
}

/// Recomputes cumulative regret from the logged states and inputs; used to
/// cross-check the accounting in the trace.
inline std::vector<double> recompute_regret(const RegretTrace& trace, const CostSpec& cost) {
    std::vector<double> cum;
    cum.reserve(trace.states.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < trace.states.size(); ++i) {
        acc += cost.stage_cost(trace.states[i], trace.inputs[i]) - trace.J_star;
        cum.push_back(acc);
    }
    return cum;
}

struct RegretSummary {
    double final_regret = 0.0;
    double sqrtT_ratio = 0.0;
    double linear_slope = 0.0;  // OLS slope of the tail (second half) of the curve
};

inline RegretSummary regret_summary(const RegretTrace& trace, const LinearSystem& /*true_sys*/,
                                    const CostSpec& /*cost*/) {
    if (trace.cumulative_regret.empty())
        throw std::invalid_argument("regret_summary: empty trace");
    RegretSummary out;
    const auto T = trace.cumulative_regret.size();
    out.final_regret = trace.cumulative_regret.back();
    out.sqrtT_ratio = out.final_regret / std::sqrt(static_cast<double>(T));
    const std::size_t lo = T / 2;
    if (T - lo >= 2) {
        std::vector<double> xs, ys;
        xs.reserve(T - lo);
        ys.reserve(T - lo);
        for (std::size_t i = lo; i < T; ++i) {
            xs.push_back(static_cast<double>(i));
            ys.push_back(trace.cumulative_regret[i]);
        }
        out.linear_slope = fit_line(xs, ys).slope;
    }
    return out;
}

}  // namespace rhc
