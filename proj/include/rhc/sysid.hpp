#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rhc/errors.hpp"
#include "rhc/linalg.hpp"
#include "rhc/rng.hpp"
#include "rhc/types.hpp"

// Least-squares identification from independent rollouts: T experiments are
// run from x₀ = 0 with i.i.d. Gaussian inputs, and [Â B̂] is fit on one
// transition per experiment, keeping the regression rows independent.

namespace rhc {

/// T independent rollouts of length t_h, each from x₀ = 0.
struct RolloutData {
    std::vector<std::vector<VectorXd>> states;  // per rollout, length t_h + 1
    std::vector<std::vector<VectorXd>> inputs;  // per rollout, length t_h
    int num_rollouts = 0;
    int t_h = 0;
    std::uint64_t seed = 0;
};

struct EstimateResult {
    MatrixXd A_hat;
    MatrixXd B_hat;
    std::optional<double> eps_measured;  // max{‖Â−A★‖, ‖B̂−B★‖} when truth given
    double regressor_min_singular = 0.0;
};

/// Simulates T rollouts of the true system with u_t ~ N(0, σ_u² I).
/// Rollout l draws from the stream derived from (seed, l), so generation can
/// be parallelized without changing the data.
inline RolloutData generate_rollouts(const LinearSystem& true_sys, double sigma_u, int T, int t_h,
                                     std::uint64_t seed) {
    if (T < 1 || t_h < 1)
        throw std::invalid_argument("generate_rollouts: T and t_h must be >= 1");
    if (sigma_u < 0.0) throw std::invalid_argument("generate_rollouts: sigma_u must be >= 0");
    const Eigen::Index n = true_sys.n();
    const Eigen::Index m = true_sys.m();

    RolloutData data;
    data.num_rollouts = T;
    data.t_h = t_h;
    data.seed = seed;
    data.states.resize(static_cast<std::size_t>(T));
    data.inputs.resize(static_cast<std::size_t>(T));
    for (int l = 0; l < T; ++l) {
        Rng rng(derive_seed(seed, {0x726fu, static_cast<std::uint64_t>(l)}));
        auto& xs = data.states[static_cast<std::size_t>(l)];
        auto& us = data.inputs[static_cast<std::size_t>(l)];
        xs.reserve(static_cast<std::size_t>(t_h) + 1);
        us.reserve(static_cast<std::size_t>(t_h));
        VectorXd x = VectorXd::Zero(n);
        xs.push_back(x);
        for (int t = 0; t < t_h; ++t) {
            const VectorXd u = sigma_u * rng.normal_vector(m);
            x = true_sys.A * x + true_sys.B * u + true_sys.sigma_w * rng.normal_vector(n);
            us.push_back(u);
            xs.push_back(x);
        }
    }
    return data;
}

/// Core LS solve: given rows z_lᵀ = [x_lᵀ u_lᵀ] of the regressor and targets
/// y_l (next states), fits [A B] minimizing Σ‖y − [A B]z‖².
inline EstimateResult ls_solve(const MatrixXd& regressor, const MatrixXd& targets,
                               Eigen::Index n, Eigen::Index m) {
    if (regressor.cols() != n + m || targets.cols() != n ||
        regressor.rows() != targets.rows())
        throw DimensionError("ls_solve: inconsistent regression shapes");
    if (regressor.rows() < n + m)
        throw RankDeficient("ls_solve: fewer samples than parameters");

    Eigen::BDCSVD<MatrixXd> svd(regressor, Eigen::ComputeThinU | Eigen::ComputeThinV);
    EstimateResult out;
    out.regressor_min_singular = svd.singularValues().tail(1)(0);
    if (out.regressor_min_singular < 1e-10)
        throw RankDeficient("ls_solve: regressor singular below 1e-10");
    const MatrixXd theta = svd.solve(targets);  // (n+m) x n, equals [A B]ᵀ
    out.A_hat = theta.topRows(n).transpose();
    out.B_hat = theta.bottomRows(m).transpose();
    return out;
}

/// The multi-rollout estimator: one data point per experiment — the final
/// transition (x_{t_h−1}, u_{t_h−1}) → x_{t_h} of each rollout.
inline EstimateResult ls_estimate(const RolloutData& data,
                                  const LinearSystem* truth = nullptr) {
    if (data.num_rollouts < 1) throw std::invalid_argument("ls_estimate: empty data");
    const auto n = data.states.front().front().size();
    const auto m = data.inputs.front().front().size();
    const int T = data.num_rollouts;

    MatrixXd regressor(T, n + m);
    MatrixXd targets(T, n);
    for (int l = 0; l < T; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        const auto& xs = data.states[ul];
        const auto& us = data.inputs[ul];
        regressor.row(l).head(n) = xs[static_cast<std::size_t>(data.t_h) - 1];
        regressor.row(l).tail(m) = us[static_cast<std::size_t>(data.t_h) - 1];
        targets.row(l) = xs[static_cast<std::size_t>(data.t_h)];
    }
    EstimateResult out = ls_solve(regressor, targets, n, m);
    if (truth != nullptr)
        out.eps_measured = std::max(spectral_norm(out.A_hat - truth->A),
                                    spectral_norm(out.B_hat - truth->B));
    return out;
}

/// Single-trajectory estimator: fits [A B] on every transition
/// (x_t, u_t) → x_{t+1} of one rollout. No independence structure is
/// claimed for the rows; this is the mode used for closed-loop data.
inline EstimateResult ls_estimate_single(const std::vector<VectorXd>& states,
                                         const std::vector<VectorXd>& inputs,
                                         const LinearSystem* truth = nullptr) {
    if (states.size() < 2 || inputs.size() + 1 < states.size())
        throw std::invalid_argument("ls_estimate_single: need states t=0..T and inputs t=0..T-1");
    const Eigen::Index n = states.front().size();
    const Eigen::Index m = inputs.front().size();
    const auto T = static_cast<Eigen::Index>(states.size()) - 1;
    MatrixXd regressor(T, n + m);
    MatrixXd targets(T, n);
    for (Eigen::Index t = 0; t < T; ++t) {
        regressor.row(t).head(n) = states[static_cast<std::size_t>(t)];
        regressor.row(t).tail(m) = inputs[static_cast<std::size_t>(t)];
        targets.row(t) = states[static_cast<std::size_t>(t) + 1];
    }
    EstimateResult out = ls_solve(regressor, targets, n, m);
    if (truth != nullptr)
        out.eps_measured = std::max(spectral_norm(out.A_hat - truth->A),
                                    spectral_norm(out.B_hat - truth->B));
    return out;
}

/// Residual Σ‖x⁺ − A x − B u‖² of a model on the final transitions; used to
/// check estimator optimality against the generating system.
inline double ls_residual(const RolloutData& data, const MatrixXd& A, const MatrixXd& B) {
    double acc = 0.0;
    for (int l = 0; l < data.num_rollouts; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        const auto& xs = data.states[ul];
        const auto& us = data.inputs[ul];
        const VectorXd pred = A * xs[static_cast<std::size_t>(data.t_h) - 1] +
                              B * us[static_cast<std::size_t>(data.t_h) - 1];
        acc += (xs[static_cast<std::size_t>(data.t_h)] - pred).squaredNorm();
    }
    return acc;
}

}  // namespace rhc
