#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "rhc/errors.hpp"
#include "rhc/linalg.hpp"
#include "rhc/riccati.hpp"
#include "rhc/rng.hpp"
#include "rhc/types.hpp"

// Exact closed-loop performance on the true system: stability tests, the
// stationary covariance Σ_K, the average infinite-horizon cost J_K, and the
// gap to the optimal controller. J_K is computed deterministically from the
// Lyapunov solution; the Monte-Carlo estimator is kept as an oracle.

namespace rhc {

// Spectral radii this close to 1 make the stationary covariance meaningless.
inline constexpr double kStabilityMargin = 1e-9;

inline bool is_stabilizing(const LinearSystem& sys, const MatrixXd& K) {
    return spectral_radius(sys.A - sys.B * K) < 1.0 - kStabilityMargin;
}

/// Stationary covariance Σ_K of x under u = −Kx: the solution of
/// Σ = LΣLᵀ + σ_w²I with L = A − BK, accumulated as Σ_{t≥0} L^t(σ_w²I)(Lᵀ)^t.
/// The series is summed with term doubling until the Lyapunov residual is
/// below 1e-12.
inline MatrixXd solve_lyapunov(const LinearSystem& true_sys, const MatrixXd& K) {
    if (K.rows() != true_sys.m() || K.cols() != true_sys.n())
        throw DimensionError("solve_lyapunov: K must be m x n");
    const MatrixXd L = true_sys.A - true_sys.B * K;
    if (spectral_radius(L) >= 1.0 - kStabilityMargin)
        throw Unstable("solve_lyapunov: K does not stabilize the system");

    const Eigen::Index n = true_sys.n();
    const double w = true_sys.sigma_w * true_sys.sigma_w;
    const MatrixXd W = w * MatrixXd::Identity(n, n);
    if (w == 0.0) return MatrixXd::Zero(n, n);

    // S_k = Σ_{t<2^k} L^t W (Lᵀ)^t; doubling: S ← S + M S Mᵀ, M ← M².
    MatrixXd S = W;
    MatrixXd M = L;
    for (int k = 0; k < 64; ++k) {
        const double residual = spectral_norm(S - L * S * L.transpose() - W);
        if (residual <= 1e-12) return symmetrize(S);
        S = symmetrize(S + M * S * M.transpose());
        M = M * M;
        if (!S.allFinite()) throw NonConvergence("solve_lyapunov: accumulation diverged");
    }
    // The series is exhausted after 2^64 terms; ill-conditioned Σ may bottom
    // out at roundoff above the absolute target.
    const double residual = spectral_norm(S - L * S * L.transpose() - W);
    if (residual <= std::max(1e-12, 1e-14 * spectral_norm(S))) return symmetrize(S);
    throw NonConvergence("solve_lyapunov: residual did not reach 1e-12");
}

/// Average infinite-horizon cost J_K = tr((Q + KᵀRK) Σ_K).
inline double infinite_horizon_cost(const LinearSystem& true_sys, const CostSpec& cost,
                                    const MatrixXd& K) {
    detail::check_compatible(true_sys, cost);
    const MatrixXd Sigma = solve_lyapunov(true_sys, K);
    return ((cost.Q + K.transpose() * cost.R * K) * Sigma).trace();
}

struct EmpiricalCost {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Monte-Carlo estimate of J_K: simulate x⁺ = Ax + Bu + σ_w w with u = −Kx
/// from x₀ = 0, average the stage cost over T steps, then across trials.
/// Each trial draws from a stream derived from (seed, trial), so parallel
/// and serial execution agree.
inline EmpiricalCost empirical_cost(const LinearSystem& true_sys, const CostSpec& cost,
                                    const MatrixXd& K, int T, int trials, std::uint64_t seed) {
    detail::check_compatible(true_sys, cost);
    if (T < 1 || trials < 1)
        throw std::invalid_argument("empirical_cost: T and trials must be >= 1");
    const Eigen::Index n = true_sys.n();
    std::vector<double> avg(static_cast<std::size_t>(trials));
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(derive_seed(seed, {0x7472u, static_cast<std::uint64_t>(trial)}));
        VectorXd x = VectorXd::Zero(n);
        double acc = 0.0;
        for (int t = 0; t < T; ++t) {
            const VectorXd u = -K * x;
            acc += cost.stage_cost(x, u);
            x = true_sys.A * x + true_sys.B * u + true_sys.sigma_w * rng.normal_vector(n);
            if (x.norm() > 1e8)
                throw DivergedError("empirical_cost: trajectory diverged (unstable K?)");
        }
        avg[static_cast<std::size_t>(trial)] = acc / T;
    }
    EmpiricalCost out;
    for (double v : avg) out.mean += v;
    out.mean /= trials;
    if (trials > 1) {
        double ss = 0.0;
        for (double v : avg) ss += (v - out.mean) * (v - out.mean);
        out.stderr_ = std::sqrt(ss / (trials - 1)) / std::sqrt(static_cast<double>(trials));
    }
    return out;
}

/// J_K − J_{K★}, with K★ recomputed from the true system's DARE.
inline double performance_gap(const LinearSystem& true_sys, const CostSpec& cost,
                              const MatrixXd& K, double dare_tol = 1e-12) {
    const OptimalSolution opt = solve_optimal(true_sys, cost, dare_tol);
    return infinite_horizon_cost(true_sys, cost, K) -
           infinite_horizon_cost(true_sys, cost, opt.K_star);
}

/// Full closed-loop report for a static gain; Σ_K, J_K, and the gap are
/// present only when K stabilizes the true system.
struct PerformanceReport {
    MatrixXd K;
    bool stable = false;
    double spectral_radius = 0.0;
    std::optional<MatrixXd> Sigma_K;
    std::optional<double> J_K;
    std::optional<double> gap;
};

inline PerformanceReport evaluate_controller(const LinearSystem& true_sys, const CostSpec& cost,
                                             const MatrixXd& K, double dare_tol = 1e-12) {
    PerformanceReport rep;
    rep.K = K;
    rep.spectral_radius = spectral_radius(true_sys.A - true_sys.B * K);
    rep.stable = rep.spectral_radius < 1.0 - kStabilityMargin;
    if (rep.stable) {
        rep.Sigma_K = solve_lyapunov(true_sys, K);
        rep.J_K = ((cost.Q + K.transpose() * cost.R * K) * (*rep.Sigma_K)).trace();
        const OptimalSolution opt = solve_optimal(true_sys, cost, dare_tol);
        rep.gap = *rep.J_K - infinite_horizon_cost(true_sys, cost, opt.K_star);
    }
    return rep;
}

}  // namespace rhc
