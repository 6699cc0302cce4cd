#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rhc/errors.hpp"
#include "rhc/linalg.hpp"
#include "rhc/riccati.hpp"
#include "rhc/types.hpp"

// Scalar bound evaluators: Lipschitz rate of the Riccati iteration, the
// perturbed decay rates γ₁/γ₂, the Riccati-difference envelope Ê, the
// closed-loop performance-gap bounds, and the horizon recommendation rule.
// Preconditions are reported through BoundReport, never silently assumed:
// several experiments intentionally run outside the (tight) validity region
// and need the violation recorded rather than an exception.

namespace rhc {

/// Scalar inputs shared by all bound formulas.
///   eps_m   modeling error bound  max{‖Â−A★‖, ‖B̂−B★‖} ≤ εₘ
///   eps_p   terminal weight error ‖P − P★‖ ≤ εₚ
///   upsilon uniform norm bound Υ★ ≥ max{‖A★‖, ‖B★‖, ‖P★‖, 1, εₘ}
///   beta    contraction parameter β★ = σ̄(P★)/σ̲(Q)
struct BoundContext {
    double eps_m = 0.0;
    double eps_p = 0.0;
    double upsilon = 1.0;
    double beta = 1.0;
    double p_star_norm = 1.0;
    double sigma_w = 1.0;
    int m_dim = 1;
    double r_min = 1.0;
    double r_max = 1.0;
    double q_min = 1.0;
    bool upsilon_adjusted = false;  // set when Υ★ had to be raised to max(1, εₘ)

    void validate() const {
        if (eps_m < 0.0 || eps_p < 0.0) throw std::invalid_argument("BoundContext: negative error bound");
        if (beta < 1.0) throw std::invalid_argument("BoundContext: beta must be >= 1");
        if (p_star_norm < 1.0) throw std::invalid_argument("BoundContext: p_star_norm must be >= 1");
        if (upsilon < std::max(1.0, eps_m))
            throw std::invalid_argument("BoundContext: upsilon must be >= max(1, eps_m)");
        if (m_dim < 1 || r_min <= 0.0 || r_max < r_min || q_min <= 0.0 || sigma_w < 0.0)
            throw std::invalid_argument("BoundContext: invalid scalar field");
    }

    /// Builds the context from matrices. Υ★ takes the smallest admissible
    /// value max(‖A★‖, ‖B★‖, ‖P★‖, 1, εₘ) to keep the bounds tight; the
    /// upsilon_adjusted flag records when the 1/εₘ floor was the binding term.
    static BoundContext from_matrices(const LinearSystem& true_sys, const CostSpec& cost,
                                      const MatrixXd& P_star, double eps_m, double eps_p) {
        BoundContext ctx;
        ctx.eps_m = eps_m;
        ctx.eps_p = eps_p;
        ctx.p_star_norm = spectral_norm(P_star);
        const double matrix_bound =
            std::max({spectral_norm(true_sys.A), spectral_norm(true_sys.B), ctx.p_star_norm});
        ctx.upsilon = std::max(matrix_bound, std::max(1.0, eps_m));
        ctx.upsilon_adjusted = ctx.upsilon > matrix_bound;
        ctx.q_min = min_eigenvalue(cost.Q);
        ctx.beta = ctx.p_star_norm / ctx.q_min;
        ctx.r_min = min_eigenvalue(cost.R);
        ctx.r_max = max_eigenvalue(cost.R);
        ctx.sigma_w = true_sys.sigma_w;
        ctx.m_dim = static_cast<int>(true_sys.m());
        ctx.validate();
        return ctx;
    }
};

/// Bound value plus the named preconditions it rests on. A violated divisor
/// condition leaves value = +inf.
struct BoundReport {
    double value = 0.0;
    bool preconditions_met = true;
    std::vector<std::string> failed_conditions;

    void fail(std::string name) {
        preconditions_met = false;
        failed_conditions.push_back(std::move(name));
    }
};

/// β★ = σ̄(P★)/σ̲(Q).
inline double beta_star(const MatrixXd& P_star, const MatrixXd& Q) {
    const double q_min = min_eigenvalue(symmetrize(Q));
    if (q_min <= 0.0) throw NumericalError("beta_star: Q must be positive definite");
    return spectral_norm(P_star) / q_min;
}

/// Lipschitz envelope of the Riccati iteration:
/// ‖R^(i)(P1) − R^(i)(P2)‖ ≤ β★(1 − β★⁻¹)^i ‖P1 − P2‖.
inline double lipschitz_bound(const BoundContext& ctx, int i, double diff_norm) {
    if (i < 0) throw InvalidRange("lipschitz_bound: i must be >= 0");
    if (diff_norm < 0.0) throw std::invalid_argument("lipschitz_bound: negative norm");
    return ctx.beta * std::pow(1.0 - 1.0 / ctx.beta, i) * diff_norm;
}

/// Exact-model performance gap bound for the N-step controller:
/// 32 m σ_w² Υ★⁴(√‖P★‖+1)²‖P★‖(σ̄(R)+Υ★³) β★²(1−β★⁻¹)^{2(N−1)} εₚ².
inline BoundReport known_model_gap_bound(const BoundContext& ctx, int N) {
    if (N < 1) throw InvalidRange("known_model_gap_bound: N must be >= 1");
    BoundReport rep;
    const double rate = ctx.beta * std::pow(1.0 - 1.0 / ctx.beta, N - 1);
    const double propagated = rate * ctx.eps_p;  // bound on ‖R^(N−1)(P) − P★‖
    if (ctx.upsilon < propagated) rep.fail("upsilon >= beta*(1-1/beta)^(N-1)*eps_p");
    if (propagated > ctx.r_min / (40.0 * std::pow(ctx.upsilon, 4) * std::pow(ctx.p_star_norm, 1.5)))
        rep.fail("eps_p propagation <= r_min/(40*upsilon^4*p_star_norm^(3/2))");
    const double sp = std::sqrt(ctx.p_star_norm);
    rep.value = 32.0 * ctx.m_dim * ctx.sigma_w * ctx.sigma_w * std::pow(ctx.upsilon, 4) *
                (sp + 1.0) * (sp + 1.0) * ctx.p_star_norm * (ctx.r_max + std::pow(ctx.upsilon, 3)) *
                ctx.beta * ctx.beta * std::pow(1.0 - 1.0 / ctx.beta, 2 * (N - 1)) * ctx.eps_p *
                ctx.eps_p;
    return rep;
}

/// ψ(εₘ, εₚ) = εₘ[1 + (εₘ + 2Υ★)²(β★εₚ + Υ★)].
inline double psi(const BoundContext& ctx) {
    const double a = ctx.eps_m + 2.0 * ctx.upsilon;
    return ctx.eps_m * (1.0 + a * a * (ctx.beta * ctx.eps_p + ctx.upsilon));
}

/// Perturbed decay rate of Φ̄: γ₁ = √β★ ψ + √(1 − β★⁻¹).
inline double gamma1(const BoundContext& ctx) {
    return std::sqrt(ctx.beta) * psi(ctx) + std::sqrt(1.0 - 1.0 / ctx.beta);
}

struct AlphaGamma2 {
    double alpha = 1.0;
    double gamma2 = 0.0;
};

/// α = (1 − 8‖P★‖²εₘ)^{−1/2} and the nominal-model decay rate
/// γ₂ = √(1 − α⁻¹β★⁻¹); requires εₘ < 1/(8‖P★‖²).
inline AlphaGamma2 alpha_gamma2(const BoundContext& ctx) {
    const double prod = 8.0 * ctx.p_star_norm * ctx.p_star_norm * ctx.eps_m;
    if (prod >= 1.0)
        throw ModelErrorTooLarge("alpha_gamma2: eps_m must be < 1/(8*p_star_norm^2)");
    AlphaGamma2 out;
    out.alpha = 1.0 / std::sqrt(1.0 - prod);
    out.gamma2 = std::sqrt(1.0 - 1.0 / (out.alpha * ctx.beta));
    return out;
}

/// ψ̃(εₘ) = (εₘ² + 2Υ★εₘ)[Υ★ + (εₘ + Υ★)²Υ★²], the envelope of the
/// cross-model map M(·, P★). Conservative by construction.
inline double psi_tilde(const BoundContext& ctx) {
    const double s = ctx.eps_m * ctx.eps_m + 2.0 * ctx.upsilon * ctx.eps_m;
    const double b = ctx.eps_m + ctx.upsilon;
    return s * (ctx.upsilon + b * b * ctx.upsilon * ctx.upsilon);
}

/// Envelope of ‖R^(i)_{Â,B̂}(P) − P★‖:
/// Ê = √α β★ { (γ₁γ₂)^i εₚ + ψ̃ (1 − (γ₁γ₂)^i)/(1 − γ₁γ₂) }.
/// Violated preconditions are reported; a non-contractive rate product
/// leaves the value infinite.
inline BoundReport e_hat(const BoundContext& ctx, int i) {
    if (i < 0) throw InvalidRange("e_hat: i must be >= 0");
    BoundReport rep;
    const double prod = 8.0 * ctx.p_star_norm * ctx.p_star_norm * ctx.eps_m;
    if (prod >= 1.0) {
        rep.fail("eps_m < 1/(8*p_star_norm^2)");
        rep.value = std::numeric_limits<double>::infinity();
        return rep;
    }
    const AlphaGamma2 ag = alpha_gamma2(ctx);
    const double g1 = gamma1(ctx);
    const double rate = g1 * ag.gamma2;
    if (rate >= 1.0) {
        rep.fail("gamma1*gamma2 < 1");
        rep.value = std::numeric_limits<double>::infinity();
        return rep;
    }
    const double rate_i = std::pow(rate, i);
    rep.value = std::sqrt(ag.alpha) * ctx.beta *
                (rate_i * ctx.eps_p + psi_tilde(ctx) * (1.0 - rate_i) / (1.0 - rate));
    return rep;
}

/// The sign driver of the horizon trade-off: εₚ − ψ̃/(1 − γ₁γ₂).
/// Positive means longer horizons shrink the bound; negative means they
/// inflate it. Requires γ₁γ₂ < 1.
inline double recommendation_criterion(const BoundContext& ctx) {
    const AlphaGamma2 ag = alpha_gamma2(ctx);
    const double rate = gamma1(ctx) * ag.gamma2;
    if (rate >= 1.0)
        throw RateProductNotContractive("recommendation_criterion: gamma1*gamma2 >= 1");
    return ctx.eps_p - psi_tilde(ctx) / (1.0 - rate);
}

/// Nominal-model performance gap bound for the N-step controller:
/// g = 128 m σ_w²(σ̄(R)+Υ★³)Υ★⁴‖P★‖²[εₘ + Ê(N−1)]².
inline BoundReport mpc_gap_bound(const BoundContext& ctx, int N) {
    if (N < 1) throw InvalidRange("mpc_gap_bound: N must be >= 1");
    BoundReport rep = e_hat(ctx, N - 1);
    const double combined = ctx.eps_m + rep.value;
    if (!(combined <= 1.0 / (40.0 * std::pow(ctx.upsilon, 4) * ctx.p_star_norm * ctx.p_star_norm)))
        rep.fail("eps_m + E_hat <= 1/(40*upsilon^4*p_star_norm^2)");
    rep.value = 128.0 * ctx.m_dim * ctx.sigma_w * ctx.sigma_w *
                (ctx.r_max + std::pow(ctx.upsilon, 3)) * std::pow(ctx.upsilon, 4) *
                ctx.p_star_norm * ctx.p_star_norm * combined * combined;
    return rep;
}

enum class HorizonAdvice { IncreaseToInfinity, DecreaseToOne, Indifferent };

inline const char* to_string(HorizonAdvice a) {
    switch (a) {
        case HorizonAdvice::IncreaseToInfinity: return "increase_to_infinity";
        case HorizonAdvice::DecreaseToOne: return "decrease_to_one";
        case HorizonAdvice::Indifferent: return "indifferent";
    }
    return "?";
}

/// Horizon selection per the sign of εₚ − ψ̃/(1 − γ₁γ₂); ties inside 1e-12
/// are classified Indifferent.
inline HorizonAdvice horizon_recommendation(const BoundContext& ctx) {
    const double c = recommendation_criterion(ctx);
    if (std::abs(c) <= 1e-12) return HorizonAdvice::Indifferent;
    return c > 0.0 ? HorizonAdvice::IncreaseToInfinity : HorizonAdvice::DecreaseToOne;
}

/// Gain deviation envelope for K = 𝒦_{Â,B̂}(F) with ‖F − P★‖ ≤ ε:
/// ‖K − K★‖ ≤ Υ★²(√‖P★‖+1)(3εₘ + 4ε)/σ̲(R).
inline double gain_gap_bound(const BoundContext& ctx, double eps) {
    if (eps < 0.0) throw std::invalid_argument("gain_gap_bound: eps must be >= 0");
    return ctx.upsilon * ctx.upsilon * (std::sqrt(ctx.p_star_norm) + 1.0) *
           (3.0 * ctx.eps_m + 4.0 * eps) / ctx.r_min;
}

/// Performance gap bound for the controller 𝒦_{Â,B̂}(F), ‖F − P★‖ ≤ ε:
/// 32 m σ_w²(σ̄(R)+Υ★³)Υ★⁴(√‖P★‖+1)²‖P★‖(εₘ+ε)²/σ̲(R)².
inline BoundReport controller_gap_bound(const BoundContext& ctx, double eps) {
    if (eps < 0.0) throw std::invalid_argument("controller_gap_bound: eps must be >= 0");
    BoundReport rep;
    if (ctx.upsilon < eps) rep.fail("upsilon >= eps");
    if (8.0 * std::pow(ctx.upsilon, 4) * (ctx.eps_m + eps) / ctx.r_min >
        0.2 / std::pow(ctx.p_star_norm, 1.5))
        rep.fail("8*upsilon^4*(eps_m+eps)/r_min <= (1/5)*p_star_norm^(-3/2)");
    const double sp = std::sqrt(ctx.p_star_norm);
    const double e = ctx.eps_m + eps;
    rep.value = 32.0 * ctx.m_dim * ctx.sigma_w * ctx.sigma_w *
                (ctx.r_max + std::pow(ctx.upsilon, 3)) * std::pow(ctx.upsilon, 4) * (sp + 1.0) *
                (sp + 1.0) * ctx.p_star_norm * e * e / (ctx.r_min * ctx.r_min);
    return rep;
}

struct SimplifiedBound {
    double gamma_bar = 0.0;       // √(1 − β★⁻¹/√2)
    double shape = 0.0;           // (γ̄^{N−1} + εₘ)², sans the problem constant
};

/// Zero-terminal-weight shape bound: gap ≲ C(γ̄^{N−1} + εₘ)² with
/// γ̄ = √(1 − β★⁻¹/√2). The constant C is not computed.
inline SimplifiedBound simplified_bound(const BoundContext& ctx, int N) {
    if (N < 1) throw InvalidRange("simplified_bound: N must be >= 1");
    SimplifiedBound out;
    out.gamma_bar = std::sqrt(1.0 - 1.0 / (ctx.beta * std::sqrt(2.0)));
    const double tail = std::pow(out.gamma_bar, N - 1) + ctx.eps_m;
    out.shape = tail * tail;
    return out;
}

}  // namespace rhc
