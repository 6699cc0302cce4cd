#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "rhc/errors.hpp"
#include "rhc/linalg.hpp"
#include "rhc/types.hpp"

// Riccati machinery: the map P ↦ AᵀP(I + S_B P)⁻¹A + Q, its iteration and
// fixed point, the induced gains and closed-loop matrices, and the state
// transition products used by the perturbation identities. All functions are
// pure; matrix results are symmetrized before return where symmetry is part
// of the contract. Linear systems are solved through pivoted LU / LDLT
// factorizations rather than explicit inverses.

namespace rhc {

namespace detail {

inline void check_compatible(const LinearSystem& sys, const CostSpec& cost) {
    if (cost.Q.rows() != sys.n()) throw DimensionError("Q dimension does not match system");
    if (cost.R.rows() != sys.m()) throw DimensionError("R dimension does not match system");
}

inline void check_square_n(const LinearSystem& sys, const MatrixXd& P, const char* what) {
    if (P.rows() != sys.n() || P.cols() != sys.n())
        throw DimensionError(std::string(what) + ": P dimension does not match system");
}

}  // namespace detail

/// S_B = B R⁻¹ Bᵀ.
inline MatrixXd input_gram(const LinearSystem& sys, const CostSpec& cost) {
    detail::check_compatible(sys, cost);
    return sys.B * cost.R.ldlt().solve(sys.B.transpose());
}

/// One application of the Riccati map: AᵀP(I + S_B P)⁻¹A + Q.
inline MatrixXd riccati_map(const LinearSystem& sys, const CostSpec& cost, const MatrixXd& P) {
    detail::check_compatible(sys, cost);
    detail::check_square_n(sys, P, "riccati_map");
    const Eigen::Index n = sys.n();
    const MatrixXd M = MatrixXd::Identity(n, n) + input_gram(sys, cost) * P;
    Eigen::PartialPivLU<MatrixXd> lu(M);
    const MatrixXd Y = lu.solve(sys.A);  // (I + S_B P)⁻¹ A
    if (!Y.allFinite())
        throw NumericalError("riccati_map: singular (I + S_B P); input is not PSD-compatible");
    return symmetrize(sys.A.transpose() * P * Y + cost.Q);
}

/// i-fold composition of the Riccati map; i = 0 is the identity.
inline MatrixXd riccati_iterate(const LinearSystem& sys, const CostSpec& cost, const MatrixXd& P,
                                int i) {
    if (i < 0) throw InvalidRange("riccati_iterate: i must be >= 0");
    MatrixXd X = P;
    for (int k = 0; k < i; ++k) X = riccati_map(sys, cost, X);
    return X;
}

/// Fixed-point solve of P = R_{A,B}(P) by iterating from P₀ = Q until the
/// residual ‖P − R(P)‖ drops below tol. Requires (A, B) stabilizable and
/// (A, Q^{1/2}) detectable; violations surface as NonConvergence.
inline RiccatiSolution solve_dare(const LinearSystem& sys, const CostSpec& cost,
                                  double tol = 1e-12, int max_iter = 100000) {
    detail::check_compatible(sys, cost);
    MatrixXd P = cost.Q;
    MatrixXd next = riccati_map(sys, cost, P);
    for (int it = 0; it <= max_iter; ++it) {
        if (!next.allFinite()) throw NonConvergence("solve_dare: iteration diverged");
        const double residual = spectral_norm(next - P);
        if (residual <= tol) return RiccatiSolution{P, it, residual};
        P = next;
        next = riccati_map(sys, cost, P);
    }
    throw NonConvergence("solve_dare: no fixed point after max_iter iterations "
                         "(is the system stabilizable and (A, Q^{1/2}) detectable?)");
}

/// Gain map 𝒦_{A,B}(F) = (R + BᵀFB)⁻¹BᵀFA.
inline MatrixXd gain(const LinearSystem& sys, const CostSpec& cost, const MatrixXd& F) {
    detail::check_compatible(sys, cost);
    detail::check_square_n(sys, F, "gain");
    const MatrixXd G = cost.R + sys.B.transpose() * F * sys.B;
    return G.ldlt().solve(sys.B.transpose() * F * sys.A);
}

/// Closed-loop matrix 𝓛_{A,B}(P) = (I + S_B P)⁻¹A = A − B 𝒦_{A,B}(P).
inline MatrixXd closed_loop(const LinearSystem& sys, const CostSpec& cost, const MatrixXd& P) {
    detail::check_compatible(sys, cost);
    detail::check_square_n(sys, P, "closed_loop");
    const Eigen::Index n = sys.n();
    const MatrixXd M = MatrixXd::Identity(n, n) + input_gram(sys, cost) * P;
    return Eigen::PartialPivLU<MatrixXd>(M).solve(sys.A);
}

/// Static gain of the N-step receding-horizon controller on the given
/// (nominal) model: 𝒦(R^(N−1)(P_terminal)).
inline MatrixXd mpc_gain(const LinearSystem& nominal, const CostSpec& cost, const RhcConfig& rhc) {
    const MatrixXd F = riccati_iterate(nominal, cost, rhc.P_terminal, rhc.N - 1);
    return gain(nominal, cost, F);
}

namespace detail {

// Riccati iterates R^(0)(P) .. R^(count)(P), cached once per call.
inline std::vector<MatrixXd> riccati_sequence(const LinearSystem& sys, const CostSpec& cost,
                                              const MatrixXd& P, int count) {
    std::vector<MatrixXd> seq;
    seq.reserve(static_cast<std::size_t>(count) + 1);
    seq.push_back(P);
    for (int k = 0; k < count; ++k) seq.push_back(riccati_map(sys, cost, seq.back()));
    return seq;
}

}  // namespace detail

/// State-transition product Φ^{(j:i)}(P) = 𝓛(R^(j)(P))···𝓛(R^(i−1)(P));
/// the empty product (i = j) is the identity.
inline MatrixXd phi(const LinearSystem& sys, const CostSpec& cost, const MatrixXd& P, int j,
                    int i) {
    if (j < 0 || j > i) throw InvalidRange("phi: require 0 <= j <= i");
    detail::check_square_n(sys, P, "phi");
    const Eigen::Index n = sys.n();
    MatrixXd prod = MatrixXd::Identity(n, n);
    if (i == j) return prod;
    const auto seq = detail::riccati_sequence(sys, cost, P, i - 1);
    for (int t = j; t < i; ++t) prod = prod * closed_loop(sys, cost, seq[static_cast<std::size_t>(t)]);
    return prod;
}

namespace detail {

// Perturbed closed-loop factor 𝓛̄(P) = W(P)[H(P) + 𝓛_{A★,B★}(P)] with
// W(P) = I + (S_{B★} − S_{B̂})P and H(P) = (I + S_{B★}P)⁻¹(Â − A★).
inline MatrixXd perturbed_closed_loop(const LinearSystem& true_sys, const LinearSystem& nominal,
                                      const CostSpec& cost, const MatrixXd& P) {
    const Eigen::Index n = true_sys.n();
    const MatrixXd S_true = input_gram(true_sys, cost);
    const MatrixXd S_nom = input_gram(nominal, cost);
    const MatrixXd W = MatrixXd::Identity(n, n) + (S_true - S_nom) * P;
    Eigen::PartialPivLU<MatrixXd> lu(MatrixXd::Identity(n, n) + S_true * P);
    const MatrixXd H = lu.solve(nominal.A - true_sys.A);
    const MatrixXd L = lu.solve(true_sys.A);
    return W * (H + L);
}

inline void check_shared_dims(const LinearSystem& true_sys, const LinearSystem& nominal) {
    if (true_sys.n() != nominal.n() || true_sys.m() != nominal.m())
        throw DimensionError("true and nominal systems must share dimensions");
}

}  // namespace detail

/// Perturbed state-transition product Φ̄^{(j:i)}(P): the factors 𝓛̄ are
/// evaluated along the TRUE-model Riccati iterates of P.
inline MatrixXd phi_bar(const LinearSystem& true_sys, const LinearSystem& nominal,
                        const CostSpec& cost, const MatrixXd& P, int j, int i) {
    if (j < 0 || j > i) throw InvalidRange("phi_bar: require 0 <= j <= i");
    detail::check_shared_dims(true_sys, nominal);
    detail::check_square_n(true_sys, P, "phi_bar");
    const Eigen::Index n = true_sys.n();
    MatrixXd prod = MatrixXd::Identity(n, n);
    if (i == j) return prod;
    const auto seq = detail::riccati_sequence(true_sys, cost, P, i - 1);
    for (int t = j; t < i; ++t)
        prod = prod * detail::perturbed_closed_loop(true_sys, nominal, cost,
                                                    seq[static_cast<std::size_t>(t)]);
    return prod;
}

namespace detail {

// Cross-model map M(P1, P2) = ÂᵀP2(I+S★P2)⁻¹Â − A★ᵀP2(I+S★P2)⁻¹A★
//                           + Âᵀ(I+P1Ŝ)⁻¹P2(S★−Ŝ)P2(I+S★P2)⁻¹Â.
inline MatrixXd cross_model_map(const LinearSystem& true_sys, const LinearSystem& nominal,
                                const CostSpec& cost, const MatrixXd& P1, const MatrixXd& P2) {
    const Eigen::Index n = true_sys.n();
    const MatrixXd S_true = input_gram(true_sys, cost);
    const MatrixXd S_nom = input_gram(nominal, cost);
    const MatrixXd I = MatrixXd::Identity(n, n);

    Eigen::PartialPivLU<MatrixXd> lu_true(I + S_true * P2);
    const MatrixXd Y_nom = lu_true.solve(nominal.A);   // (I+S★P2)⁻¹Â
    const MatrixXd Y_true = lu_true.solve(true_sys.A); // (I+S★P2)⁻¹A★

    Eigen::PartialPivLU<MatrixXd> lu_nom(I + P1 * S_nom);
    const MatrixXd mid = lu_nom.solve(P2 * (S_true - S_nom) * P2 * Y_nom);

    return nominal.A.transpose() * P2 * Y_nom - true_sys.A.transpose() * P2 * Y_true +
           nominal.A.transpose() * mid;
}

}  // namespace detail

struct RiccatiDifferenceTerms {
    MatrixXd term_a;  // Φ_{Â,B̂}^{(0:i)}(P1)ᵀ (P1 − P2) Φ̄^{(0:i)}(P2)
    MatrixXd term_b;  // additive summation driven by the modeling error
};

/// Decomposition of R^(i)_{Â,B̂}(P1) − R^(i)_{A★,B★}(P2) into the same-model
/// contraction part plus a modeling-error sum; term_a + term_b reproduces the
/// direct difference exactly (up to roundoff).
inline RiccatiDifferenceTerms riccati_difference_terms(const LinearSystem& true_sys,
                                                       const LinearSystem& nominal,
                                                       const CostSpec& cost, const MatrixXd& P1,
                                                       const MatrixXd& P2, int i) {
    if (i < 0) throw InvalidRange("riccati_difference_terms: i must be >= 0");
    detail::check_shared_dims(true_sys, nominal);
    detail::check_square_n(true_sys, P1, "riccati_difference_terms");
    detail::check_square_n(true_sys, P2, "riccati_difference_terms");
    const Eigen::Index n = true_sys.n();
    const MatrixXd I = MatrixXd::Identity(n, n);

    if (i == 0) return {P1 - P2, MatrixXd::Zero(n, n)};

    // Nominal-model iterates of P1 and true-model iterates of P2.
    const auto hat_seq = detail::riccati_sequence(nominal, cost, P1, i - 1);
    const auto true_seq = detail::riccati_sequence(true_sys, cost, P2, i - 1);

    // Suffix products Φ^{(s:i)} and Φ̄^{(s:i)} for s = i..0.
    std::vector<MatrixXd> suffix_hat(static_cast<std::size_t>(i) + 1, I);
    std::vector<MatrixXd> suffix_bar(static_cast<std::size_t>(i) + 1, I);
    for (int s = i - 1; s >= 0; --s) {
        const auto us = static_cast<std::size_t>(s);
        suffix_hat[us] = closed_loop(nominal, cost, hat_seq[us]) * suffix_hat[us + 1];
        suffix_bar[us] =
            detail::perturbed_closed_loop(true_sys, nominal, cost, true_seq[us]) * suffix_bar[us + 1];
    }

    const MatrixXd term_a = suffix_hat[0].transpose() * (P1 - P2) * suffix_bar[0];
    MatrixXd term_b = MatrixXd::Zero(n, n);
    for (int s = 0; s <= i - 1; ++s) {
        const auto us = static_cast<std::size_t>(s);
        term_b += suffix_hat[us + 1].transpose() *
                  detail::cross_model_map(true_sys, nominal, cost, hat_seq[us], true_seq[us]) *
                  suffix_bar[us + 1];
    }
    return {term_a, term_b};
}

/// DARE solve plus the optimal gain, closed-loop matrix, and average cost
/// J★ = σ_w²·tr(P★).
inline OptimalSolution solve_optimal(const LinearSystem& sys, const CostSpec& cost,
                                     double tol = 1e-12, int max_iter = 100000) {
    OptimalSolution out;
    out.riccati = solve_dare(sys, cost, tol, max_iter);
    out.K_star = gain(sys, cost, out.riccati.P);
    out.L_star = sys.A - sys.B * out.K_star;
    out.J_star = sys.sigma_w * sys.sigma_w * out.riccati.P.trace();
    return out;
}

}  // namespace rhc
