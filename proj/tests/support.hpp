#pragma once

// Shared test fixtures: instance generators and independent oracles. The
// oracles are deliberately coded from the defining formulas (explicit
// inverses, textbook recursions) so they exercise a different algebraic path
// than the library.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rhc/rhc.hpp"

namespace testsupport {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// The 2D open-loop-unstable study system with unit noise.
inline rhc::LinearSystem study_system() {
    MatrixXd A(2, 2);
    A << 1.0, 2.0, 1.0, 0.5;
    MatrixXd B(2, 1);
    B << 1.0, 0.5;
    return rhc::LinearSystem(A, B, 1.0);
}

inline MatrixXd study_terminal() {
    MatrixXd P(2, 2);
    P << 2.4, 1.2, 1.2, 3.4;
    return P;
}

inline rhc::CostSpec identity_cost(Eigen::Index n, Eigen::Index m) {
    return rhc::CostSpec(MatrixXd::Identity(n, n), MatrixXd::Identity(m, m));
}

/// Random system with spectral radius scaled to rho: stabilizable (a.s.) and
/// under identity weights it satisfies the strong assumption.
inline rhc::LinearSystem random_system(rhc::Rng& rng, Eigen::Index n, Eigen::Index m, double rho,
                                       double sigma_w = 1.0) {
    MatrixXd A = rng.normal_matrix(n, n);
    const double r = rhc::spectral_radius(A);
    if (r > 1e-12) A *= rho / r;
    MatrixXd B = rng.normal_matrix(n, m);
    return rhc::LinearSystem(A, B, sigma_w);
}

/// Random PSD matrix of roughly the given scale.
inline MatrixXd random_psd(rhc::Rng& rng, Eigen::Index n, double scale = 1.0) {
    const MatrixXd G = rng.normal_matrix(n, n);
    return rhc::symmetrize(scale * G * G.transpose() / static_cast<double>(n));
}

/// Perturbed copy of a system with max{‖ΔA‖, ‖ΔB‖} equal to eps exactly.
inline rhc::LinearSystem perturb_system(rhc::Rng& rng, const rhc::LinearSystem& sys, double eps) {
    MatrixXd dA = rng.normal_matrix(sys.n(), sys.n());
    MatrixXd dB = rng.normal_matrix(sys.n(), sys.m());
    const double scale = std::max(rhc::spectral_norm(dA), rhc::spectral_norm(dB));
    if (scale > 0.0) {
        dA *= eps / scale;
        dB *= eps / scale;
    }
    return rhc::LinearSystem(sys.A + dA, sys.B + dB, sys.sigma_w);
}

// --------------------------------------------------------------------------
// Oracles
// --------------------------------------------------------------------------

/// Riccati map through the Woodbury form with explicit inverses:
/// AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q.
inline MatrixXd riccati_map_woodbury(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                                     const MatrixXd& R, const MatrixXd& P) {
    const MatrixXd inner = (R + B.transpose() * P * B).inverse();
    return A.transpose() * P * A -
           A.transpose() * P * B * inner * B.transpose() * P * A + Q;
}

/// Finite-horizon backward dynamic programming for the N-step problem with
/// terminal weight P_terminal; returns the first-step feedback gain and the
/// full cost-to-go stack (P_N first).
struct DpSolution {
    std::vector<MatrixXd> cost_to_go;  // P_N, P_{N-1}, ..., P_0
    std::vector<MatrixXd> gains;       // K_{N-1}, ..., K_0
};

inline DpSolution backward_dp(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                              const MatrixXd& R, const MatrixXd& P_terminal, int N) {
    DpSolution sol;
    MatrixXd P = P_terminal;
    sol.cost_to_go.push_back(P);
    for (int k = N - 1; k >= 0; --k) {
        const MatrixXd K = (R + B.transpose() * P * B).inverse() * B.transpose() * P * A;
        const MatrixXd Acl = A - B * K;
        P = Q + K.transpose() * R * K + Acl.transpose() * P * Acl;
        P = 0.5 * (P + P.transpose());
        sol.gains.push_back(K);
        sol.cost_to_go.push_back(P);
    }
    return sol;
}

/// First-step feedback of the N-step problem (what the receding-horizon
/// controller applies).
inline MatrixXd dp_first_gain(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                              const MatrixXd& R, const MatrixXd& P_terminal, int N) {
    return backward_dp(A, B, Q, R, P_terminal, N).gains.back();
}

/// Positive root of the scalar fixed-point equation
/// p = a²p/(1 + s p) + q with s = b²/r, i.e. s p² + (1 − a² − q s) p − q = 0.
inline double scalar_dare_root(double a, double b, double q, double r) {
    const double s = b * b / r;
    const double c1 = 1.0 - a * a - q * s;
    const double disc = c1 * c1 + 4.0 * s * q;
    return (-c1 + std::sqrt(disc)) / (2.0 * s);
}

/// Structure-preserving doubling iteration for the DARE; an independent
/// solver with quadratic convergence.
inline MatrixXd solve_dare_doubling(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                                    const MatrixXd& R, int max_iter = 100) {
    const Eigen::Index n = A.rows();
    const MatrixXd I = MatrixXd::Identity(n, n);
    MatrixXd Ak = A;
    MatrixXd G = B * R.inverse() * B.transpose();
    MatrixXd H = Q;
    for (int k = 0; k < max_iter; ++k) {
        const MatrixXd W = (I + G * H).inverse();
        const MatrixXd A_next = Ak * W * Ak;
        const MatrixXd G_next = G + Ak * W * G * Ak.transpose();
        const MatrixXd H_next = H + Ak.transpose() * H * W * Ak;
        if ((H_next - H).norm() <= 1e-14 * std::max(1.0, H.norm()))
            return 0.5 * (H_next + H_next.transpose());
        Ak = A_next;
        G = 0.5 * (G_next + G_next.transpose());
        H = 0.5 * (H_next + H_next.transpose());
    }
    throw std::runtime_error("solve_dare_doubling: no convergence");
}

/// Direct Lyapunov solve via Kronecker vectorization: Σ = LΣLᵀ + W.
inline MatrixXd lyapunov_direct(const MatrixXd& L, const MatrixXd& W) {
    const Eigen::Index n = L.rows();
    MatrixXd M = MatrixXd::Identity(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index l = 0; l < n; ++l)
                    M(i * n + j, k * n + l) -= L(i, k) * L(j, l);
    VectorXd w(n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) w(i * n + j) = W(i, j);
    const VectorXd sigma = M.partialPivLu().solve(w);
    MatrixXd S(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) S(i, j) = sigma(i * n + j);
    return 0.5 * (S + S.transpose());
}

inline double matrix_gap(const MatrixXd& X, const MatrixXd& Y) {
    return (X - Y).cwiseAbs().maxCoeff();
}

}  // namespace testsupport
