#pragma once

#include <Eigen/Dense>

#include "rhc/errors.hpp"
#include "rhc/linalg.hpp"

namespace rhc {

/// Discrete-time linear model x⁺ = A x + B u + w, with w white noise of
/// covariance σ_w² I and x₀ of covariance σ_x² I. Holds either the true
/// system or a nominal (estimated/perturbed) one.
struct LinearSystem {
    MatrixXd A;
    MatrixXd B;
    double sigma_w = 0.0;
    double sigma_x = 0.0;

    LinearSystem(MatrixXd A_in, MatrixXd B_in, double sigma_w_in = 0.0, double sigma_x_in = 0.0)
        : A(std::move(A_in)), B(std::move(B_in)), sigma_w(sigma_w_in), sigma_x(sigma_x_in) {
        if (A.rows() != A.cols()) throw DimensionError("LinearSystem: A must be square");
        if (B.rows() != A.rows()) throw DimensionError("LinearSystem: B row count must match A");
        if (B.cols() < 1) throw DimensionError("LinearSystem: need at least one input");
        if (!A.allFinite() || !B.allFinite())
            throw NumericalError("LinearSystem: non-finite entries");
        if (sigma_w < 0.0 || sigma_x < 0.0)
            throw std::invalid_argument("LinearSystem: noise scales must be nonnegative");
    }

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index m() const { return B.cols(); }
};

/// Stage cost l(x, u) = xᵀQx + uᵀRu. Q and R are symmetrized on
/// construction; R must be positive definite and Q positive semidefinite.
struct CostSpec {
    MatrixXd Q;
    MatrixXd R;

    CostSpec(const MatrixXd& Q_in, const MatrixXd& R_in)
        : Q(symmetrize(Q_in)), R(symmetrize(R_in)) {
        if (Q_in.rows() != Q_in.cols() || R_in.rows() != R_in.cols())
            throw DimensionError("CostSpec: Q and R must be square");
        if ((Q_in - Q_in.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q_in.norm()) ||
            (R_in - R_in.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, R_in.norm()))
            throw std::invalid_argument("CostSpec: Q and R must be symmetric to 1e-12");
        if (min_eigenvalue(R) <= 0.0) throw std::invalid_argument("CostSpec: R must be positive definite");
        if (!is_psd(Q)) throw std::invalid_argument("CostSpec: Q must be positive semidefinite");
    }

    double stage_cost(const VectorXd& x, const VectorXd& u) const {
        return x.dot(Q * x) + u.dot(R * u);
    }

    // Q ⪰ I and R ⪰ I (the strong regularity assumption; the weak one only
    // needs R ≻ 0, Q ⪰ 0).
    bool strong_assumption(double tol = 1e-12) const {
        const Eigen::Index n = Q.rows(), m = R.rows();
        return min_eigenvalue(Q - MatrixXd::Identity(n, n)) >= -tol &&
               min_eigenvalue(R - MatrixXd::Identity(m, m)) >= -tol;
    }
};

/// Fixed point of the Riccati map together with solver diagnostics.
struct RiccatiSolution {
    MatrixXd P;
    int iterations = 0;
    double residual = 0.0;  // ‖P − R(P)‖ in spectral norm
};

/// (P★, K★, L★, J★) bundle for a system/cost pair.
struct OptimalSolution {
    RiccatiSolution riccati;
    MatrixXd K_star;  // optimal static gain
    MatrixXd L_star;  // A − B K★
    double J_star = 0.0;
};

/// Receding-horizon controller parameters: prediction horizon N ≥ 1 and the
/// terminal weight on the predicted final state.
struct RhcConfig {
    int N = 1;
    MatrixXd P_terminal;

    RhcConfig(int N_in, MatrixXd P_in) : N(N_in), P_terminal(std::move(P_in)) {
        if (N < 1) throw std::invalid_argument("RhcConfig: N must be >= 1");
        if (P_terminal.rows() != P_terminal.cols())
            throw DimensionError("RhcConfig: P_terminal must be square");
        if (!is_psd(P_terminal))
            throw std::invalid_argument("RhcConfig: P_terminal must be PSD");
        P_terminal = symmetrize(P_terminal);
    }
};

}  // namespace rhc
