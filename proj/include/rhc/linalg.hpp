#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "rhc/errors.hpp"

namespace rhc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Spectral norm (largest singular value).
inline double spectral_norm(const MatrixXd& X) {
    if (X.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXd> svd(X);
    return svd.singularValues()(0);
}

/// Largest eigenvalue modulus of a square matrix.
inline double spectral_radius(const MatrixXd& M) {
    if (M.rows() != M.cols()) throw DimensionError("spectral_radius: matrix must be square");
    if (M.size() == 0) return 0.0;
    Eigen::EigenSolver<MatrixXd> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericalError("spectral_radius: eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline MatrixXd symmetrize(const MatrixXd& X) { return 0.5 * (X + X.transpose()); }

/// Extreme eigenvalues of a symmetric matrix.
inline double min_eigenvalue(const MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("min_eigenvalue: eigensolver failed");
    return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("max_eigenvalue: eigensolver failed");
    return es.eigenvalues().maxCoeff();
}

// PSD acceptance: eigenvalues down to -1e-10 * ||X|| count as nonnegative,
// absorbing rounding at iteration boundaries.
inline bool is_psd(const MatrixXd& S, double rel_tol = 1e-10) {
    if (S.rows() != S.cols()) return false;
    if (S.size() == 0) return true;
    const double scale = spectral_norm(S);
    return min_eigenvalue(symmetrize(S)) >= -rel_tol * std::max(scale, 1.0);
}

inline bool is_symmetric(const MatrixXd& S, double tol = 1e-12) {
    return S.rows() == S.cols() && (S - S.transpose()).norm() <= tol * std::max(1.0, S.norm());
}

}  // namespace rhc
