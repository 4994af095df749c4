#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "mcrkit/errors.hpp"

namespace mcrkit {

/// Radial basis kernel k(x, x') = exp(-|x - x'|^2 / (2 sigma)). The
/// bandwidth enters as a squared length scale.
struct KernelSpec {
    enum class Kind { RBF };
    Kind kind = Kind::RBF;
    double sigma = 1.0;

    static KernelSpec rbf(double sigma) {
        if (sigma <= 0.0) throw Error("RBF bandwidth must be positive");
        return {Kind::RBF, sigma};
    }

    double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const {
        return std::exp(-(x - xp).squaredNorm() / (2.0 * sigma));
    }
};

/// Feature matrix with entry (i, j) = k(X_i, D_j).
inline Eigen::MatrixXd kernel_features(const Eigen::MatrixXd& X, const Eigen::MatrixXd& D,
                                       const KernelSpec& kernel) {
    if (X.cols() != D.cols())
        throw DimensionMismatch("kernel feature columns disagree: X has " +
                                std::to_string(X.cols()) + ", dictionary has " +
                                std::to_string(D.cols()));
    Eigen::MatrixXd K(X.rows(), D.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < D.rows(); ++j) {
            K(i, j) = std::exp(-(X.row(i) - D.row(j)).squaredNorm() / (2.0 * kernel.sigma));
        }
    }
    return K;
}

} // namespace mcrkit
