#pragma once

#include <Eigen/Dense>
#include <string>

#include "mcrkit/errors.hpp"

namespace mcrkit {

/// Quadratic objective beta'Q beta - 2 q'beta + c. The constant term is
/// carried so objective values (not just argmins) equal the loss
/// combinations they were assembled from.
struct QuadraticObjective {
    Eigen::MatrixXd Q;
    Eigen::VectorXd q;
    double c = 0.0;

    QuadraticObjective() = default;
    QuadraticObjective(Eigen::MatrixXd Q_in, Eigen::VectorXd q_in, double c_in)
        : Q(std::move(Q_in)), q(std::move(q_in)), c(c_in) {
        if (Q.rows() != Q.cols() || Q.rows() != q.size())
            throw DimensionMismatch("quadratic objective dimensions disagree");
        const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
        if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw Error("quadratic objective matrix is not symmetric");
        Q = 0.5 * (Q + Q.transpose().eval());
    }

    Eigen::Index dim() const { return q.size(); }

    double value(const Eigen::VectorXd& beta) const {
        return beta.dot(Q * beta) - 2.0 * q.dot(beta) + c;
    }

    QuadraticObjective operator+(const QuadraticObjective& other) const {
        return {Q + other.Q, q + other.q, c + other.c};
    }

    QuadraticObjective scaled(double s) const { return {s * Q, s * q, s * c}; }
};

/// Feasible set { beta : beta' M beta <= radius } with M symmetric positive
/// definite.
struct EllipsoidConstraint {
    Eigen::MatrixXd M;
    double radius = 0.0;

    EllipsoidConstraint() = default;
    EllipsoidConstraint(Eigen::MatrixXd M_in, double radius_in)
        : M(std::move(M_in)), radius(radius_in) {
        if (M.rows() != M.cols()) throw DimensionMismatch("constraint matrix must be square");
        if (radius <= 0.0) throw Error("constraint radius must be positive");
    }

    bool contains(const Eigen::VectorXd& beta, double rtol = 1e-9) const {
        return beta.dot(M * beta) <= radius * (1.0 + rtol);
    }
};

} // namespace mcrkit
