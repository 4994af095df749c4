#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <utility>

#include "mcrkit/dataset.hpp"
#include "mcrkit/errors.hpp"
#include "mcrkit/model.hpp"
#include "mcrkit/qp1qc.hpp"
#include "mcrkit/quadratic.hpp"
#include "mcrkit/solvable.hpp"

namespace mcrkit {

namespace detail {

/// Design pieces shared by the exact switched-loss formula and the
/// quadratic assembly. The weighting matrix W = (1/(n-1))(11' - I) never
/// gets materialized; products against it use the rank-one structure
/// X1'W y = ((X1'1)(1'y) - X1'y) / (n-1), so every piece is O(n p^2).
struct LinearDesign {
    Eigen::Index n = 0, p1 = 0, p2 = 0;
    double yy = 0.0;                 // y'y
    Eigen::MatrixXd X1tX1, X2tX2, X1tX2, X1tWX2;
    Eigen::VectorXd X1ty, X2ty, X1tWy;

    explicit LinearDesign(const Dataset& data, const Eigen::MatrixXd& x2) {
        n = data.n();
        p1 = data.p1();
        p2 = x2.cols();
        const auto& X1 = data.X1;
        const auto& y = data.y;
        const double nm1 = static_cast<double>(n - 1);
        yy = y.squaredNorm();
        X1tX1 = X1.transpose() * X1;
        X1ty = X1.transpose() * y;
        const Eigen::VectorXd X1t1 = X1.colwise().sum();
        X1tWy = (X1t1 * y.sum() - X1ty) / nm1;
        if (p2 > 0) {
            X2tX2 = x2.transpose() * x2;
            X2ty = x2.transpose() * y;
            X1tX2 = X1.transpose() * x2;
            const Eigen::RowVectorXd X2t1 = x2.colwise().sum();
            X1tWX2 = (X1t1 * X2t1 - X1tX2) / nm1;
        } else {
            X2tX2.resize(0, 0);
            X2ty.resize(0);
            X1tX2.resize(p1, 0);
            X1tWX2.resize(p1, 0);
        }
    }

    /// (Q, q, c) with beta'Q beta - 2q'beta + c == e_orig(f_beta) exactly.
    QuadraticObjective orig_objective() const {
        const auto p = p1 + p2;
        const double inv_n = 1.0 / static_cast<double>(n);
        Eigen::MatrixXd Q(p, p);
        Q.topLeftCorner(p1, p1) = X1tX1;
        if (p2 > 0) {
            Q.topRightCorner(p1, p2) = X1tX2;
            Q.bottomLeftCorner(p2, p1) = X1tX2.transpose();
            Q.bottomRightCorner(p2, p2) = X2tX2;
        }
        Eigen::VectorXd q(p);
        q.head(p1) = X1ty;
        q.tail(p2) = X2ty;
        return {inv_n * Q, inv_n * q, inv_n * yy};
    }

    /// (Q, q, c) with beta'Q beta - 2q'beta + c == e_switch(f_beta) exactly.
    QuadraticObjective switch_objective() const {
        const auto p = p1 + p2;
        const double inv_n = 1.0 / static_cast<double>(n);
        Eigen::MatrixXd Q(p, p);
        Q.topLeftCorner(p1, p1) = X1tX1;
        if (p2 > 0) {
            Q.topRightCorner(p1, p2) = X1tWX2;
            Q.bottomLeftCorner(p2, p1) = X1tWX2.transpose();
            Q.bottomRightCorner(p2, p2) = X2tX2;
        }
        Eigen::VectorXd q(p);
        q.head(p1) = X1tWy;
        q.tail(p2) = X2ty;
        return {inv_n * Q, inv_n * q, inv_n * yy};
    }
};

} // namespace detail

/// Class of linear models f_beta(x) = x1'beta1 + x2'beta2 under squared
/// error, optionally with an appended intercept column (kept inside the X2
/// block so it is never switched) and an optional ellipsoid constraint on
/// beta. Supplies the exact quadratic reductions for both empirical losses
/// and global combination solves for the MCR search.
struct LinearClassOptions {
    bool add_intercept = true;
    std::optional<EllipsoidConstraint> constraint;
};

class LinearClass final : public SolvableClass {
  public:
    using Options = LinearClassOptions;

    LinearClass(const Dataset& data, Options opts = {})
        : opts_(std::move(opts)), p1_(data.p1()) {
        Eigen::MatrixXd x2;
        if (opts_.add_intercept) {
            x2.resize(data.n(), data.p2() + 1);
            if (data.p2() > 0) x2.leftCols(data.p2()) = data.X2;
            x2.col(data.p2()).setOnes();
        } else {
            x2 = data.X2;
        }
        design_ = std::make_unique<detail::LinearDesign>(data, x2);
        orig_ = design_->orig_objective();
        switch_ = design_->switch_objective();
        if (opts_.constraint && opts_.constraint->M.rows() != orig_.dim())
            throw DimensionMismatch("constraint dimension does not match coefficient dimension");
    }

    Eigen::Index dim() const { return orig_.dim(); }
    Eigen::Index p1() const { return p1_; }
    bool has_intercept() const { return opts_.add_intercept; }
    const std::optional<EllipsoidConstraint>& constraint() const { return opts_.constraint; }

    const QuadraticObjective& orig_objective() const { return orig_; }
    const QuadraticObjective& switch_objective() const { return switch_; }

    /// Objective of xi_orig * e_orig + xi_switch * e_switch as an exact
    /// quadratic in beta, constant term included.
    QuadraticObjective combination(double xi_orig, double xi_switch) const {
        return orig_.scaled(xi_orig) + switch_.scaled(xi_switch);
    }

    double e_orig_of(const Eigen::VectorXd& beta) const { return orig_.value(beta); }
    double e_switch_of(const Eigen::VectorXd& beta) const { return switch_.value(beta); }

    ModelPtr make_model(const Eigen::VectorXd& beta) const {
        if (opts_.add_intercept) {
            const Eigen::Index p2 = dim() - p1_ - 1;
            return std::make_shared<LinearModel>(beta.head(p1_), beta.segment(p1_, p2),
                                                 beta[dim() - 1]);
        }
        return std::make_shared<LinearModel>(beta.head(p1_), beta.tail(dim() - p1_));
    }

    /// Coefficient vector of a model in this class's layout; for intercept
    /// classes the caller's beta2 gains a trailing intercept slot.
    Eigen::VectorXd embed(const Eigen::VectorXd& beta1, const Eigen::VectorXd& beta2,
                          double intercept = 0.0) const {
        Eigen::VectorXd beta(dim());
        beta.head(p1_) = beta1;
        if (opts_.add_intercept) {
            beta.segment(p1_, beta2.size()) = beta2;
            beta[dim() - 1] = intercept;
        } else {
            beta.tail(beta2.size()) = beta2;
        }
        return beta;
    }

    ProbeOutcome minimize_combination(double xi_orig, double xi_switch) const override {
        const QuadraticObjective obj = combination(xi_orig, xi_switch);
        QpSolution sol;
        if (opts_.constraint) {
            sol = solve_qp1qc(obj, *opts_.constraint);
        } else {
            sol = solve_unconstrained(obj);
            if (sol.unbounded())
                throw UnboundedCombination(
                    "combination (" + std::to_string(xi_orig) + ", " + std::to_string(xi_switch) +
                    ") is unbounded over the unconstrained linear class");
        }
        ProbeOutcome out;
        out.model = make_model(sol.argmin);
        out.objective_value = sol.value;
        out.e_orig = e_orig_of(sol.argmin);
        out.e_switch = e_switch_of(sol.argmin);
        return out;
    }

  private:
    Options opts_;
    Eigen::Index p1_;
    std::unique_ptr<detail::LinearDesign> design_;
    QuadraticObjective orig_;
    QuadraticObjective switch_;
};

/// Theorem-2 evaluation of the switched loss for a linear model in O(n p^2),
/// exactly equal to the pairwise definition.
inline double e_switch_fast(const LinearModel& model, const Dataset& data) {
    detail::LinearDesign d(data, data.X2);
    Eigen::VectorXd beta(data.p1() + data.p2());
    beta.head(data.p1()) = model.beta1();
    beta.tail(data.p2()) = model.beta2();
    return d.switch_objective().value(beta);
}

/// Exact quadratic for xi_orig * e_orig + xi_switch * e_switch over the raw
/// [X1 X2] coefficient layout (no intercept appended).
inline QuadraticObjective quadratic_combination(const Dataset& data, double xi_orig,
                                                double xi_switch) {
    detail::LinearDesign d(data, data.X2);
    return d.orig_objective().scaled(xi_orig) + d.switch_objective().scaled(xi_switch);
}

} // namespace mcrkit
