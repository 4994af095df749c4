#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <memory>
#include <utility>

namespace mcrkit {

/// A fixed prediction rule. Implementations must be deterministic:
/// identical inputs yield identical outputs.
class PredictionModel {
  public:
    virtual ~PredictionModel() = default;
    virtual double predict(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const = 0;
};

/// Wraps an arbitrary callable as a model; handy for tests and for the
/// simulation lab's true regression functions.
class FunctionModel final : public PredictionModel {
  public:
    using Fn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
    explicit FunctionModel(Fn fn) : fn_(std::move(fn)) {}
    double predict(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const override {
        return fn_(x1, x2);
    }

  private:
    Fn fn_;
};

/// f_beta(x) = x1'beta1 + x2'beta2 + intercept. Within the solver classes
/// the intercept is an explicit constant column appended to the X2 block
/// (so it is never switched); here it is kept as a scalar so the model can
/// be evaluated against raw covariate rows.
class LinearModel final : public PredictionModel {
  public:
    LinearModel(Eigen::VectorXd beta1, Eigen::VectorXd beta2, double intercept = 0.0)
        : beta1_(std::move(beta1)), beta2_(std::move(beta2)), intercept_(intercept) {}

    double predict(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const override {
        double v = intercept_ + beta1_.dot(x1);
        if (beta2_.size() > 0) v += beta2_.dot(x2);
        return v;
    }

    const Eigen::VectorXd& beta1() const { return beta1_; }
    const Eigen::VectorXd& beta2() const { return beta2_; }
    double intercept() const { return intercept_; }

    Eigen::VectorXd beta() const {
        Eigen::VectorXd b(beta1_.size() + beta2_.size());
        b.head(beta1_.size()) = beta1_;
        b.tail(beta2_.size()) = beta2_;
        return b;
    }

  private:
    Eigen::VectorXd beta1_;
    Eigen::VectorXd beta2_;
    double intercept_;
};

/// Pointwise loss. SquaredError is (y - f(x))^2; Hinge(margin) is
/// (margin - y*f(x))_+.
struct LossKind {
    enum class Kind { SquaredError, Hinge };
    Kind kind = Kind::SquaredError;
    double margin = 1.0;

    static LossKind squared_error() { return {Kind::SquaredError, 0.0}; }
    static LossKind hinge(double margin = 1.0) { return {Kind::Hinge, margin}; }

    double operator()(double y, double prediction) const {
        if (kind == Kind::SquaredError) {
            const double r = y - prediction;
            return r * r;
        }
        return std::max(0.0, margin - y * prediction);
    }
};

enum class RelianceMode { Ratio, Difference };
enum class SwitchEstimator { Switch, Divide };

using ModelPtr = std::shared_ptr<const PredictionModel>;

} // namespace mcrkit
