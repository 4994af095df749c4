#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "mcrkit/dataset.hpp"
#include "mcrkit/errors.hpp"
#include "mcrkit/kernel.hpp"
#include "mcrkit/model.hpp"
#include "mcrkit/qp1qc.hpp"
#include "mcrkit/quadratic.hpp"
#include "mcrkit/solvable.hpp"

namespace mcrkit {

/// f_alpha(x) = mu + sum_i k(x, D_i) alpha_i.
class RkhsModel final : public PredictionModel {
  public:
    RkhsModel(Eigen::MatrixXd dictionary, KernelSpec kernel, double mu, Eigen::VectorXd alpha)
        : D_(std::move(dictionary)), kernel_(kernel), mu_(mu), alpha_(std::move(alpha)) {}

    double predict(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const override {
        Eigen::VectorXd x(x1.size() + x2.size());
        x << x1, x2;
        double v = mu_;
        for (Eigen::Index i = 0; i < D_.rows(); ++i)
            v += alpha_[i] * std::exp(-(x - D_.row(i).transpose()).squaredNorm() /
                                      (2.0 * kernel_.sigma));
        return v;
    }

    const Eigen::VectorXd& alpha() const { return alpha_; }
    double mu() const { return mu_; }

  private:
    Eigen::MatrixXd D_;
    KernelSpec kernel_;
    double mu_;
    Eigen::VectorXd alpha_;
};

struct RkhsClassOptions {
    std::size_t pair_entry_budget = 200'000'000; // cap on n(n-1) * R
};

/// Kernel regression class with dictionary features and RKHS-norm ball
/// constraint alpha' K_D alpha <= r_k. Minimizing loss combinations over
/// this class is a QP1QC in alpha; both gram blocks are assembled once per
/// dataset, with the switched block accumulated donor-row by donor-row so
/// the n(n-1) x R expansion never materializes whole.
class RkhsClass final : public SolvableClass {
  public:
    RkhsClass(const Dataset& data, Eigen::MatrixXd dictionary, KernelSpec kernel, double mu,
              double r_k, RkhsClassOptions opts = RkhsClassOptions())
        : D_(std::move(dictionary)), kernel_(kernel), mu_(mu), r_k_(r_k) {
        if (r_k_ <= 0.0) throw Error("r_k must be positive");
        const Eigen::Index n = data.n();
        const Eigen::Index R = D_.rows();
        if (D_.cols() != data.p1() + data.p2())
            throw DimensionMismatch("dictionary column count must match p1 + p2");
        const auto pair_entries = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) *
                                  static_cast<std::size_t>(R);
        if (pair_entries > opts.pair_entry_budget)
            throw PairExpansionTooLarge("switched expansion needs " + std::to_string(pair_entries) +
                                        " entries, budget is " +
                                        std::to_string(opts.pair_entry_budget));

        K_D_ = kernel_features(D_, D_, kernel_);
        K_D_ = 0.5 * (K_D_ + K_D_.transpose().eval());
        // Jitter to SPD when numerically rank deficient.
        Eigen::LLT<Eigen::MatrixXd> llt(K_D_);
        if (llt.info() != Eigen::Success) {
            K_D_.diagonal().array() += 1e-10 * K_D_.trace() / static_cast<double>(R);
            llt.compute(K_D_);
            if (llt.info() != Eigen::Success)
                throw SingularConstraint("dictionary gram matrix is not positive definite");
        }

        const Eigen::MatrixXd X = data.covariates();
        const Eigen::MatrixXd K_orig = kernel_features(X, D_, kernel_);
        const Eigen::VectorXd resid = data.y.array() - mu_;
        const double inv_n = 1.0 / static_cast<double>(n);
        Q_orig_ = inv_n * (K_orig.transpose() * K_orig);
        q_orig_ = inv_n * (K_orig.transpose() * resid);
        c_orig_ = inv_n * resid.squaredNorm();

        Eigen::MatrixXd Qs = Eigen::MatrixXd::Zero(R, R);
        Eigen::VectorXd qs = Eigen::VectorXd::Zero(R);
        double cs = 0.0;
        Eigen::MatrixXd block(n - 1, X.cols());
        Eigen::VectorXd target(n - 1);
        for (Eigen::Index donor = 0; donor < n; ++donor) {
            Eigen::Index r = 0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == donor) continue;
                block.row(r).head(data.p1()) = data.X1.row(donor);
                if (data.p2() > 0) block.row(r).tail(data.p2()) = data.X2.row(j);
                target[r] = data.y[j] - mu_;
                ++r;
            }
            const Eigen::MatrixXd Kb = kernel_features(block, D_, kernel_);
            Qs.noalias() += Kb.transpose() * Kb;
            qs.noalias() += Kb.transpose() * target;
            cs += target.squaredNorm();
        }
        const double inv_pairs = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
        Q_switch_ = inv_pairs * Qs;
        q_switch_ = inv_pairs * qs;
        c_switch_ = inv_pairs * cs;
    }

    const Eigen::MatrixXd& dictionary() const { return D_; }
    const Eigen::MatrixXd& gram() const { return K_D_; }
    const KernelSpec& kernel() const { return kernel_; }
    double mu() const { return mu_; }
    double r_k() const { return r_k_; }
    Eigen::Index atoms() const { return D_.rows(); }

    QuadraticObjective orig_objective() const { return {Q_orig_, q_orig_, c_orig_}; }
    QuadraticObjective switch_objective() const { return {Q_switch_, q_switch_, c_switch_}; }
    EllipsoidConstraint constraint() const { return {K_D_, r_k_}; }

    /// Quadratic in alpha equal to xi_orig e_orig(f_alpha) + xi_switch
    /// e_switch(f_alpha), constant included.
    QuadraticObjective combination(double xi_orig, double xi_switch) const {
        return orig_objective().scaled(xi_orig) + switch_objective().scaled(xi_switch);
    }

    double e_orig_of(const Eigen::VectorXd& alpha) const {
        return alpha.dot(Q_orig_ * alpha) - 2.0 * q_orig_.dot(alpha) + c_orig_;
    }
    double e_switch_of(const Eigen::VectorXd& alpha) const {
        return alpha.dot(Q_switch_ * alpha) - 2.0 * q_switch_.dot(alpha) + c_switch_;
    }

    ModelPtr make_model(const Eigen::VectorXd& alpha) const {
        return std::make_shared<RkhsModel>(D_, kernel_, mu_, alpha);
    }

    ProbeOutcome minimize_combination(double xi_orig, double xi_switch) const override {
        const auto sol = solve_qp1qc(combination(xi_orig, xi_switch), constraint());
        ProbeOutcome out;
        out.model = make_model(sol.argmin);
        out.objective_value = sol.value;
        out.e_orig = e_orig_of(sol.argmin);
        out.e_switch = e_switch_of(sol.argmin);
        return out;
    }

  private:
    Eigen::MatrixXd D_;
    KernelSpec kernel_;
    double mu_;
    double r_k_;
    Eigen::MatrixXd K_D_;
    Eigen::MatrixXd Q_orig_, Q_switch_;
    Eigen::VectorXd q_orig_, q_switch_;
    double c_orig_ = 0.0, c_switch_ = 0.0;
};

/// Objective over alpha equal to xi_orig e_orig + xi_switch e_switch,
/// paired with the RKHS-norm ball constraint (K_D, r_k).
inline std::pair<QuadraticObjective, EllipsoidConstraint> rkhs_objective(
    const Dataset& data, const RkhsClass& cls, double xi_orig, double xi_switch) {
    return {cls.combination(xi_orig, xi_switch), cls.constraint()};
}

namespace detail {

inline std::vector<double> sigma_grid(const Eigen::MatrixXd& X, int points = 25) {
    const Eigen::Index n = X.rows();
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (X.row(i) - X.row(j)).squaredNorm();
            if (d > 0.0) d2.push_back(d);
        }
    if (d2.empty()) throw DegenerateData("all covariate rows are identical");
    std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2), d2.end());
    const double base = d2[d2.size() / 2];
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int g = 0; g < points; ++g) {
        const double expo = -2.0 + 4.0 * g / (points - 1);
        grid[static_cast<std::size_t>(g)] = base * std::pow(10.0, expo);
    }
    return grid;
}

} // namespace detail

/// Bandwidth selection by k-fold cross-validated Nadaraya-Watson regression
/// over a log grid spanning [1e-2, 1e2] times the median pairwise squared
/// distance. Ties resolve to the first grid point.
inline double select_bandwidth(const Dataset& train, int folds = 5, int grid_points = 25) {
    const Eigen::Index n = train.n();
    if (folds < 2 || n < folds) throw Error("select_bandwidth needs n >= folds >= 2");
    const Eigen::MatrixXd X = train.covariates();
    const auto grid = detail::sigma_grid(X, grid_points);

    double best_err = std::numeric_limits<double>::infinity();
    double best_sigma = grid.front();
    for (const double sigma : grid) {
        double err = 0.0;
        for (int f = 0; f < folds; ++f) {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (static_cast<int>(i % folds) != f) continue;
                double num = 0.0, den = 0.0, fold_sum = 0.0;
                Eigen::Index fold_count = 0;
                for (Eigen::Index j = 0; j < n; ++j) {
                    if (static_cast<int>(j % folds) == f) continue;
                    const double w =
                        std::exp(-(X.row(i) - X.row(j)).squaredNorm() / (2.0 * sigma));
                    num += w * train.y[j];
                    den += w;
                    fold_sum += train.y[j];
                    ++fold_count;
                }
                const double pred =
                    den > 0.0 ? num / den : fold_sum / static_cast<double>(fold_count);
                const double r = train.y[i] - pred;
                err += r * r;
            }
        }
        if (err < best_err * (1.0 - 1e-12)) {
            best_err = err;
            best_sigma = sigma;
        }
    }
    return best_sigma;
}

/// RKHS-norm radius selection with the same grid discipline as
/// select_bandwidth: a 25-point log grid of multipliers of the lightly
/// ridged least-squares norm, scored by k-fold CV of the constrained fit.
inline double select_r_k(const Dataset& train, const Eigen::MatrixXd& dictionary,
                         const KernelSpec& kernel, double mu, int folds = 5,
                         int grid_points = 25) {
    const Eigen::Index n = train.n();
    if (folds < 2 || n < folds) throw Error("select_r_k needs n >= folds >= 2");
    const Eigen::MatrixXd X = train.covariates();
    const Eigen::MatrixXd K_all = kernel_features(X, dictionary, kernel);
    Eigen::MatrixXd K_D = kernel_features(dictionary, dictionary, kernel);
    K_D = 0.5 * (K_D + K_D.transpose().eval());
    const Eigen::VectorXd resid = train.y.array() - mu;

    // Reference norm from a lightly ridged least squares fit.
    Eigen::MatrixXd G = K_all.transpose() * K_all;
    G.diagonal().array() += 1e-8 * G.trace() / static_cast<double>(G.rows());
    const Eigen::VectorXd alpha0 = G.ldlt().solve(K_all.transpose() * resid);
    const double base = std::max(alpha0.dot(K_D * alpha0), 1e-12);

    double best_err = std::numeric_limits<double>::infinity();
    double best_rk = base * 1e-2;
    for (int g = 0; g < grid_points; ++g) {
        const double rk = base * std::pow(10.0, -2.0 + 4.0 * g / (grid_points - 1));
        double err = 0.0;
        for (int f = 0; f < folds; ++f) {
            std::vector<Eigen::Index> in_rows, out_rows;
            for (Eigen::Index i = 0; i < n; ++i)
                (static_cast<int>(i % folds) == f ? out_rows : in_rows).push_back(i);
            const auto m = static_cast<Eigen::Index>(in_rows.size());
            Eigen::MatrixXd Kin(m, dictionary.rows());
            Eigen::VectorXd rin(m);
            for (Eigen::Index r = 0; r < m; ++r) {
                Kin.row(r) = K_all.row(in_rows[static_cast<std::size_t>(r)]);
                rin[r] = resid[in_rows[static_cast<std::size_t>(r)]];
            }
            const double inv_m = 1.0 / static_cast<double>(m);
            const QuadraticObjective obj(inv_m * (Kin.transpose() * Kin),
                                         inv_m * (Kin.transpose() * rin),
                                         inv_m * rin.squaredNorm());
            Eigen::MatrixXd Kd = K_D;
            Eigen::LLT<Eigen::MatrixXd> llt(Kd);
            if (llt.info() != Eigen::Success)
                Kd.diagonal().array() += 1e-10 * Kd.trace() / static_cast<double>(Kd.rows());
            const auto sol = solve_qp1qc(obj, {Kd, rk});
            for (const auto i : out_rows) {
                const double pred = mu + K_all.row(i).dot(sol.argmin);
                const double r = train.y[i] - pred;
                err += r * r;
            }
        }
        if (err < best_err * (1.0 - 1e-12)) {
            best_err = err;
            best_rk = rk;
        }
    }
    return best_rk;
}

} // namespace mcrkit
