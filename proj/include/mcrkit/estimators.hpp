#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mcrkit/dataset.hpp"
#include "mcrkit/errors.hpp"
#include "mcrkit/model.hpp"

namespace mcrkit {

/// Standard empirical loss (1/n) sum_i L(f, (y_i, X1_i, X2_i)).
inline double e_orig(const PredictionModel& model, const LossKind& loss, const Dataset& data) {
    const Eigen::Index n = data.n();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        sum += loss(data.y[i], model.predict(data.X1.row(i), data.X2.row(i)));
    return sum / static_cast<double>(n);
}

/// Switched loss over all ordered pairs:
/// (1/(n(n-1))) sum_i sum_{j != i} L(f, (y_j, X1_i, X2_j)).
/// Summation order is i-outer, j-inner; the all-permutation oracle reduces
/// to the identical summands in the identical order.
inline double e_switch(const PredictionModel& model, const LossKind& loss, const Dataset& data) {
    const Eigen::Index n = data.n();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd x1 = data.X1.row(i);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            sum += loss(data.y[j], model.predict(x1, data.X2.row(j)));
        }
    }
    return sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

/// Single-grouping estimator pairing row i with row i + floor(n/2); the last
/// row is dropped when n is odd.
inline double e_divide(const PredictionModel& model, const LossKind& loss, const Dataset& data) {
    const Eigen::Index n = data.n();
    const Eigen::Index m = n / 2;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index k = i + m;
        // h_f(Z_i, Z_k): loss on row k with X1 taken from row i, and vice versa.
        sum += loss(data.y[k], model.predict(data.X1.row(i), data.X2.row(k)));
        sum += loss(data.y[i], model.predict(data.X1.row(k), data.X2.row(i)));
    }
    return sum / (2.0 * static_cast<double>(m));
}

/// Brute-force check of the pair-sum estimator against the average over all
/// n! permutations with fixed points excluded. Walks every permutation,
/// evaluates the loss at every non-fixed position, and tallies how often
/// each ordered pair (i, j) occurs. Every pair must occur exactly (n-1)!
/// times; the final reduction then groups the (bitwise identical) repeated
/// summands so the result matches e_switch exactly.
inline double e_switch_all_perm_oracle(const PredictionModel& model, const LossKind& loss,
                                       const Dataset& data) {
    const Eigen::Index n = data.n();
    if (n > 8) throw TooLargeForOracle("all-permutation oracle limited to n <= 8, got n=" +
                                       std::to_string(n));
    const auto nu = static_cast<std::size_t>(n);
    std::vector<std::vector<double>> loss_table(nu, std::vector<double>(nu));
    for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t j = 0; j < nu; ++j)
            loss_table[i][j] = loss(data.y[static_cast<Eigen::Index>(j)],
                                    model.predict(data.X1.row(static_cast<Eigen::Index>(i)),
                                                  data.X2.row(static_cast<Eigen::Index>(j))));

    std::vector<std::size_t> perm(nu);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::vector<std::uint64_t>> count(nu, std::vector<std::uint64_t>(nu, 0));
    do {
        // perm maps position j to the X1 donor row perm[j].
        for (std::size_t j = 0; j < nu; ++j) {
            const std::size_t i = perm[j];
            if (i == j) continue;
            const double l = loss(data.y[static_cast<Eigen::Index>(j)],
                                  model.predict(data.X1.row(static_cast<Eigen::Index>(i)),
                                                data.X2.row(static_cast<Eigen::Index>(j))));
            if (l != loss_table[i][j])
                throw Error("oracle: non-deterministic model evaluation");
            ++count[i][j];
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::uint64_t fact = 1;
    for (std::size_t k = 2; k + 1 <= nu; ++k) fact *= k; // (n-1)!
    double sum = 0.0;
    for (std::size_t i = 0; i < nu; ++i) {
        for (std::size_t j = 0; j < nu; ++j) {
            if (i == j) {
                if (count[i][j] != 0) throw Error("oracle: fixed point counted");
                continue;
            }
            if (count[i][j] != fact)
                throw Error("oracle: pair multiplicity != (n-1)!");
            sum += loss_table[i][j] * static_cast<double>(count[i][j] / fact);
        }
    }
    return sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

inline double switch_estimate(const PredictionModel& model, const LossKind& loss,
                              const Dataset& data, SwitchEstimator estimator) {
    return estimator == SwitchEstimator::Switch ? e_switch(model, loss, data)
                                                : e_divide(model, loss, data);
}

/// Empirical model reliance. Ratio mode requires e_orig > 0.
inline double model_reliance(const PredictionModel& model, const LossKind& loss,
                             const Dataset& data, RelianceMode mode = RelianceMode::Ratio,
                             SwitchEstimator estimator = SwitchEstimator::Switch) {
    const double orig = e_orig(model, loss, data);
    const double sw = switch_estimate(model, loss, data, estimator);
    if (mode == RelianceMode::Difference) return sw - orig;
    if (orig == 0.0) throw ZeroDenominator("model reliance ratio undefined: e_orig is zero");
    return sw / orig;
}

} // namespace mcrkit
