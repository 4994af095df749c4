#pragma once

#include <Eigen/Dense>
#include <memory>

#include "mcrkit/dataset.hpp"
#include "mcrkit/model.hpp"
#include "mcrkit/rng.hpp"

namespace mcrkit::testing {

/// The two-row working example used throughout: y = [0, 1], X1 = [0, 1],
/// no X2 columns. With f(x) = 0.5 x1: e_orig = 0.125, e_switch = 0.625.
inline Dataset toy_dataset() {
    Dataset d;
    d.y.resize(2);
    d.y << 0.0, 1.0;
    d.X1.resize(2, 1);
    d.X1 << 0.0, 1.0;
    d.X2.resize(2, 0);
    d.column_names = {"y", "x1"};
    return d;
}

inline Dataset random_dataset(Rng& rng, Eigen::Index n, Eigen::Index p1, Eigen::Index p2) {
    Dataset d;
    d.y.resize(n);
    d.X1.resize(n, p1);
    d.X2.resize(n, p2);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.y[i] = rng.normal();
        for (Eigen::Index j = 0; j < p1; ++j) d.X1(i, j) = rng.normal();
        for (Eigen::Index j = 0; j < p2; ++j) d.X2(i, j) = rng.normal();
    }
    return d;
}

inline std::shared_ptr<LinearModel> random_linear_model(Rng& rng, Eigen::Index p1,
                                                        Eigen::Index p2) {
    Eigen::VectorXd b1(p1), b2(p2);
    for (Eigen::Index j = 0; j < p1; ++j) b1[j] = rng.normal();
    for (Eigen::Index j = 0; j < p2; ++j) b2[j] = rng.normal();
    return std::make_shared<LinearModel>(b1, b2);
}

/// Random symmetric matrix with eigenvalues drawn from [-1, 1] (indefinite
/// by default) or [lo, hi].
inline Eigen::MatrixXd random_symmetric(Rng& rng, Eigen::Index p, double lo = -1.0,
                                        double hi = 1.0) {
    Eigen::MatrixXd G(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) G(i, j) = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    const Eigen::MatrixXd Qm = qr.householderQ();
    Eigen::VectorXd eigs(p);
    for (Eigen::Index i = 0; i < p; ++i) eigs[i] = lo + (hi - lo) * rng.uniform();
    return Qm * eigs.asDiagonal() * Qm.transpose();
}

} // namespace mcrkit::testing
