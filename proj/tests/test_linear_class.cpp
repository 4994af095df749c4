#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "mcrkit/estimators.hpp"
#include "mcrkit/linear_class.hpp"

using namespace mcrkit;
using mcrkit::testing::random_dataset;
using mcrkit::testing::toy_dataset;

TEST_CASE("fast switched loss on the toy") {
    const auto d = toy_dataset();
    LinearModel m(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd(0));
    CHECK(e_switch_fast(m, d) == Catch::Approx(0.625));

    LinearModel zero(Eigen::VectorXd::Zero(1), Eigen::VectorXd(0));
    CHECK(e_switch_fast(zero, d) == Catch::Approx(d.y.squaredNorm() / 2.0));
}

TEST_CASE("fast switched loss agrees with pair enumeration") {
    Rng rng(17);
    const auto sq = LossKind::squared_error();
    for (int t = 0; t < 100; ++t) {
        const auto n = static_cast<Eigen::Index>(5 + rng.bounded(46));
        const auto p1 = static_cast<Eigen::Index>(1 + rng.bounded(2));
        const auto p2 = static_cast<Eigen::Index>(rng.bounded(3));
        auto d = random_dataset(rng, n, p1, p2);
        auto m = mcrkit::testing::random_linear_model(rng, p1, p2);
        const double fast = e_switch_fast(*m, d);
        const double brute = e_switch(*m, sq, d);
        CHECK(std::abs(fast - brute) <= 1e-10 * (1.0 + std::abs(brute)));
    }
}

TEST_CASE("quadratic_combination reproduces the loss combinations") {
    Rng rng(19);
    const auto sq = LossKind::squared_error();

    // (1, 0) gives the least-squares normal matrices.
    auto d = random_dataset(rng, 12, 1, 2);
    const auto onlyorig = quadratic_combination(d, 1.0, 0.0);
    Eigen::MatrixXd X(12, 3);
    X << d.X1, d.X2;
    CHECK((onlyorig.Q - X.transpose() * X / 12.0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((onlyorig.q - X.transpose() * d.y / 12.0).cwiseAbs().maxCoeff() < 1e-12);

    // (0, 1) on the toy evaluates to e_switch at beta = 0.5.
    const auto toy = toy_dataset();
    const auto sw = quadratic_combination(toy, 0.0, 1.0);
    CHECK(sw.value(Eigen::VectorXd::Constant(1, 0.5)) == Catch::Approx(0.625));

    // Random combinations match the estimators exactly (constant retained).
    for (int t = 0; t < 50; ++t) {
        const auto n = static_cast<Eigen::Index>(4 + rng.bounded(20));
        auto data = random_dataset(rng, n, 2, 1);
        auto model = mcrkit::testing::random_linear_model(rng, 2, 1);
        const double xo = rng.normal(), xs = rng.normal();
        const auto obj = quadratic_combination(data, xo, xs);
        Eigen::VectorXd beta(3);
        beta << model->beta1(), model->beta2();
        const double want = xo * e_orig(*model, sq, data) + xs * e_switch(*model, sq, data);
        CHECK(std::abs(obj.value(beta) - want) <= 1e-10 * (1.0 + std::abs(want)));
    }
}

TEST_CASE("combination objective is linear in the mixing weights") {
    Rng rng(23);
    auto d = random_dataset(rng, 10, 1, 1);
    const auto a = quadratic_combination(d, 0.7, 0.0);
    const auto b = quadratic_combination(d, 0.0, -1.3);
    const auto ab = quadratic_combination(d, 0.7, -1.3);
    CHECK((ab.Q - (a.Q + b.Q)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ab.q - (a.q + b.q)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ab.c == Catch::Approx(a.c + b.c));
}

TEST_CASE("nonnegative weights give a PSD objective") {
    Rng rng(27);
    for (int t = 0; t < 20; ++t) {
        auto d = random_dataset(rng, 9, 2, 2);
        const double xo = rng.uniform(), xs = rng.uniform();
        const auto obj = quadratic_combination(d, xo, xs);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(obj.Q);
        CHECK(eig.eigenvalues()[0] >= -1e-10);
    }
}

TEST_CASE("LinearClass solves combinations globally") {
    const auto d = toy_dataset();
    LinearClass::Options opts;
    opts.add_intercept = false;
    LinearClass cls(d, opts);

    // gamma = 1 probe of the one-parameter toy: c* = 1/2.
    const auto probe = cls.minimize_combination(1.0, 1.0);
    CHECK(probe.e_orig == Catch::Approx(0.125));
    CHECK(probe.e_switch == Catch::Approx(0.625));
    CHECK(probe.objective_value == Catch::Approx(0.75));
    CHECK(probe.objective_value ==
          Catch::Approx(probe.e_orig + probe.e_switch).epsilon(1e-8));

    // Indefinite combination over the unconstrained class.
    Rng rng(37);
    auto dr = random_dataset(rng, 15, 1, 1);
    LinearClass unconstrained(dr, {});
    CHECK_THROWS_AS(unconstrained.minimize_combination(1.0, -1.0), UnboundedCombination);

    // The constrained class stays solvable for the same weights.
    LinearClass::Options copts;
    copts.constraint = EllipsoidConstraint(Eigen::Matrix3d::Identity(), 1.0);
    LinearClass constrained(dr, copts);
    const auto cp = constrained.minimize_combination(1.0, -1.0);
    CHECK(cp.model != nullptr);
    CHECK(std::abs(cp.objective_value - (cp.e_orig - cp.e_switch)) <= 1e-8);
}

TEST_CASE("intercept column lives in the unswitched block") {
    Rng rng(41);
    auto d = random_dataset(rng, 30, 1, 1);
    d.y.array() += 5.0; // force a visible intercept
    LinearClass cls(d, {});
    const auto erm = cls.minimize_combination(1.0, 0.0);
    const auto* lm = dynamic_cast<const LinearModel*>(erm.model.get());
    REQUIRE(lm != nullptr);
    CHECK(lm->beta2().size() == 1);
    CHECK(std::abs(lm->intercept()) > 1.0);
    // Class-reported losses equal the estimator on the returned model.
    const auto sq = LossKind::squared_error();
    CHECK(erm.e_orig == Catch::Approx(e_orig(*lm, sq, d)).epsilon(1e-10));
    CHECK(erm.e_switch == Catch::Approx(e_switch(*lm, sq, d)).epsilon(1e-10));
}
