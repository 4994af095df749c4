#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "mcrkit/estimators.hpp"

using namespace mcrkit;
using mcrkit::testing::random_dataset;
using mcrkit::testing::random_linear_model;
using mcrkit::testing::toy_dataset;

namespace {

ModelPtr scale_x1_model(double c) {
    return std::make_shared<FunctionModel>(
        [c](const Eigen::VectorXd& x1, const Eigen::VectorXd&) { return c * x1[0]; });
}

ModelPtr ignore_x1_model() {
    return std::make_shared<FunctionModel>([](const Eigen::VectorXd&, const Eigen::VectorXd& x2) {
        return x2.size() > 0 ? 0.3 * x2[0] - 0.1 : 0.25;
    });
}

} // namespace

TEST_CASE("e_orig on hand-worked cases") {
    const auto d = toy_dataset();
    const auto sq = LossKind::squared_error();

    // Constant model at the mean of a two-point outcome.
    auto mean_model = std::make_shared<FunctionModel>(
        [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.5; });
    CHECK(e_orig(*mean_model, sq, d) == Catch::Approx(0.25));

    // Interpolator.
    CHECK(e_orig(*scale_x1_model(1.0), sq, d) == 0.0);

    CHECK(e_orig(*scale_x1_model(0.5), sq, d) == Catch::Approx(0.125));
}

TEST_CASE("e_switch on the two-row toy") {
    const auto d = toy_dataset();
    const auto sq = LossKind::squared_error();
    CHECK(e_switch(*scale_x1_model(0.5), sq, d) == Catch::Approx(0.625));

    // Switching an input the model never reads changes nothing.
    auto ign = ignore_x1_model();
    CHECK(e_switch(*ign, sq, d) == Catch::Approx(e_orig(*ign, sq, d)));

    // n = 2: single pairing, so both estimators coincide.
    CHECK(e_switch(*scale_x1_model(0.5), sq, d) == e_divide(*scale_x1_model(0.5), sq, d));
}

TEST_CASE("e_divide conventions") {
    const auto sq = LossKind::squared_error();
    const auto d = toy_dataset();
    CHECK(e_divide(*scale_x1_model(0.5), sq, d) == Catch::Approx(0.625));

    // Odd n drops the last row: only the (1, 2) pairing participates.
    Dataset d3;
    d3.y.resize(3);
    d3.y << 0.0, 1.0, 100.0;
    d3.X1.resize(3, 1);
    d3.X1 << 0.0, 1.0, -50.0;
    d3.X2.resize(3, 0);
    const auto m = scale_x1_model(0.5);
    const double expected = 0.5 * ((1.0 - 0.0) * (1.0 - 0.0) + (0.0 - 0.5) * (0.0 - 0.5));
    CHECK(e_divide(*m, sq, d3) == Catch::Approx(expected));

    // A model ignoring X1 reproduces e_orig over the paired rows.
    Rng rng(7);
    auto d6 = random_dataset(rng, 6, 1, 2);
    auto ign = ignore_x1_model();
    CHECK(e_divide(*ign, sq, d6) == Catch::Approx(e_orig(*ign, sq, d6)));
}

TEST_CASE("all-permutation oracle equals e_switch exactly") {
    const auto sq = LossKind::squared_error();
    const auto d = toy_dataset();
    const auto m = scale_x1_model(0.5);
    CHECK(e_switch_all_perm_oracle(*m, sq, d) == 0.625);
    CHECK(e_switch_all_perm_oracle(*m, sq, d) == e_switch(*m, sq, d));

    Rng rng(11);
    for (int t = 0; t < 60; ++t) {
        const auto n = static_cast<Eigen::Index>(2 + rng.bounded(6)); // n in [2, 7]
        const auto p2 = static_cast<Eigen::Index>(rng.bounded(3));
        auto data = random_dataset(rng, n, 1, p2);
        auto model = random_linear_model(rng, 1, p2);
        const auto loss = (t % 3 == 0) ? LossKind::hinge(1.0) : sq;
        CHECK(e_switch(*model, loss, data) == e_switch_all_perm_oracle(*model, loss, data));
    }

    Rng rng2(13);
    auto big = random_dataset(rng2, 9, 1, 1);
    CHECK_THROWS_AS(e_switch_all_perm_oracle(*scale_x1_model(1.0), sq, big), TooLargeForOracle);
}

TEST_CASE("model reliance on the toy") {
    const auto d = toy_dataset();
    const auto sq = LossKind::squared_error();
    const auto m = scale_x1_model(0.5);
    CHECK(model_reliance(*m, sq, d, RelianceMode::Ratio) == Catch::Approx(5.0));
    CHECK(model_reliance(*m, sq, d, RelianceMode::Difference) == Catch::Approx(0.5));

    auto ign = ignore_x1_model();
    CHECK(model_reliance(*ign, sq, d, RelianceMode::Ratio) == 1.0);
    CHECK(model_reliance(*ign, sq, d, RelianceMode::Difference) == 0.0);

    CHECK_THROWS_AS(model_reliance(*scale_x1_model(1.0), sq, d, RelianceMode::Ratio),
                    ZeroDenominator);
}

TEST_CASE("estimators invariant under simultaneous row reordering") {
    Rng rng(29);
    for (int t = 0; t < 20; ++t) {
        auto d = random_dataset(rng, 8, 2, 2);
        auto model = random_linear_model(rng, 2, 2);
        const auto sq = LossKind::squared_error();
        const double orig = e_orig(*model, sq, d);
        const double sw = e_switch(*model, sq, d);
        auto perm = rng.permutation(8);
        auto shuffled = d.select_rows(perm);
        CHECK(e_orig(*model, sq, shuffled) == Catch::Approx(orig).epsilon(1e-12));
        CHECK(e_switch(*model, sq, shuffled) == Catch::Approx(sw).epsilon(1e-12));
    }
}

TEST_CASE("e_switch is unbiased under resampling from a finite population") {
    Rng rng(101);
    auto pop = random_dataset(rng, 40, 1, 1);
    auto model = random_linear_model(rng, 1, 1);
    const auto sq = LossKind::squared_error();

    // Sampling target: independent pairs from the population's empirical
    // distribution, diagonal included.
    double target = 0.0;
    for (Eigen::Index i = 0; i < pop.n(); ++i)
        for (Eigen::Index j = 0; j < pop.n(); ++j)
            target += sq(pop.y[j], model->predict(pop.X1.row(i), pop.X2.row(j)));
    target /= static_cast<double>(pop.n()) * static_cast<double>(pop.n());

    const int reps = 4000;
    const std::size_t n = 12;
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < reps; ++r) {
        std::vector<std::size_t> rows(n);
        for (auto& idx : rows) idx = static_cast<std::size_t>(rng.bounded(pop.n()));
        const double v = e_switch(*model, sq, pop.select_rows(rows));
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sumsq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - target) <= 5.0 * se + 1e-12);
}
