#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "mcrkit/qp1qc.hpp"

using namespace mcrkit;
using mcrkit::testing::random_symmetric;

namespace {

/// Dense scan of the feasible ellipsoid, used as the global-optimality
/// oracle for p <= 3. Scans the whitened ball with `steps` points per axis.
double grid_minimum(const QuadraticObjective& obj, const EllipsoidConstraint& con, int steps) {
    const Eigen::Index p = obj.dim();
    Eigen::LLT<Eigen::MatrixXd> llt(con.M);
    const double delta = std::sqrt(con.radius);
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd u(p);
    auto value_at = [&](const Eigen::VectorXd& w) {
        const Eigen::VectorXd beta = llt.matrixU().solve(w);
        return obj.value(beta);
    };
    if (p == 1) {
        for (int a = 0; a <= steps; ++a) {
            u[0] = -delta + 2.0 * delta * a / steps;
            best = std::min(best, value_at(u));
        }
    } else if (p == 2) {
        for (int a = 0; a <= steps; ++a) {
            u[0] = -delta + 2.0 * delta * a / steps;
            for (int b = 0; b <= steps; ++b) {
                u[1] = -delta + 2.0 * delta * b / steps;
                if (u.squaredNorm() > con.radius) continue;
                best = std::min(best, value_at(u));
            }
        }
    } else {
        for (int a = 0; a <= steps; ++a) {
            u[0] = -delta + 2.0 * delta * a / steps;
            for (int b = 0; b <= steps; ++b) {
                u[1] = -delta + 2.0 * delta * b / steps;
                for (int c = 0; c <= steps; ++c) {
                    u[2] = -delta + 2.0 * delta * c / steps;
                    if (u.squaredNorm() > con.radius) continue;
                    best = std::min(best, value_at(u));
                }
            }
        }
    }
    return best;
}

} // namespace

TEST_CASE("unconstrained solve handles the three curvature regimes") {
    QuadraticObjective strict(Eigen::Matrix2d::Identity(), Eigen::Vector2d(2, 0), 0.0);
    auto s = solve_unconstrained(strict);
    CHECK(s.status == QpSolution::Status::Interior);
    CHECK((s.argmin - Eigen::Vector2d(2, 0)).norm() < 1e-12);
    CHECK(s.value == Catch::Approx(-4.0));

    Eigen::Matrix2d indef;
    indef << 1, 0, 0, -1;
    CHECK(solve_unconstrained({indef, Eigen::Vector2d::Zero(), 0.0}).unbounded());

    CHECK(solve_unconstrained({Eigen::Matrix2d::Zero(), Eigen::Vector2d(1, 0), 0.0}).unbounded());

    // Singular but consistent: minimum-norm argmin.
    Eigen::Matrix2d sing;
    sing << 1, 0, 0, 0;
    auto mn = solve_unconstrained({sing, Eigen::Vector2d(3, 0), 1.0});
    CHECK(mn.status == QpSolution::Status::Interior);
    CHECK((mn.argmin - Eigen::Vector2d(3, 0)).norm() < 1e-12);
}

TEST_CASE("qp1qc hand-worked boundary and hard cases") {
    const EllipsoidConstraint unit(Eigen::Matrix2d::Identity(), 1.0);

    auto b = solve_qp1qc({Eigen::Matrix2d::Identity(), Eigen::Vector2d(2, 0), 0.0}, unit);
    CHECK(b.status == QpSolution::Status::Boundary);
    CHECK((b.argmin - Eigen::Vector2d(1, 0)).norm() < 1e-8);
    CHECK(b.value == Catch::Approx(-3.0));
    CHECK(b.multiplier == Catch::Approx(1.0));

    Eigen::Matrix2d indef;
    indef << 1, 0, 0, -1;
    auto h = solve_qp1qc({indef, Eigen::Vector2d::Zero(), 0.0},
                         {Eigen::Matrix2d::Identity(), 4.0});
    CHECK(h.status == QpSolution::Status::HardCase);
    CHECK(h.value == Catch::Approx(-4.0));
    CHECK((h.argmin - Eigen::Vector2d(0, 2)).norm() < 1e-8); // lexicographic tie-break

    auto interior = solve_qp1qc({Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(), 0.0},
                                {Eigen::Matrix2d::Identity(), 7.0});
    CHECK(interior.status == QpSolution::Status::Interior);
    CHECK(interior.argmin.norm() == 0.0);
    CHECK(interior.value == 0.0);

    Eigen::Matrix2d notspd;
    notspd << 1, 0, 0, 0;
    CHECK_THROWS_AS(solve_qp1qc({Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(), 0.0},
                                {notspd, 1.0}),
                    SingularConstraint);
}

TEST_CASE("qp1qc matches a dense grid and satisfies KKT on random instances") {
    Rng rng(77);
    for (int t = 0; t < 40; ++t) {
        const auto p = static_cast<Eigen::Index>(1 + rng.bounded(3));
        const Eigen::MatrixXd Q = random_symmetric(rng, p, -1.5, 1.5);
        Eigen::VectorXd q(p);
        for (Eigen::Index i = 0; i < p; ++i) q[i] = rng.normal();
        const Eigen::MatrixXd M = random_symmetric(rng, p, 0.3, 2.0);
        const double radius = 0.2 + 2.0 * rng.uniform();
        const QuadraticObjective obj(Q, q, rng.normal());
        const EllipsoidConstraint con(M, radius);

        const auto sol = solve_qp1qc(obj, con);
        REQUIRE(!sol.unbounded());
        CHECK(con.contains(sol.argmin, 1e-6));
        const double gridmin = grid_minimum(obj, con, 120);
        CHECK(sol.value <= gridmin + 1e-4);

        if (sol.status != QpSolution::Status::Interior) {
            const Eigen::VectorXd kkt = (Q + sol.multiplier * M) * sol.argmin - q;
            CHECK(kkt.norm() <= 1e-8 * (1.0 + q.norm()));
            CHECK(std::abs(sol.argmin.dot(M * sol.argmin) - radius) <= 1e-6 * radius);
            CHECK(sol.multiplier >= 0.0);
        }
    }
}

TEST_CASE("shrinking the radius never decreases the optimum") {
    Rng rng(123);
    for (int t = 0; t < 25; ++t) {
        const auto p = static_cast<Eigen::Index>(1 + rng.bounded(3));
        const QuadraticObjective obj(random_symmetric(rng, p, -1.0, 1.0),
                                     Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) {
                                         return rng.normal();
                                     }),
                                     0.0);
        const Eigen::MatrixXd M = random_symmetric(rng, p, 0.5, 1.5);
        double prev = -std::numeric_limits<double>::infinity();
        for (double radius : {4.0, 2.0, 1.0, 0.5, 0.25}) {
            const auto sol = solve_qp1qc(obj, {M, radius});
            CHECK(sol.value >= prev - 1e-9);
            prev = sol.value;
        }
    }
}
