#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "mcrkit/errors.hpp"
#include "mcrkit/quadratic.hpp"

namespace mcrkit {

struct QpSolution {
    Eigen::VectorXd argmin;
    double value = 0.0;
    double multiplier = 0.0;
    enum class Status { Interior, Boundary, HardCase, Unbounded } status = Status::Interior;

    bool unbounded() const { return status == Status::Unbounded; }
};

namespace detail {

inline bool lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return false;
}

} // namespace detail

/// Global minimizer of an unconstrained quadratic. Returns Interior with the
/// minimum-norm argmin when Q is PSD and q lies in its range; otherwise the
/// objective has no finite infimum and status is Unbounded.
inline QpSolution solve_unconstrained(const QuadraticObjective& obj) {
    const Eigen::Index p = obj.dim();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(obj.Q);
    const Eigen::VectorXd lam = eig.eigenvalues();
    const Eigen::MatrixXd V = eig.eigenvectors();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const double eig_tol = 1e-12 * scale;
    const double q_scale = std::max(1.0, obj.q.cwiseAbs().maxCoeff());

    QpSolution sol;
    if (lam.size() > 0 && lam[0] < -eig_tol) {
        sol.status = QpSolution::Status::Unbounded;
        sol.value = -std::numeric_limits<double>::infinity();
        return sol;
    }
    const Eigen::VectorXd b = V.transpose() * obj.q;
    Eigen::VectorXd w(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (lam[i] <= eig_tol) {
            if (std::abs(b[i]) > 1e-10 * q_scale) {
                sol.status = QpSolution::Status::Unbounded;
                sol.value = -std::numeric_limits<double>::infinity();
                return sol;
            }
            w[i] = 0.0;
        } else {
            w[i] = b[i] / lam[i];
        }
    }
    sol.argmin = V * w;
    sol.value = obj.value(sol.argmin);
    sol.multiplier = 0.0;
    sol.status = QpSolution::Status::Interior;
    return sol;
}

/// Global minimizer of beta'Q beta - 2q'beta + c subject to
/// beta'M beta <= radius. Whitens through the Cholesky factor of M to the
/// unit-ball trust-region subproblem, then solves the secular equation in
/// the Lagrange multiplier by safeguarded Newton iteration, with explicit
/// hard-case handling when q is orthogonal to the bottom eigenspace.
inline QpSolution solve_qp1qc(const QuadraticObjective& obj, const EllipsoidConstraint& con,
                              double rtol = 1e-9, int max_iters = 200) {
    const Eigen::Index p = obj.dim();
    if (con.M.rows() != p) throw DimensionMismatch("constraint dimension does not match objective");
    const double m_scale = std::max(1.0, con.M.cwiseAbs().maxCoeff());
    if ((con.M - con.M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * m_scale)
        throw SingularConstraint("constraint matrix is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(con.M);
    if (llt.info() != Eigen::Success)
        throw SingularConstraint("constraint matrix is not positive definite");

    const auto L = llt.matrixL();
    // Whitened problem: u = L' beta, minimize u'A u - 2 b'u + c over |u|^2 <= radius.
    Eigen::MatrixXd T = L.solve(obj.Q);
    Eigen::MatrixXd A = L.solve(T.transpose());
    A = 0.5 * (A + A.transpose().eval());
    const Eigen::VectorXd b_w = L.solve(obj.q);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    const Eigen::VectorXd lam = eig.eigenvalues();
    const Eigen::MatrixXd V = eig.eigenvectors();
    const Eigen::VectorXd b = V.transpose() * b_w;
    const double delta_sq = con.radius;
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const double eig_tol = 1e-12 * scale;
    const double lam_min = lam[0];

    auto unwhiten = [&](const Eigen::VectorXd& w) {
        const Eigen::VectorXd u = V * w;
        return llt.matrixU().solve(u).eval(); // solve L' beta = u
    };
    auto finish = [&](const Eigen::VectorXd& w, double mult, QpSolution::Status st) {
        QpSolution sol;
        sol.argmin = unwhiten(w);
        sol.value = obj.value(sol.argmin);
        sol.multiplier = mult;
        sol.status = st;
        return sol;
    };

    const double b_norm = b.norm();
    // Interior candidate: minimum-norm stationary point when A is PSD.
    if (lam_min > -eig_tol) {
        bool consistent = true;
        Eigen::VectorXd w(p);
        for (Eigen::Index i = 0; i < p; ++i) {
            if (lam[i] <= eig_tol) {
                if (std::abs(b[i]) > 1e-10 * std::max(1.0, b_norm)) { consistent = false; break; }
                w[i] = 0.0;
            } else {
                w[i] = b[i] / lam[i];
            }
        }
        if (consistent && w.squaredNorm() <= delta_sq)
            return finish(w, 0.0, QpSolution::Status::Interior);
    }

    const double lam_floor = std::max(0.0, -lam_min);
    auto phi = [&](double mult) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            const double d = lam[i] + mult;
            s += (b[i] * b[i]) / (d * d);
        }
        return s;
    };
    auto phi_prime = [&](double mult) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            const double d = lam[i] + mult;
            s -= 2.0 * (b[i] * b[i]) / (d * d * d);
        }
        return s;
    };

    // Hard case: b orthogonal to the bottom eigenspace and the remaining
    // components do not reach the boundary at the critical multiplier.
    if (lam_min < -eig_tol) {
        const double gap_tol = 1e-10 * scale;
        bool orthogonal = true;
        for (Eigen::Index i = 0; i < p && lam[i] <= lam_min + gap_tol; ++i)
            orthogonal = orthogonal && (std::abs(b[i]) <= 1e-10 * std::max(1.0, b_norm));
        if (orthogonal) {
            Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
            double partial = 0.0;
            for (Eigen::Index i = 0; i < p; ++i) {
                if (lam[i] <= lam_min + gap_tol) continue;
                w[i] = b[i] / (lam[i] - lam_min);
                partial += w[i] * w[i];
            }
            if (partial <= delta_sq) {
                const double tau = std::sqrt(std::max(0.0, delta_sq - partial));
                Eigen::VectorXd w_plus = w, w_minus = w;
                w_plus[0] += tau;
                w_minus[0] -= tau;
                QpSolution a = finish(w_plus, -lam_min, QpSolution::Status::HardCase);
                QpSolution c2 = finish(w_minus, -lam_min, QpSolution::Status::HardCase);
                // Ties broken deterministically: lexicographically larger argmin.
                return detail::lex_greater(c2.argmin, a.argmin) ? c2 : a;
            }
        }
    }

    // Secular equation: find mult > lam_floor with phi(mult) = radius.
    double lo = lam_floor;
    double hi = std::max(1.0, 2.0 * lam_floor) + scale;
    while (phi(hi) > delta_sq) {
        hi = 2.0 * hi + 1.0;
        if (!std::isfinite(hi)) throw NoConvergence("qp1qc: bracket expansion overflow");
    }
    // Newton on psi(mult) = 1/sqrt(phi) - 1/sqrt(radius), safeguarded by the
    // [lo, hi] bracket. psi is close to linear in the multiplier.
    double mult = 0.5 * (lo + hi);
    if (lam_floor > 0.0) {
        // Start just above the pole to keep phi finite.
        mult = lam_floor + 0.5 * (hi - lam_floor);
    }
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < max_iters; ++it) {
        const double f = phi(mult);
        residual = std::abs(f - delta_sq);
        if (residual <= rtol * delta_sq) { converged = true; break; }
        if (f > delta_sq) lo = mult; else hi = mult;
        const double psi = 1.0 / std::sqrt(f) - 1.0 / std::sqrt(delta_sq);
        const double dpsi = -0.5 * phi_prime(mult) / (f * std::sqrt(f));
        double next = mult - psi / dpsi;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        mult = next;
    }
    if (!converged && residual > 1e3 * rtol * delta_sq)
        throw NoConvergence("qp1qc: secular iteration cap reached, |phi - radius| = " +
                            std::to_string(residual));
    Eigen::VectorXd w(p);
    for (Eigen::Index i = 0; i < p; ++i) w[i] = b[i] / (lam[i] + mult);
    return finish(w, mult, QpSolution::Status::Boundary);
}

} // namespace mcrkit
