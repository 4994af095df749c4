#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcrkit/dataset.hpp"
#include "mcrkit/errors.hpp"
#include "mcrkit/estimators.hpp"
#include "mcrkit/linear_class.hpp"
#include "mcrkit/mcr_search.hpp"
#include "mcrkit/parallel.hpp"
#include "mcrkit/rng.hpp"
#include "mcrkit/theory_bounds.hpp"

namespace mcrkit {

/// Percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw Error("percentile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * pct / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - std::floor(h);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

struct BootstrapConfig {
    int replicates = 500;
    double lower_pct = 2.5;
    double upper_pct = 97.5;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    ModelPtr reference;
    LossKind loss = LossKind::squared_error();
    SearchOptions search;
    unsigned threads = 0;
    double max_infeasible_fraction = 0.2;

    void validate() const {
        if (replicates < 2) throw ConfigError("bootstrap requires at least 2 replicates");
        if (!(0.0 < lower_pct && lower_pct < upper_pct && upper_pct < 100.0))
            throw ConfigError("percentiles must satisfy 0 < lower < upper < 100");
        if (!reference) throw ConfigError("bootstrap requires a reference model");
    }
};

struct BootstrapInterval {
    double lower = 0.0;
    double upper = 0.0;
    int replicates_used = 0;
    int infeasible_replicates = 0;
    std::vector<double> minus_draws;
    std::vector<double> plus_draws;

    double width() const { return upper - lower; }
};

using ClassFactory = std::function<std::shared_ptr<SolvableClass>(const Dataset&)>;

/// Percentile bootstrap for empirical MCR. Rows are resampled iid with
/// replacement; the reference model stays fixed and the loss threshold is
/// re-anchored at its loss on each replicate. Infeasible replicates are
/// excluded and counted; more than max_infeasible_fraction of them aborts.
inline BootstrapInterval bootstrap_mcr_ci(const ClassFactory& factory, const Dataset& data,
                                          const BootstrapConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(data.n());
    const auto reps = static_cast<std::size_t>(cfg.replicates);

    std::vector<std::optional<std::pair<double, double>>> draws(reps);
    parallel_for(reps, resolve_threads(cfg.threads), [&](std::size_t r) {
        Rng rng = Rng::substream(cfg.seed, r);
        std::vector<std::size_t> rows(n);
        for (auto& idx : rows) idx = static_cast<std::size_t>(rng.bounded(n));
        const Dataset replicate = data.select_rows(rows);
        const double eps_abs = e_orig(*cfg.reference, cfg.loss, replicate) + cfg.epsilon;
        try {
            const auto cls = factory(replicate);
            ProbeCache cache(*cls);
            std::vector<GammaProbe> pool;
            const auto minus = search_mcr_minus(cache, pool, eps_abs, cfg.search);
            const auto plus = search_mcr_plus(cache, pool, eps_abs, cfg.search);
            draws[r] = std::make_pair(minus.lower, plus.upper);
        } catch (const InfeasibleEpsilon&) {
            draws[r] = std::nullopt;
        }
    });

    BootstrapInterval out;
    for (const auto& d : draws) {
        if (!d) {
            ++out.infeasible_replicates;
            continue;
        }
        out.minus_draws.push_back(d->first);
        out.plus_draws.push_back(d->second);
    }
    out.replicates_used = static_cast<int>(out.minus_draws.size());
    if (out.replicates_used == 0 ||
        static_cast<double>(out.infeasible_replicates) > cfg.max_infeasible_fraction * reps)
        throw TooManyInfeasibleReplicates(
            std::to_string(out.infeasible_replicates) + " of " + std::to_string(reps) +
            " bootstrap replicates had an infeasible loss threshold");
    out.lower = percentile(out.minus_draws, cfg.lower_pct);
    out.upper = percentile(out.plus_draws, cfg.upper_pct);
    return out;
}

/// Descriptor phi over a model class. When `linear_in_beta` is set (class
/// coefficient layout, intercept slot included), phi(f_beta) = a'beta and
/// exact optimization over empirical Rashomon sets is available.
struct Descriptor {
    std::function<double(const PredictionModel&)> eval;
    std::optional<Eigen::VectorXd> linear_in_beta;
};

struct PhiInterval {
    double lower = 0.0;
    double upper = 0.0;
    double epsilon_used = 0.0;
    bool sample_approximation = false;
};

/// Finite-sample CI for a descriptor over the inflated empirical Rashomon
/// set of a linear class: [min, max] of phi over
/// { beta : e_orig(beta) <= e_orig(ERM) + eps } with eps from the phi-CI
/// constants (eps4 for a unique best-in-class model, eps5 in range mode).
/// Linear descriptors solve in closed form through the loss ellipsoid;
/// other descriptors fall back to ray sampling when allowed.
inline PhiInterval rashomon_phi_ci(const LinearClass& cls, const Descriptor& phi,
                                   const TheoryConstants& tc, bool range_mode,
                                   int sample_fallback = 0, std::uint64_t seed = 0) {
    const auto [eps4, eps5] = phi_ci_epsilons(tc);
    const double eps = range_mode ? eps5 : eps4;

    const auto& obj = cls.orig_objective();
    const auto erm = solve_unconstrained(obj);
    if (erm.unbounded()) throw Error("least squares solve failed");
    const Eigen::VectorXd center = erm.argmin;
    const double rho = (obj.value(center) + eps) - obj.value(center); // = eps
    const double level = obj.value(center) + eps;

    PhiInterval out;
    out.epsilon_used = eps;

    if (phi.linear_in_beta) {
        const Eigen::VectorXd& a = *phi.linear_in_beta;
        if (a.size() != cls.dim())
            throw DimensionMismatch("descriptor coefficient length does not match class");
        // max/min of a'beta over (beta - center)' Q (beta - center) <= rho.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(obj.Q);
        const Eigen::VectorXd lam = eig.eigenvalues();
        const Eigen::VectorXd az = eig.eigenvectors().transpose() * a;
        const double tol = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
        double quad = 0.0;
        bool unbounded = false;
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            if (lam[i] <= tol) {
                if (std::abs(az[i]) > 1e-10 * std::max(1.0, a.norm())) unbounded = true;
            } else {
                quad += az[i] * az[i] / lam[i];
            }
        }
        const double mid = a.dot(center);
        if (unbounded) {
            out.lower = -std::numeric_limits<double>::infinity();
            out.upper = std::numeric_limits<double>::infinity();
        } else {
            const double half = std::sqrt(std::max(0.0, rho * quad));
            out.lower = mid - half;
            out.upper = mid + half;
        }
        return out;
    }

    if (sample_fallback <= 0)
        throw NonOptimizableDescriptor(
            "descriptor has no exact optimizer and sampling is disabled");

    // Ray sampling within the loss ellipsoid: walk random directions from
    // the ERM center to the level-set boundary.
    Rng rng(seed);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_fallback; ++s) {
        Eigen::VectorXd dir(cls.dim());
        for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
        const double qd = dir.dot(obj.Q * dir);
        if (qd <= 0.0) continue;
        // obj.value(center + t dir) = obj.value(center) + t^2 dir'Q dir.
        const double t_max = std::sqrt(std::max(0.0, (level - obj.value(center)) / qd));
        const double t = (2.0 * rng.uniform() - 1.0) * t_max;
        const Eigen::VectorXd beta = center + t * dir;
        const auto model = cls.make_model(beta);
        const double v = phi.eval(*model);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    out.lower = lo;
    out.upper = hi;
    out.sample_approximation = true;
    return out;
}

} // namespace mcrkit
