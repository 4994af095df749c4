#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "mcrkit/errors.hpp"
#include "mcrkit/model.hpp"
#include "mcrkit/solvable.hpp"

namespace mcrkit {

enum class ProbeSide { Minus, Plus };

/// One binary-search step: the global minimizer of h at a fixed gamma,
/// with its exact empirical losses. Minus probes minimize
/// gamma * e_orig + e_switch; Plus probes minimize e_orig + gamma * e_switch.
struct GammaProbe {
    double gamma = 0.0;
    ProbeSide side = ProbeSide::Minus;
    double h_value = 0.0;
    double e_orig = 0.0;
    double e_switch = 0.0;
    ModelPtr model;
};

struct McrBoundResult {
    double eps_abs = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    std::vector<GammaProbe> probes;
    bool lower_tight = false;
    bool upper_tight = false;
    /// Set when the gamma = 0 Minus probe already lands in the Rashomon
    /// set; by the convexity shortcut the empirical MCR lower end is <= 1
    /// and no further search is useful.
    bool minus_le_one = false;
    double min_e_orig = 0.0;
};

struct SearchOptions {
    double tol = 1e-4;      // absolute bracket width on gamma
    int max_iters = 60;     // bisection cap per search
    double h_tol = 1e-9;    // solver-noise tolerance on h >= 0
    double feas_rel_tol = 1e-9;
    bool prop4_shortcut = true; // valid for e_switch-based searches
};

/// Memoizes combination solves; every probe is reusable across bound
/// evaluations at different eps_abs. Insertion is mutex-guarded so
/// concurrent searches over one class share work safely.
class ProbeCache {
  public:
    explicit ProbeCache(const SolvableClass& cls) : cls_(&cls) {}

    ProbeOutcome minimize(double xi_orig, double xi_switch) {
        const std::pair<double, double> key{xi_orig, xi_switch};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            const auto it = cache_.find(key);
            if (it != cache_.end()) {
                if (!it->second) throw UnboundedCombination("cached unbounded combination");
                return *it->second;
            }
        }
        std::optional<ProbeOutcome> out;
        try {
            out = cls_->minimize_combination(xi_orig, xi_switch);
        } catch (const UnboundedCombination&) {
            std::lock_guard<std::mutex> lock(mutex_);
            cache_.emplace(key, std::nullopt);
            throw;
        }
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.emplace(key, out);
        ++solves_;
        return *out;
    }

    std::size_t solve_count() const { return solves_; }

  private:
    const SolvableClass* cls_;
    mutable std::mutex mutex_;
    std::map<std::pair<double, double>, std::optional<ProbeOutcome>> cache_;
    std::size_t solves_ = 0;
};

inline GammaProbe probe_minus(ProbeCache& cache, double gamma) {
    const auto out = cache.minimize(gamma, 1.0);
    return {gamma, ProbeSide::Minus, out.objective_value, out.e_orig, out.e_switch, out.model};
}

inline GammaProbe probe_minus(const SolvableClass& cls, double gamma) {
    ProbeCache cache(cls);
    return probe_minus(cache, gamma);
}

inline GammaProbe probe_plus(ProbeCache& cache, double gamma) {
    if (gamma > 0.0) throw Error("plus-side probes require gamma <= 0");
    const auto out = cache.minimize(1.0, gamma);
    return {gamma, ProbeSide::Plus, out.objective_value, out.e_orig, out.e_switch, out.model};
}

inline GammaProbe probe_plus(const SolvableClass& cls, double gamma) {
    ProbeCache cache(cls);
    return probe_plus(cache, gamma);
}

/// Largest lower bound (h / eps_abs - gamma) over Minus probes with h >= 0.
/// An h within solver noise of zero counts as zero; the resulting -gamma
/// bound holds for the whole class.
inline double lower_bound_at(const std::vector<GammaProbe>& probes, double eps_abs,
                             double h_tol = 1e-9) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : probes) {
        if (p.side != ProbeSide::Minus) continue;
        if (p.h_value < -h_tol) continue;
        const double h = std::max(p.h_value, 0.0);
        best = std::max(best, h / eps_abs - p.gamma);
    }
    return best;
}

/// Smallest upper bound (h / eps_abs - 1) / gamma over Plus probes with
/// gamma < 0 and h >= 0; +infinity when no probe qualifies.
inline double upper_bound_at(const std::vector<GammaProbe>& probes, double eps_abs,
                             double h_tol = 1e-9) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : probes) {
        if (p.side != ProbeSide::Plus || p.gamma >= 0.0) continue;
        if (p.h_value < -h_tol) continue;
        const double h = std::max(p.h_value, 0.0);
        best = std::min(best, (h / eps_abs - 1.0) / p.gamma);
    }
    return best;
}

namespace detail {

inline bool probe_feasible(const GammaProbe& p, double eps_abs, const SearchOptions& opts) {
    const double feas_tol = opts.feas_rel_tol * std::max(1.0, eps_abs);
    return p.h_value >= -opts.h_tol && p.e_orig <= eps_abs + feas_tol;
}

inline void check_eps_feasible(double eps_abs, double min_e_orig, const SearchOptions& opts) {
    if (eps_abs <= 0.0) throw InfeasibleEpsilon("eps_abs must be positive");
    const double feas_tol = opts.feas_rel_tol * std::max(1.0, eps_abs);
    if (eps_abs < min_e_orig - feas_tol)
        throw InfeasibleEpsilon("eps_abs " + std::to_string(eps_abs) +
                                " is below the class's minimal empirical loss " +
                                std::to_string(min_e_orig));
}

inline void set_lower_from_pool(McrBoundResult& result, const std::vector<GammaProbe>& pool,
                                const SearchOptions& opts) {
    result.lower = lower_bound_at(pool, result.eps_abs, opts.h_tol);
    const GammaProbe* best = nullptr;
    for (const auto& p : pool) {
        if (p.side != ProbeSide::Minus || p.h_value < -opts.h_tol) continue;
        const double b = std::max(p.h_value, 0.0) / result.eps_abs - p.gamma;
        if (!best || b > std::max(best->h_value, 0.0) / result.eps_abs - best->gamma) best = &p;
    }
    if (best) {
        result.lower_tight = std::abs(best->e_orig - result.eps_abs) <= 1e-6 * result.eps_abs ||
                             std::abs(best->h_value) <= 1e-9;
    }
}

inline void set_upper_from_pool(McrBoundResult& result, const std::vector<GammaProbe>& pool,
                                const SearchOptions& opts) {
    result.upper = upper_bound_at(pool, result.eps_abs, opts.h_tol);
    const GammaProbe* best = nullptr;
    double best_bound = std::numeric_limits<double>::infinity();
    for (const auto& p : pool) {
        if (p.side != ProbeSide::Plus || p.gamma >= 0.0 || p.h_value < -opts.h_tol) continue;
        const double b = (std::max(p.h_value, 0.0) / result.eps_abs - 1.0) / p.gamma;
        if (b < best_bound) {
            best_bound = b;
            best = &p;
        }
    }
    if (best) {
        result.upper_tight = std::abs(best->e_orig - result.eps_abs) <= 1e-6 * result.eps_abs ||
                             std::abs(best->h_value) <= 1e-9;
    }
}

} // namespace detail

/// Binary search for the empirical-MCR lower bound. Finds the smallest
/// gamma >= 0 whose probe stays inside the Rashomon set, exploiting the
/// monotonicity of h and e_orig in gamma; reports the tightest bound over
/// every probe evaluated. The probe pool may be shared across eps values.
inline McrBoundResult search_mcr_minus(ProbeCache& cache, std::vector<GammaProbe>& pool,
                                       double eps_abs, const SearchOptions& opts = {}) {
    McrBoundResult result;
    result.eps_abs = eps_abs;
    const auto erm = cache.minimize(1.0, 0.0);
    result.min_e_orig = erm.e_orig;
    detail::check_eps_feasible(eps_abs, erm.e_orig, opts);

    auto eval = [&](double gamma) -> const GammaProbe& {
        pool.push_back(probe_minus(cache, gamma));
        return pool.back();
    };

    const auto& p0 = eval(0.0);
    if (detail::probe_feasible(p0, eps_abs, opts) && opts.prop4_shortcut) {
        result.minus_le_one = true;
        detail::set_lower_from_pool(result, pool, opts);
        return result;
    }

    double gamma_lo = 0.0;
    double gamma_hi = 1.0;
    int iters = 0;
    if (!detail::probe_feasible(p0, eps_abs, opts)) {
        while (iters < opts.max_iters && !detail::probe_feasible(eval(gamma_hi), eps_abs, opts)) {
            gamma_lo = gamma_hi;
            gamma_hi *= 2.0;
            ++iters;
        }
        while (iters < opts.max_iters && gamma_hi - gamma_lo > opts.tol) {
            const double mid = 0.5 * (gamma_lo + gamma_hi);
            if (detail::probe_feasible(eval(mid), eps_abs, opts)) gamma_hi = mid;
            else gamma_lo = mid;
            ++iters;
        }
    }
    detail::set_lower_from_pool(result, pool, opts);
    return result;
}

/// Binary search for the empirical-MCR upper bound: the smallest gamma <= 0
/// whose probe satisfies h >= 0 and e_orig <= eps_abs. Unbounded
/// combinations count as condition failures; if no gamma < 0 is solvable at
/// all the class cannot be upper-bounded and AllProbesUnbounded is thrown.
inline McrBoundResult search_mcr_plus(ProbeCache& cache, std::vector<GammaProbe>& pool,
                                      double eps_abs, const SearchOptions& opts = {}) {
    McrBoundResult result;
    result.eps_abs = eps_abs;
    const auto erm = cache.minimize(1.0, 0.0);
    result.min_e_orig = erm.e_orig;
    detail::check_eps_feasible(eps_abs, erm.e_orig, opts);

    std::size_t solved_negative = 0;
    auto try_eval = [&](double gamma) -> const GammaProbe* {
        try {
            pool.push_back(probe_plus(cache, gamma));
        } catch (const UnboundedCombination&) {
            return nullptr;
        }
        if (gamma < 0.0) ++solved_negative;
        return &pool.back();
    };

    double gamma_hi = 0.0; // condition holds here whenever eps is feasible
    double gamma_lo = -1.0;
    int iters = 0;
    while (iters < opts.max_iters) {
        const auto* p = try_eval(gamma_lo);
        if (p == nullptr || !detail::probe_feasible(*p, eps_abs, opts)) break;
        gamma_hi = gamma_lo;
        gamma_lo *= 2.0;
        ++iters;
    }
    while (iters < opts.max_iters && gamma_hi - gamma_lo > opts.tol) {
        const double mid = 0.5 * (gamma_lo + gamma_hi);
        const auto* p = try_eval(mid);
        if (p != nullptr && detail::probe_feasible(*p, eps_abs, opts)) gamma_hi = mid;
        else gamma_lo = mid;
        ++iters;
    }
    std::size_t attempted_negative = 0;
    for (const auto& p : pool)
        if (p.side == ProbeSide::Plus && p.gamma < 0.0) ++attempted_negative;
    if (solved_negative == 0 && attempted_negative == 0)
        throw AllProbesUnbounded(
            "every negative-gamma combination was unbounded; constrain the class");
    detail::set_upper_from_pool(result, pool, opts);
    if (!std::isfinite(result.upper) && solved_negative == 0)
        throw AllProbesUnbounded(
            "every negative-gamma combination was unbounded; constrain the class");
    return result;
}

inline McrBoundResult search_mcr_minus(const SolvableClass& cls, double eps_abs,
                                       const SearchOptions& opts = {}) {
    ProbeCache cache(cls);
    std::vector<GammaProbe> pool;
    auto result = search_mcr_minus(cache, pool, eps_abs, opts);
    result.probes = std::move(pool);
    return result;
}

inline McrBoundResult search_mcr_plus(const SolvableClass& cls, double eps_abs,
                                      const SearchOptions& opts = {}) {
    ProbeCache cache(cls);
    std::vector<GammaProbe> pool;
    auto result = search_mcr_plus(cache, pool, eps_abs, opts);
    result.probes = std::move(pool);
    return result;
}

/// Runs both searches at one eps_abs over a shared cache and pool.
inline McrBoundResult search_mcr(ProbeCache& cache, std::vector<GammaProbe>& pool, double eps_abs,
                                 const SearchOptions& opts = {}) {
    McrBoundResult minus = search_mcr_minus(cache, pool, eps_abs, opts);
    McrBoundResult plus = search_mcr_plus(cache, pool, eps_abs, opts);
    minus.upper = plus.upper;
    minus.upper_tight = plus.upper_tight;
    return minus;
}

/// Envelope over an eps grid. All searches share one probe cache; the final
/// bounds at every grid point are evaluated against the union of probes, so
/// the envelope is monotone in eps by construction.
inline std::vector<McrBoundResult> bound_curve(const SolvableClass& cls,
                                               const std::vector<double>& eps_grid,
                                               const SearchOptions& opts = {}) {
    ProbeCache cache(cls);
    std::vector<GammaProbe> pool;
    std::vector<McrBoundResult> results;
    results.reserve(eps_grid.size());
    for (const double eps : eps_grid)
        results.push_back(search_mcr(cache, pool, eps, opts));
    for (auto& r : results) {
        detail::set_lower_from_pool(r, pool, opts);
        detail::set_upper_from_pool(r, pool, opts);
        r.probes = pool;
    }
    return results;
}

} // namespace mcrkit
