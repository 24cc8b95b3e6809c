#pragma once

// Bounded maximisation of an expensive scalar objective over the dephasing
// rate: a log-spaced coarse scan followed by golden-section refinement on
// log(Gamma) inside the best bracket.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include "enaqt/errors.hpp"

namespace enaqt {

enum class OptimizationStatus { Interior, ClippedLow, ClippedHigh, Failed };

inline std::string_view to_string(OptimizationStatus s)
{
    switch (s) {
    case OptimizationStatus::Interior: return "interior";
    case OptimizationStatus::ClippedLow: return "clipped_low";
    case OptimizationStatus::ClippedHigh: return "clipped_high";
    case OptimizationStatus::Failed: return "failed";
    }
    return "failed";
}

inline OptimizationStatus status_from_string(std::string_view s)
{
    if (s == "interior") return OptimizationStatus::Interior;
    if (s == "clipped_low") return OptimizationStatus::ClippedLow;
    if (s == "clipped_high") return OptimizationStatus::ClippedHigh;
    if (s == "failed") return OptimizationStatus::Failed;
    throw InvalidArgument("unknown optimization status '" + std::string(s) + "'");
}

struct OptimizerOptions {
    double lower = 1e-3;
    double upper = 50.0;
    std::size_t grid_points = 40;
    double rel_tol = 1e-4;       // on Gamma
    double clip_margin = 1e-3;   // in J
    double tie_rel_tol = 1e-8;   // plateau tie-break on the objective
    bool keep_curve = false;

    void validate() const
    {
        if (!(lower > 0.0) || !(upper > lower)) throw InvalidArgument("optimizer bounds must satisfy 0 < lower < upper");
        if (grid_points < 2) throw InvalidArgument("optimizer grid needs at least two points");
        if (!(rel_tol > 0.0)) throw InvalidArgument("optimizer tolerance must be > 0");
    }
};

struct OptimizationResult {
    double gamma_opt = std::numeric_limits<double>::quiet_NaN();
    double current_max = std::numeric_limits<double>::quiet_NaN();
    OptimizationStatus status = OptimizationStatus::Failed;
    std::size_t evaluations = 0;
    std::size_t failures = 0;
    std::size_t scan_successes = 0;
    std::vector<std::pair<double, double>> curve;  // (Gamma, objective), scan points first
};

inline std::vector<double> log_grid(double lower, double upper, std::size_t points)
{
    std::vector<double> g(points);
    const double a = std::log(lower);
    const double b = std::log(upper);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    g.front() = lower;
    g.back() = upper;
    return g;
}

/// Maximises objective(Gamma) on [lower, upper]. A SolverFailure thrown by the
/// objective skips that trial point; the result is Failed only if every scan
/// point fails.
template <class Objective>
OptimizationResult find_optimal_dephasing(Objective&& objective, const OptimizerOptions& opts = {})
{
    opts.validate();
    OptimizationResult result;
    std::vector<std::pair<double, double>> samples;  // successful evaluations

    auto evaluate = [&](double gamma) -> double {
        ++result.evaluations;
        try {
            const double v = objective(gamma);
            if (!std::isfinite(v)) throw SolverFailure("objective is not finite");
            samples.emplace_back(gamma, v);
            return v;
        } catch (const SolverFailure&) {
            ++result.failures;
            return -std::numeric_limits<double>::infinity();
        }
    };

    const auto grid = log_grid(opts.lower, opts.upper, opts.grid_points);
    std::vector<double> scan(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) scan[i] = evaluate(grid[i]);
    result.scan_successes = samples.size();
    if (samples.empty()) {
        if (opts.keep_curve) result.curve = std::move(samples);
        return result;
    }

    // first index attaining the scan maximum: the smallest Gamma wins ties
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.size(); ++i) {
        if (scan[i] > scan[best]) best = i;
    }

    double lo = std::log(grid[best == 0 ? 0 : best - 1]);
    double hi = std::log(grid[std::min(best + 1, grid.size() - 1)]);
    const double tol = std::log1p(opts.rel_tol);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = evaluate(std::exp(x1));
    double f2 = evaluate(std::exp(x2));
    while (hi - lo > tol) {
        // ">=" keeps the lower half on ties
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = evaluate(std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = evaluate(std::exp(x2));
        }
    }

    double f_max = -std::numeric_limits<double>::infinity();
    for (const auto& [g, v] : samples) f_max = std::max(f_max, v);
    const double threshold = f_max - opts.tie_rel_tol * std::abs(f_max);
    double gamma_best = std::numeric_limits<double>::infinity();
    for (const auto& [g, v] : samples) {
        if (v >= threshold && g < gamma_best) gamma_best = g;
    }

    result.gamma_opt = gamma_best;
    result.current_max = f_max;
    if (gamma_best - opts.lower <= opts.clip_margin) {
        result.status = OptimizationStatus::ClippedLow;
    } else if (opts.upper - gamma_best <= opts.clip_margin) {
        result.status = OptimizationStatus::ClippedHigh;
    } else {
        result.status = OptimizationStatus::Interior;
    }
    if (opts.keep_curve) result.curve = std::move(samples);
    return result;
}

/// The coarse-scan part of a kept curve.
inline std::vector<std::pair<double, double>> scan_samples(const OptimizationResult& r)
{
    const auto n = std::min(r.scan_successes, r.curve.size());
    return {r.curve.begin(), r.curve.begin() + static_cast<std::ptrdiff_t>(n)};
}

} // namespace enaqt
