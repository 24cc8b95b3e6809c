#pragma once

// Disorder-ensemble experiments. Every work item is a pure function of the
// configuration and its grid indices, so the parallel map can be merged back
// in index order and reproduces bit-identical records for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <tuple>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "enaqt/chain.hpp"
#include "enaqt/dephasing_solver.hpp"
#include "enaqt/errors.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/optimizer.hpp"
#include "enaqt/propagate.hpp"
#include "enaqt/random.hpp"
#include "enaqt/redfield.hpp"
#include "enaqt/stats.hpp"
#include "enaqt/steady_state.hpp"

namespace enaqt {

struct PureDephasingModel {
    bool operator==(const PureDephasingModel&) const = default;
};

struct RedfieldModel {
    BathSpec bath;
};

using TransportModel = std::variant<PureDephasingModel, RedfieldModel>;

/// sigma = 0 followed by `points` log-spaced values in [lo, hi].
inline std::vector<double> default_sigma_grid(std::size_t points = 24, double lo = 1e-2, double hi = 10.0)
{
    std::vector<double> g{0.0};
    if (points == 0) return g;
    if (points == 1) {
        g.push_back(lo);
        return g;
    }
    const auto logs = log_grid(lo, hi, points);
    g.insert(g.end(), logs.begin(), logs.end());
    return g;
}

struct SweepConfig {
    std::vector<std::size_t> lengths{40};
    std::vector<double> gradients{0.0, 0.1, 1.0, 10.0};
    std::vector<double> sigmas = default_sigma_grid();
    std::size_t realizations = 100;
    std::map<std::size_t, std::size_t> realizations_by_length{{50, 25}};
    std::uint64_t master_seed = 20220501;
    TransportModel model = PureDephasingModel{};
    InjectionMode injection{};
    double trap_rate = 3.0;
    OptimizerOptions optimizer{};
    std::size_t workers = 0;  // 0: hardware concurrency

    std::size_t realizations_for(std::size_t n_sites) const
    {
        const auto it = realizations_by_length.find(n_sites);
        return it == realizations_by_length.end() ? realizations : it->second;
    }

    void validate() const
    {
        if (lengths.empty() || gradients.empty() || sigmas.empty()) throw InvalidArgument("sweep grids must be non-empty");
        for (auto n : lengths) {
            if (n < 1) throw InvalidArgument("chain lengths must be >= 1");
            if (realizations_for(n) < 1) throw InvalidArgument("realization count must be >= 1");
            TransportSpec{0.0, trap_rate, injection}.validate(n);
        }
        for (double g : gradients) {
            if (!(g >= 0.0)) throw InvalidArgument("gradients must be >= 0");
        }
        for (double s : sigmas) {
            if (!(s >= 0.0)) throw InvalidArgument("disorder strengths must be >= 0");
        }
        if (!(trap_rate > 0.0)) throw InvalidArgument("sweeps need a positive trap rate");
        if (const auto* r = std::get_if<RedfieldModel>(&model)) r->bath.validate();
        optimizer.validate();
    }
};

struct SweepRecord {
    std::size_t n_sites = 0;
    double gradient = 0.0;
    double sigma = 0.0;
    std::size_t realization = 0;
    std::uint64_t seed = 0;
    double ipr = std::numeric_limits<double>::quiet_NaN();
    double gamma_opt = std::numeric_limits<double>::quiet_NaN();
    double current_max = std::numeric_limits<double>::quiet_NaN();
    OptimizationStatus status = OptimizationStatus::Failed;

    bool operator==(const SweepRecord& o) const
    {
        auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
        return n_sites == o.n_sites && gradient == o.gradient && sigma == o.sigma && realization == o.realization &&
               seed == o.seed && same(ipr, o.ipr) && same(gamma_opt, o.gamma_opt) &&
               same(current_max, o.current_max) && status == o.status;
    }
};

/// Steady-state solver for one chain under either transport model.
class ChainTransport {
public:
    ChainTransport(const Hamiltonian& h, const TransportModel& model, const TransportSpec& spec)
        : spec_(spec)
    {
        if (std::holds_alternative<PureDephasingModel>(model)) {
            dephasing_.emplace(h, spec);
        } else {
            reduced_.emplace(redfield_parts(h, std::get<RedfieldModel>(model).bath, spec));
        }
    }

    DensityMatrix state(double gamma)
    {
        if (dephasing_) return dephasing_->state(gamma);
        return reduced_->solve(gamma);
    }

    double current(double gamma) { return steady_current(state(gamma), spec_); }

private:
    TransportSpec spec_;
    std::optional<DephasingSteadyState> dephasing_;
    std::optional<ReducedSteadyState> reduced_;
};

inline std::size_t resolve_workers(std::size_t requested)
{
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// out[i] = fn(i) for i < count, computed on `workers` threads. The first
/// exception thrown by any item is rethrown after all threads join.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>>
{
    using T = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<T> out(count);
    workers = std::min(resolve_workers(workers), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

struct SweepItem {
    std::size_t length_index, gradient_index, sigma_index, realization;
};

inline std::vector<SweepItem> sweep_items(const SweepConfig& c)
{
    std::vector<SweepItem> items;
    for (std::size_t in = 0; in < c.lengths.size(); ++in) {
        const std::size_t reps = c.realizations_for(c.lengths[in]);
        for (std::size_t ig = 0; ig < c.gradients.size(); ++ig) {
            for (std::size_t is = 0; is < c.sigmas.size(); ++is) {
                for (std::size_t r = 0; r < reps; ++r) items.push_back({in, ig, is, r});
            }
        }
    }
    return items;
}

inline ChainSpec chain_for(const SweepConfig& c, const SweepItem& it)
{
    ChainSpec spec;
    spec.n_sites = c.lengths[it.length_index];
    spec.gradient = c.gradients[it.gradient_index];
    spec.disorder = c.sigmas[it.sigma_index];
    spec.seed = derive_seed(c.master_seed, {it.length_index, it.gradient_index, it.sigma_index, it.realization});
    return spec;
}

inline SweepRecord optimize_chain(const ChainSpec& chain, std::size_t realization, const TransportModel& model,
                                  const TransportSpec& transport, const OptimizerOptions& opts)
{
    SweepRecord rec;
    rec.n_sites = chain.n_sites;
    rec.gradient = chain.gradient;
    rec.sigma = chain.disorder;
    rec.realization = realization;
    rec.seed = chain.seed;
    const Hamiltonian h = build_hamiltonian(chain);
    rec.ipr = average_ipr(h);
    try {
        ChainTransport solver(h, model, transport);
        const auto res = find_optimal_dephasing([&](double g) { return solver.current(g); }, opts);
        rec.gamma_opt = res.gamma_opt;
        rec.current_max = res.current_max;
        rec.status = res.status;
    } catch (const SolverFailure&) {
        rec.status = OptimizationStatus::Failed;
    }
    return rec;
}

/// One record per (N, eta, sigma, realization) in that nesting order.
inline std::vector<SweepRecord> run_sweep(const SweepConfig& c)
{
    c.validate();
    const auto items = sweep_items(c);
    const TransportSpec transport{0.0, c.trap_rate, c.injection};
    auto records = parallel_map(items.size(), c.workers, [&](std::size_t i) {
        return optimize_chain(chain_for(c, items[i]), items[i].realization, c.model, transport, c.optimizer);
    });
    if (!records.empty() && std::all_of(records.begin(), records.end(), [](const SweepRecord& r) {
            return r.status == OptimizationStatus::Failed;
        })) {
        throw SolverFailure("every sweep record failed");
    }
    return records;
}

/// Ensemble-mean IPR per (N, eta, sigma) without any transport solves.
struct IprPoint {
    std::size_t n_sites;
    double gradient, sigma;
    SummaryStats ipr;
};

inline std::vector<IprPoint> ipr_survey(const SweepConfig& c)
{
    c.validate();
    const auto items = sweep_items(c);
    const auto iprs = parallel_map(items.size(), c.workers, [&](std::size_t i) {
        return average_ipr(build_hamiltonian(chain_for(c, items[i])));
    });
    std::vector<IprPoint> out;
    std::size_t k = 0;
    while (k < items.size()) {
        std::size_t j = k;
        std::vector<double> xs;
        while (j < items.size() && items[j].length_index == items[k].length_index &&
               items[j].gradient_index == items[k].gradient_index && items[j].sigma_index == items[k].sigma_index) {
            xs.push_back(iprs[j]);
            ++j;
        }
        out.push_back({c.lengths[items[k].length_index], c.gradients[items[k].gradient_index],
                       c.sigmas[items[k].sigma_index], summarize(xs)});
        k = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// aggregation

enum GroupBy : unsigned { ByLength = 1u, ByGradient = 2u, BySigma = 4u };

struct GroupSummary {
    std::size_t n_sites = 0;                                     // 0 when not grouped
    double gradient = std::numeric_limits<double>::quiet_NaN();  // NaN when not grouped
    double sigma = std::numeric_limits<double>::quiet_NaN();
    std::size_t total = 0;
    std::size_t failed = 0;
    std::size_t clipped_low = 0;
    std::size_t clipped_high = 0;
    SummaryStats gamma_opt;  // over non-failed records, clipped included
    SummaryStats ipr;
    SummaryStats current_max;

    double clipped_low_fraction() const { return total ? double(clipped_low) / double(total) : 0.0; }
    double clipped_high_fraction() const { return total ? double(clipped_high) / double(total) : 0.0; }
};

/// Per-group statistics, in order of first appearance of each group.
inline std::vector<GroupSummary> aggregate(const std::vector<SweepRecord>& records, unsigned keys)
{
    using Key = std::tuple<std::size_t, double, double>;
    auto key_of = [keys](const SweepRecord& r) -> Key {
        return {(keys & ByLength) ? r.n_sites : 0, (keys & ByGradient) ? r.gradient : 0.0,
                (keys & BySigma) ? r.sigma : 0.0};
    };
    std::vector<Key> order;
    std::map<Key, std::vector<const SweepRecord*>> groups;
    for (const auto& r : records) {
        const auto k = key_of(r);
        auto [it, inserted] = groups.try_emplace(k);
        if (inserted) order.push_back(k);
        it->second.push_back(&r);
    }
    std::vector<GroupSummary> out;
    for (const auto& k : order) {
        const auto& members = groups[k];
        GroupSummary g;
        if (keys & ByLength) g.n_sites = std::get<0>(k);
        if (keys & ByGradient) g.gradient = std::get<1>(k);
        if (keys & BySigma) g.sigma = std::get<2>(k);
        g.total = members.size();
        std::vector<double> gam, ipr, cur;
        for (const auto* r : members) {
            if (r->status == OptimizationStatus::Failed) {
                ++g.failed;
                continue;
            }
            if (r->status == OptimizationStatus::ClippedLow) ++g.clipped_low;
            if (r->status == OptimizationStatus::ClippedHigh) ++g.clipped_high;
            gam.push_back(r->gamma_opt);
            ipr.push_back(r->ipr);
            cur.push_back(r->current_max);
        }
        if (gam.empty()) continue;
        g.gamma_opt = summarize(gam);
        g.ipr = summarize(ipr);
        g.current_max = summarize(cur);
        out.push_back(g);
    }
    return out;
}

/// Mean and spread of gamma_opt in IPR bins [k w, (k+1) w).
struct IprBin {
    double lower, upper;
    SummaryStats gamma_opt;
};

inline std::vector<IprBin> bin_by_ipr(const std::vector<SweepRecord>& records, double width,
                                      bool interior_only = false)
{
    std::map<long, std::vector<double>> bins;
    for (const auto& r : records) {
        if (r.status == OptimizationStatus::Failed) continue;
        if (interior_only && r.status != OptimizationStatus::Interior) continue;
        bins[static_cast<long>(std::floor(r.ipr / width))].push_back(r.gamma_opt);
    }
    std::vector<IprBin> out;
    for (const auto& [k, xs] : bins) out.push_back({double(k) * width, double(k + 1) * width, summarize(xs)});
    return out;
}

// ---------------------------------------------------------------------------
// power-law fit: ln Gamma = ln A + lambda ln IPR + kappa IPR ln IPR

struct FitResult {
    double amplitude = 0.0;     // A, units of J
    double lambda_exp = 0.0;
    double kappa_exp = 0.0;
    double residual_sd = 0.0;   // of the log residuals
    Eigen::Vector3d covariance_diagonal = Eigen::Vector3d::Zero();  // (ln A, lambda, kappa)
    double error = 0.0;         // sqrt of the summed covariance diagonal
    std::size_t points = 0;

    double predict(double ipr) const { return amplitude * std::pow(ipr, lambda_exp + kappa_exp * ipr); }
};

inline constexpr std::size_t minimum_fit_points = 10;

inline FitResult fit_power_law(const std::vector<double>& ipr, const std::vector<double>& gamma)
{
    if (ipr.size() != gamma.size()) throw InvalidArgument("fit inputs differ in length");
    if (ipr.size() < minimum_fit_points) throw UnderdeterminedFit("power-law fit needs at least 10 points");
    const auto m = static_cast<Eigen::Index>(ipr.size());
    Eigen::MatrixXd x(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double p = ipr[static_cast<std::size_t>(i)];
        const double g = gamma[static_cast<std::size_t>(i)];
        if (!(p > 0.0) || !(g > 0.0)) throw InvalidArgument("power-law fit needs positive IPR and Gamma");
        const double lp = std::log(p);
        x(i, 0) = 1.0;
        x(i, 1) = lp;
        x(i, 2) = p * lp;
        y(i) = std::log(g);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < 3) throw UnderdeterminedFit("power-law design matrix is rank deficient");
    const Eigen::Vector3d beta = qr.solve(y);
    const Eigen::VectorXd resid = y - x * beta;

    FitResult f;
    f.points = static_cast<std::size_t>(m);
    f.amplitude = std::exp(beta(0));
    f.lambda_exp = beta(1);
    f.kappa_exp = beta(2);
    const double dof = m > 3 ? double(m - 3) : 1.0;
    const double s2 = resid.squaredNorm() / dof;
    f.residual_sd = std::sqrt(s2);
    const Eigen::Matrix3d xtx = x.transpose() * x;
    f.covariance_diagonal = (s2 * xtx.inverse()).diagonal();
    f.error = std::sqrt(f.covariance_diagonal.sum());
    return f;
}

/// Fits the eta = 0 Interior records.
inline FitResult fit_power_law(const std::vector<SweepRecord>& records)
{
    std::vector<double> ipr, gamma;
    for (const auto& r : records) {
        if (r.gradient != 0.0 || r.status != OptimizationStatus::Interior) continue;
        ipr.push_back(r.ipr);
        gamma.push_back(r.gamma_opt);
    }
    return fit_power_law(ipr, gamma);
}

inline std::map<std::size_t, FitResult> fit_power_law_by_length(const std::vector<SweepRecord>& records)
{
    std::map<std::size_t, std::vector<SweepRecord>> by_n;
    for (const auto& r : records) by_n[r.n_sites].push_back(r);
    std::map<std::size_t, FitResult> out;
    for (const auto& [n, rs] : by_n) out.emplace(n, fit_power_law(rs));
    return out;
}

// ---------------------------------------------------------------------------
// current peak vs. population uniformity

struct UniformisationRecord {
    std::size_t n_sites = 0;
    double gradient = 0.0;
    double sigma = 0.0;
    std::size_t realization = 0;
    std::uint64_t seed = 0;
    double ipr = 0.0;
    double gamma_opt = 0.0;
    OptimizationStatus status_current = OptimizationStatus::Failed;
    double gamma_min_variance = 0.0;
    double min_variance = 0.0;
    OptimizationStatus status_variance = OptimizationStatus::Failed;
};

struct UniformisationPoint {
    std::size_t n_sites = 0;
    double gradient = 0.0;
    double sigma = 0.0;
    std::size_t count = 0;  // realizations where both searches succeeded
    double mean_ipr = 0.0;
    double mean_gamma_opt = 0.0;
    double mean_gamma_min_variance = 0.0;
};

inline std::vector<UniformisationRecord> uniformisation_records(const SweepConfig& c)
{
    c.validate();
    if (!std::holds_alternative<PureDephasingModel>(c.model)) {
        throw InvalidArgument("uniformisation comparison uses the pure-dephasing model");
    }
    const auto items = sweep_items(c);
    const TransportSpec transport{0.0, c.trap_rate, c.injection};
    return parallel_map(items.size(), c.workers, [&](std::size_t i) {
        const ChainSpec chain = chain_for(c, items[i]);
        UniformisationRecord rec;
        rec.n_sites = chain.n_sites;
        rec.gradient = chain.gradient;
        rec.sigma = chain.disorder;
        rec.realization = items[i].realization;
        rec.seed = chain.seed;
        const Hamiltonian h = build_hamiltonian(chain);
        rec.ipr = average_ipr(h);
        DephasingSteadyState solver(h, transport);
        const auto cur = find_optimal_dephasing([&](double g) { return solver.current(g); }, c.optimizer);
        const auto var = find_optimal_dephasing(
            [&](double g) { return -population_variance(solver.state(g)); }, c.optimizer);
        rec.gamma_opt = cur.gamma_opt;
        rec.status_current = cur.status;
        rec.gamma_min_variance = var.gamma_opt;
        rec.min_variance = -var.current_max;
        rec.status_variance = var.status;
        return rec;
    });
}

inline std::vector<UniformisationPoint> summarize_uniformisation(const std::vector<UniformisationRecord>& recs)
{
    using Key = std::tuple<std::size_t, double, double>;
    std::vector<Key> order;
    std::map<Key, UniformisationPoint> points;
    for (const auto& r : recs) {
        const Key k{r.n_sites, r.gradient, r.sigma};
        auto [it, inserted] = points.try_emplace(k);
        if (inserted) {
            order.push_back(k);
            it->second.n_sites = r.n_sites;
            it->second.gradient = r.gradient;
            it->second.sigma = r.sigma;
        }
        if (r.status_current == OptimizationStatus::Failed || r.status_variance == OptimizationStatus::Failed) continue;
        auto& p = it->second;
        ++p.count;
        p.mean_ipr += r.ipr;
        p.mean_gamma_opt += r.gamma_opt;
        p.mean_gamma_min_variance += r.gamma_min_variance;
    }
    std::vector<UniformisationPoint> out;
    for (const auto& k : order) {
        auto p = points[k];
        if (p.count == 0) continue;
        const double c = double(p.count);
        p.mean_ipr /= c;
        p.mean_gamma_opt /= c;
        p.mean_gamma_min_variance /= c;
        out.push_back(p);
    }
    return out;
}

inline std::vector<UniformisationPoint> uniformisation_comparison(const SweepConfig& c)
{
    return summarize_uniformisation(uniformisation_records(c));
}

// ---------------------------------------------------------------------------
// ordered chains under a gradient only

inline std::vector<SweepRecord> gradient_only_scan(const std::vector<std::size_t>& lengths,
                                                   const std::vector<double>& gradients,
                                                   const TransportSpec& transport = {},
                                                   const OptimizerOptions& opts = {}, std::size_t workers = 0)
{
    if (lengths.empty() || gradients.empty()) throw InvalidArgument("gradient scan grids must be non-empty");
    const std::size_t count = lengths.size() * gradients.size();
    return parallel_map(count, workers, [&](std::size_t i) {
        ChainSpec chain;
        chain.n_sites = lengths[i / gradients.size()];
        chain.gradient = gradients[i % gradients.size()];
        return optimize_chain(chain, 0, PureDephasingModel{}, transport, opts);
    });
}

// ---------------------------------------------------------------------------
// closed-chain wavepacket spreading

struct TransientConfig {
    std::size_t n_sites = 41;
    double gradient = 0.0;
    double disorder = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> dephasing_rates{0.0, 0.5, 1.0, 2.0};
    std::vector<double> times;  // ascending, starting at 0
    double band = 0.01;         // relative convergence band around the asymptote
    PropagationOptions propagation{};
    std::size_t workers = 0;
};

struct TransientTrace {
    double dephasing_rate = 0.0;
    std::vector<double> times;
    std::vector<double> variance;
    double asymptote = 0.0;                  // uniform site occupation
    std::optional<double> convergence_time;  // first entry into the band
    bool stays_converged = false;            // never leaves the band after entering it
};

/// Variance of the uniform occupation of N sites about the centre, (N^2 - 1)/12.
inline double uniform_wavepacket_variance(std::size_t n_sites)
{
    const double n = static_cast<double>(n_sites);
    return (n * n - 1.0) / 12.0;
}

inline std::vector<double> linear_times(double t_end, std::size_t points)
{
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i) t[i] = t_end * double(i) / double(points - 1);
    return t;
}

inline std::vector<TransientTrace> transient_experiment(const TransientConfig& c)
{
    if (c.n_sites % 2 == 0) throw InvalidArgument("transient experiment needs an odd chain length");
    if (c.times.empty()) throw InvalidArgument("transient experiment needs output times");
    ChainSpec chain{c.n_sites, c.gradient, c.disorder, 1.0, c.seed};
    const Hamiltonian h = build_hamiltonian(chain);
    const std::size_t center = (c.n_sites + 1) / 2;
    const double asym = uniform_wavepacket_variance(c.n_sites);

    return parallel_map(c.dephasing_rates.size(), c.workers, [&](std::size_t k) {
        const double gamma = c.dephasing_rates[k];
        const TransportSpec closed{gamma, 0.0, {}};
        const Liouvillian l = build_liouvillian(h, closed);
        const auto states = propagate(l, DensityMatrix::localized(c.n_sites, center, false), c.times, c.propagation);
        TransientTrace tr;
        tr.dephasing_rate = gamma;
        tr.times = c.times;
        tr.asymptote = asym;
        for (const auto& s : states) tr.variance.push_back(wavepacket_variance(s, center));
        const double tol = c.band * asym;
        for (std::size_t i = 0; i < tr.variance.size(); ++i) {
            if (std::abs(tr.variance[i] - asym) <= tol) {
                tr.convergence_time = tr.times[i];
                tr.stays_converged = std::all_of(tr.variance.begin() + static_cast<std::ptrdiff_t>(i),
                                                 tr.variance.end(),
                                                 [&](double v) { return std::abs(v - asym) <= tol; });
                break;
            }
        }
        return tr;
    });
}

} // namespace enaqt
