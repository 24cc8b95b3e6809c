#pragma once

// CSV and JSON artifacts consumed by the plotting scripts.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "enaqt/errors.hpp"
#include "enaqt/optimizer.hpp"
#include "enaqt/sweep.hpp"

namespace enaqt {

inline constexpr std::string_view library_version = "0.1.0";

inline constexpr std::string_view record_csv_header = "N,eta,sigma,realization,seed,ipr,gamma_opt,i_max,status";

/// Shortest round-trip representation; "nan", "inf" and "-inf" for non-finite values.
inline std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw Error("cannot format number");
    return {buf, end};
}

inline double parse_double(std::string_view s)
{
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw InvalidArgument("not a number: '" + std::string(s) + "'");
    return v;
}

template <class Int>
Int parse_integer(std::string_view s)
{
    Int v{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw InvalidArgument("not an integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

inline void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records)
{
    os << record_csv_header << '\n';
    for (const auto& r : records) {
        os << r.n_sites << ',' << format_double(r.gradient) << ',' << format_double(r.sigma) << ',' << r.realization
           << ',' << r.seed << ',' << format_double(r.ipr) << ',' << format_double(r.gamma_opt) << ','
           << format_double(r.current_max) << ',' << to_string(r.status) << '\n';
    }
}

inline std::vector<SweepRecord> read_records_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("empty record file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != record_csv_header) throw InvalidArgument("unexpected record header: '" + line + "'");
    std::vector<SweepRecord> out;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 9) throw InvalidArgument("row " + std::to_string(row) + ": expected 9 fields");
        try {
            SweepRecord r;
            r.n_sites = parse_integer<std::size_t>(f[0]);
            r.gradient = parse_double(f[1]);
            r.sigma = parse_double(f[2]);
            r.realization = parse_integer<std::size_t>(f[3]);
            r.seed = parse_integer<std::uint64_t>(f[4]);
            r.ipr = parse_double(f[5]);
            r.gamma_opt = parse_double(f[6]);
            r.current_max = parse_double(f[7]);
            r.status = status_from_string(f[8]);
            out.push_back(r);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("row " + std::to_string(row) + ": " + e.what());
        }
    }
    return out;
}

inline void write_uniformisation_csv(std::ostream& os, const std::vector<UniformisationRecord>& records)
{
    os << "N,eta,sigma,realization,seed,ipr,gamma_opt,status_current,gamma_min_var,min_var,status_variance\n";
    for (const auto& r : records) {
        os << r.n_sites << ',' << format_double(r.gradient) << ',' << format_double(r.sigma) << ',' << r.realization
           << ',' << r.seed << ',' << format_double(r.ipr) << ',' << format_double(r.gamma_opt) << ','
           << to_string(r.status_current) << ',' << format_double(r.gamma_min_variance) << ','
           << format_double(r.min_variance) << ',' << to_string(r.status_variance) << '\n';
    }
}

inline void write_uniformisation_summary_csv(std::ostream& os, const std::vector<UniformisationPoint>& points)
{
    os << "N,eta,sigma,count,mean_ipr,mean_gamma_opt,mean_gamma_min_var\n";
    for (const auto& p : points) {
        os << p.n_sites << ',' << format_double(p.gradient) << ',' << format_double(p.sigma) << ',' << p.count << ','
           << format_double(p.mean_ipr) << ',' << format_double(p.mean_gamma_opt) << ','
           << format_double(p.mean_gamma_min_variance) << '\n';
    }
}

inline void write_transient_csv(std::ostream& os, const std::vector<TransientTrace>& traces)
{
    os << "t,gamma,variance\n";
    for (const auto& tr : traces) {
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            os << format_double(tr.times[i]) << ',' << format_double(tr.dephasing_rate) << ','
               << format_double(tr.variance[i]) << '\n';
        }
    }
}

inline void write_groups_csv(std::ostream& os, const std::vector<GroupSummary>& groups)
{
    os << "N,eta,sigma,total,failed,clipped_low,clipped_high,gamma_mean,gamma_std,gamma_min,gamma_max,ipr_mean,"
          "ipr_std\n";
    for (const auto& g : groups) {
        os << g.n_sites << ',' << format_double(g.gradient) << ',' << format_double(g.sigma) << ',' << g.total << ','
           << g.failed << ',' << g.clipped_low << ',' << g.clipped_high << ',' << format_double(g.gamma_opt.mean)
           << ',' << format_double(g.gamma_opt.std) << ',' << format_double(g.gamma_opt.min) << ','
           << format_double(g.gamma_opt.max) << ',' << format_double(g.ipr.mean) << ','
           << format_double(g.ipr.std) << '\n';
    }
}

// ---------------------------------------------------------------------------
// JSON

/// JSON has no infinities; they are written as strings.
inline nlohmann::json json_number(double x)
{
    if (std::isfinite(x)) return x;
    return format_double(x);
}

inline nlohmann::json to_json(const OptimizerOptions& o)
{
    return {{"lower", o.lower},         {"upper", o.upper},           {"grid_points", o.grid_points},
            {"rel_tol", o.rel_tol},     {"clip_margin", o.clip_margin}, {"tie_rel_tol", o.tie_rel_tol}};
}

inline nlohmann::json to_json(const TransportModel& m)
{
    if (std::holds_alternative<PureDephasingModel>(m)) return {{"kind", "pure_dephasing"}};
    const auto& bath = std::get<RedfieldModel>(m).bath;
    nlohmann::json j{{"kind", "redfield"}, {"beta", json_number(bath.beta)}};
    if (const auto* f = std::get_if<FlatSpectrum>(&bath.spectrum)) {
        j["spectrum"] = {{"kind", "flat"}, {"magnitude", f->magnitude}};
    } else {
        const auto& dl = std::get<DrudeLorentzSpectrum>(bath.spectrum);
        j["spectrum"] = {{"kind", "drude_lorentz"}, {"coupling", dl.coupling}, {"linewidth", dl.linewidth}};
    }
    return j;
}

inline nlohmann::json to_json(const InjectionMode& m)
{
    if (m.kind == InjectionMode::Kind::AllSites) return {{"kind", "all_sites"}};
    return {{"kind", "single_site"}, {"site", m.site}};
}

inline nlohmann::json to_json(const SweepConfig& c)
{
    nlohmann::json reps = nlohmann::json::object();
    for (auto n : c.lengths) reps[std::to_string(n)] = c.realizations_for(n);
    return {{"lengths", c.lengths},
            {"gradients", c.gradients},
            {"sigmas", c.sigmas},
            {"realizations", reps},
            {"master_seed", c.master_seed},
            {"model", to_json(c.model)},
            {"injection", to_json(c.injection)},
            {"trap_rate", c.trap_rate},
            {"optimizer", to_json(c.optimizer)}};
}

inline nlohmann::json to_json(const FitResult& f)
{
    return {{"amplitude", f.amplitude},
            {"lambda", f.lambda_exp},
            {"kappa", f.kappa_exp},
            {"residual_sd", f.residual_sd},
            {"covariance_diagonal", {f.covariance_diagonal(0), f.covariance_diagonal(1), f.covariance_diagonal(2)}},
            {"error", f.error},
            {"points", f.points}};
}

/// Status counts per (N, eta) in order of first appearance. Unlike aggregate()
/// this keeps groups in which every record failed.
inline nlohmann::json clipped_fractions(const std::vector<SweepRecord>& records)
{
    using Key = std::pair<std::size_t, double>;
    std::vector<Key> order;
    std::map<Key, GroupSummary> groups;
    for (const auto& r : records) {
        auto [it, inserted] = groups.try_emplace(Key{r.n_sites, r.gradient});
        if (inserted) order.push_back(it->first);
        auto& g = it->second;
        ++g.total;
        g.failed += r.status == OptimizationStatus::Failed;
        g.clipped_low += r.status == OptimizationStatus::ClippedLow;
        g.clipped_high += r.status == OptimizationStatus::ClippedHigh;
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : order) {
        const auto& g = groups.at(k);
        out.push_back({{"N", k.first},
                       {"eta", k.second},
                       {"total", g.total},
                       {"failed", g.failed},
                       {"clipped_low", g.clipped_low_fraction()},
                       {"clipped_high", g.clipped_high_fraction()}});
    }
    return out;
}

struct RunTimings {
    double wall_seconds = 0.0;
    std::string started;  // ISO-8601 UTC
};

inline nlohmann::json run_manifest(std::string_view experiment, const nlohmann::json& config,
                                   const RunTimings& timings, std::size_t workers,
                                   const std::vector<SweepRecord>* records = nullptr)
{
    nlohmann::json j{{"experiment", experiment},
                     {"version", library_version},
                     {"config", config},
                     {"workers", workers},
                     {"timings", {{"started", timings.started}, {"wall_seconds", timings.wall_seconds}}}};
    if (records) {
        j["records"] = records->size();
        j["clipped_fractions"] = clipped_fractions(*records);
    }
    return j;
}

} // namespace enaqt
