#pragma once

// Plain-text experiment configuration: one `key = value` per line, `#` starts
// a comment, lists are comma separated. Every quantity is in units of J.
// Unknown or repeated keys are rejected.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "enaqt/errors.hpp"
#include "enaqt/records_io.hpp"
#include "enaqt/sweep.hpp"

namespace enaqt {

struct ExperimentConfig {
    SweepConfig sweep;
    TransientConfig transient;
    std::string input;  // sweep CSV read by the fit experiment
    double t_end = 0.0;
    std::size_t time_points = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<double> parse_double_list(std::string_view v)
{
    std::vector<double> out;
    for (auto item : split(v, ',')) out.push_back(parse_double(trim(item)));
    return out;
}

inline std::vector<std::size_t> parse_size_list(std::string_view v)
{
    std::vector<std::size_t> out;
    for (auto item : split(v, ',')) out.push_back(parse_integer<std::size_t>(trim(item)));
    return out;
}

inline bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

} // namespace detail

/// Ordered key/value pairs with line numbers for error reports.
struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line;
};

inline std::vector<KeyValue> parse_key_values(std::istream& is)
{
    std::vector<KeyValue> out;
    std::map<std::string, std::size_t> seen;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string_view s = raw;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const auto key = detail::trim(s.substr(0, eq));
        const auto value = detail::trim(s.substr(eq + 1));
        if (key.empty() || !std::all_of(key.begin(), key.end(), detail::is_key_char)) {
            throw ConfigError("line " + std::to_string(line) + ": malformed key");
        }
        if (value.empty()) throw ConfigError("line " + std::to_string(line) + ": empty value for '" + std::string(key) + "'");
        if (auto [it, inserted] = seen.emplace(key, line); !inserted) {
            throw ConfigError("line " + std::to_string(line) + ": '" + std::string(key) + "' already set on line " +
                              std::to_string(it->second));
        }
        out.push_back({std::string(key), std::string(value), line});
    }
    return out;
}

/// Applies the entries on top of `cfg`, leaving unmentioned fields untouched.
inline void apply_config(const std::vector<KeyValue>& entries, ExperimentConfig& cfg)
{
    auto& sw = cfg.sweep;
    auto& tr = cfg.transient;
    // bath pieces are collected first because they only make sense together
    std::string model, spectrum;
    double beta = 1.0, magnitude = 1.0, dl_coupling = 1.0, dl_linewidth = 1.0;
    bool bath_keys = false;
    std::string injection;
    std::size_t injection_site = 0;
    std::size_t sigma_points = 24;
    double sigma_min = 1e-2, sigma_max = 10.0;
    bool sigma_grid_keys = false, sigma_list = false;

    using Handler = std::function<void(std::string_view)>;
    const std::map<std::string, Handler, std::less<>> handlers{
        {"lengths", [&](auto v) { sw.lengths = detail::parse_size_list(v); }},
        {"gradients", [&](auto v) { sw.gradients = detail::parse_double_list(v); }},
        {"sigmas", [&](auto v) { sw.sigmas = detail::parse_double_list(v); sigma_list = true; }},
        {"sigma_points", [&](auto v) { sigma_points = parse_integer<std::size_t>(v); sigma_grid_keys = true; }},
        {"sigma_min", [&](auto v) { sigma_min = parse_double(v); sigma_grid_keys = true; }},
        {"sigma_max", [&](auto v) { sigma_max = parse_double(v); sigma_grid_keys = true; }},
        {"realizations", [&](auto v) { sw.realizations = parse_integer<std::size_t>(v); }},
        {"realizations_by_length",
         [&](auto v) {
             sw.realizations_by_length.clear();
             for (auto item : split(v, ',')) {
                 const auto parts = split(detail::trim(item), ':');
                 if (parts.size() != 2) throw ConfigError("realizations_by_length entries look like N:count");
                 sw.realizations_by_length[parse_integer<std::size_t>(detail::trim(parts[0]))] =
                     parse_integer<std::size_t>(detail::trim(parts[1]));
             }
         }},
        {"master_seed", [&](auto v) { sw.master_seed = parse_integer<std::uint64_t>(v); }},
        {"model", [&](auto v) { model = v; }},
        {"beta", [&](auto v) { beta = parse_double(v); bath_keys = true; }},
        {"spectrum", [&](auto v) { spectrum = v; bath_keys = true; }},
        {"spectrum_magnitude", [&](auto v) { magnitude = parse_double(v); bath_keys = true; }},
        {"drude_coupling", [&](auto v) { dl_coupling = parse_double(v); bath_keys = true; }},
        {"drude_linewidth", [&](auto v) { dl_linewidth = parse_double(v); bath_keys = true; }},
        {"injection", [&](auto v) { injection = v; }},
        {"injection_site", [&](auto v) { injection_site = parse_integer<std::size_t>(v); }},
        {"trap_rate", [&](auto v) { sw.trap_rate = parse_double(v); }},
        {"gamma_lower", [&](auto v) { sw.optimizer.lower = parse_double(v); }},
        {"gamma_upper", [&](auto v) { sw.optimizer.upper = parse_double(v); }},
        {"grid_points", [&](auto v) { sw.optimizer.grid_points = parse_integer<std::size_t>(v); }},
        {"gamma_rel_tol", [&](auto v) { sw.optimizer.rel_tol = parse_double(v); }},
        {"clip_margin", [&](auto v) { sw.optimizer.clip_margin = parse_double(v); }},
        {"workers", [&](auto v) { sw.workers = tr.workers = parse_integer<std::size_t>(v); }},
        {"n_sites", [&](auto v) { tr.n_sites = parse_integer<std::size_t>(v); }},
        {"gradient", [&](auto v) { tr.gradient = parse_double(v); }},
        {"sigma", [&](auto v) { tr.disorder = parse_double(v); }},
        {"seed", [&](auto v) { tr.seed = parse_integer<std::uint64_t>(v); }},
        {"dephasing_rates", [&](auto v) { tr.dephasing_rates = detail::parse_double_list(v); }},
        {"t_end", [&](auto v) { cfg.t_end = parse_double(v); }},
        {"time_points", [&](auto v) { cfg.time_points = parse_integer<std::size_t>(v); }},
        {"band", [&](auto v) { tr.band = parse_double(v); }},
        {"input", [&](auto v) { cfg.input = v; }},
    };

    for (const auto& e : entries) {
        const auto it = handlers.find(e.key);
        if (it == handlers.end()) throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
        try {
            it->second(e.value);
        } catch (const ConfigError& err) {
            throw ConfigError("line " + std::to_string(e.line) + ": " + err.what());
        } catch (const InvalidArgument& err) {
            throw ConfigError("line " + std::to_string(e.line) + ": " + e.key + ": " + err.what());
        }
    }

    if (sigma_list && sigma_grid_keys) throw ConfigError("give either sigmas or sigma_points/min/max, not both");
    if (sigma_grid_keys) sw.sigmas = default_sigma_grid(sigma_points, sigma_min, sigma_max);

    if (model == "redfield" || (model.empty() && bath_keys && std::holds_alternative<RedfieldModel>(sw.model))) {
        BathSpec bath;
        if (const auto* r = std::get_if<RedfieldModel>(&sw.model)) bath = r->bath;
        if (bath_keys) {
            bath.beta = beta;
            if (spectrum.empty() || spectrum == "flat") {
                bath.spectrum = FlatSpectrum{magnitude};
            } else if (spectrum == "drude_lorentz") {
                bath.spectrum = DrudeLorentzSpectrum{dl_coupling, dl_linewidth};
            } else {
                throw ConfigError("unknown spectrum '" + spectrum + "'");
            }
        }
        sw.model = RedfieldModel{bath};
    } else if (model == "pure_dephasing" || model.empty()) {
        if (bath_keys) throw ConfigError("bath keys need model = redfield");
        if (model == "pure_dephasing") sw.model = PureDephasingModel{};
    } else {
        throw ConfigError("unknown model '" + model + "'");
    }

    if (injection == "single_site") {
        if (injection_site == 0) throw ConfigError("single_site injection needs injection_site");
        sw.injection = InjectionMode::single_site(injection_site);
    } else if (injection == "all_sites" || injection.empty()) {
        if (injection_site != 0) throw ConfigError("injection_site needs injection = single_site");
        if (injection == "all_sites") sw.injection = InjectionMode::all_sites();
    } else {
        throw ConfigError("unknown injection mode '" + injection + "'");
    }

    if (cfg.time_points != 0 || cfg.t_end != 0.0) {
        if (cfg.time_points < 2 || !(cfg.t_end > 0.0)) throw ConfigError("t_end must be > 0 with time_points >= 2");
        tr.times = linear_times(cfg.t_end, cfg.time_points);
    }
}

inline ExperimentConfig load_config(std::istream& is, ExperimentConfig base = {})
{
    apply_config(parse_key_values(is), base);
    return base;
}

} // namespace enaqt
