// enaqt: run one transport experiment and write its CSV and manifest.
//
//   enaqt sweep --config sweep.cfg --out results/ --workers 4
//   enaqt fit --input results/records.csv --out results/
//
// Exit status: 0 ok, 2 usage, 3 bad configuration, 4 unwritable output,
// 5 numerical or other runtime failure. Failures also print a JSON object on
// stderr.
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "enaqt.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace enaqt;

namespace {

enum Exit : int { Ok = 0, Usage = 2, BadConfig = 3, BadOutput = 4, Runtime = 5 };

struct OutputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int report(Exit code, std::string_view kind, std::string_view message)
{
    std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", int(code)}}.dump() << '\n';
    return code;
}

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

class OutputDir {
public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir))
    {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw OutputError("cannot create output directory " + dir_.string());
    }

    template <class Writer>
    void write(const std::string& name, Writer&& writer) const
    {
        const auto path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw OutputError("cannot open " + path.string() + " for writing");
        writer(os);
        os.flush();
        if (!os) throw OutputError("write to " + path.string() + " failed");
    }

    void write_json(const std::string& name, const json& j) const
    {
        write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    }

private:
    fs::path dir_;
};

struct Options {
    std::string experiment;
    std::string config_path;
    std::string out = ".";
    std::string input;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

ExperimentConfig defaults_for(const std::string& experiment)
{
    ExperimentConfig c;
    if (experiment == "optimize") {
        c.sweep.lengths = {10};
        c.sweep.gradients = {0.0};
        c.sweep.sigmas = {0.0};
    } else if (experiment == "redfield-sweep") {
        c.sweep.lengths = {10};
        c.sweep.model = RedfieldModel{BathSpec{1.0, FlatSpectrum{1.0}}};
    } else if (experiment == "uniformisation") {
        c.sweep.lengths = {10};
        c.sweep.sigmas = default_sigma_grid(8);
        c.sweep.realizations = 50;
    } else if (experiment == "gradient-scan") {
        c.sweep.lengths = {10, 20, 30, 40, 50};
        c.sweep.gradients = {0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
    } else if (experiment == "dynamics") {
        c.transient.dephasing_rates = {0.0, 0.1, 0.5, 1.0, 2.0};
        c.transient.times = linear_times(1500.0, 1501);
    }
    return c;
}

ExperimentConfig load_experiment_config(const Options& o)
{
    auto cfg = defaults_for(o.experiment);
    if (!o.config_path.empty()) {
        std::ifstream is(o.config_path);
        if (!is) throw ConfigError("cannot read config file " + o.config_path);
        cfg = load_config(is, std::move(cfg));
    }
    if (o.seed) {
        cfg.sweep.master_seed = *o.seed;
        cfg.transient.seed = *o.seed;
    }
    if (o.workers) {
        cfg.sweep.workers = *o.workers;
        cfg.transient.workers = *o.workers;
    }
    if (o.experiment == "optimize") {
        cfg.sweep.realizations = 1;
        cfg.sweep.realizations_by_length.clear();
    }
    if (!o.input.empty()) cfg.input = o.input;
    if (o.experiment == "sweep" || o.experiment == "optimize" || o.experiment == "redfield-sweep" ||
        o.experiment == "uniformisation") {
        cfg.sweep.validate();
    }
    return cfg;
}

json transient_json(const TransientConfig& c)
{
    return {{"n_sites", c.n_sites},
            {"gradient", c.gradient},
            {"sigma", c.disorder},
            {"seed", c.seed},
            {"dephasing_rates", c.dephasing_rates},
            {"t_end", c.times.empty() ? 0.0 : c.times.back()},
            {"time_points", c.times.size()},
            {"band", c.band}};
}

const std::set<std::string> experiments{"sweep",          "fit",           "optimize", "dynamics",
                                        "redfield-sweep", "uniformisation", "gradient-scan"};

int run(const Options& o)
{
    if (!experiments.contains(o.experiment)) throw UsageError("unknown experiment '" + o.experiment + "'");
    const auto started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = load_experiment_config(o);
    const OutputDir out(o.out);
    const std::size_t workers = resolve_workers(cfg.sweep.workers);
    auto timings = [&] {
        return RunTimings{std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), started};
    };

    const auto& e = o.experiment;
    if (e == "sweep" || e == "optimize" || e == "redfield-sweep") {
        const auto records = run_sweep(cfg.sweep);
        out.write("records.csv", [&](std::ostream& os) { write_records_csv(os, records); });
        out.write("groups.csv", [&](std::ostream& os) {
            write_groups_csv(os, aggregate(records, ByLength | ByGradient | BySigma));
        });
        out.write_json("manifest.json", run_manifest(e, to_json(cfg.sweep), timings(), workers, &records));
    } else if (e == "gradient-scan") {
        const TransportSpec transport{0.0, cfg.sweep.trap_rate, cfg.sweep.injection};
        const auto records =
            gradient_only_scan(cfg.sweep.lengths, cfg.sweep.gradients, transport, cfg.sweep.optimizer, cfg.sweep.workers);
        out.write("records.csv", [&](std::ostream& os) { write_records_csv(os, records); });
        json c{{"lengths", cfg.sweep.lengths},
               {"gradients", cfg.sweep.gradients},
               {"trap_rate", cfg.sweep.trap_rate},
               {"injection", to_json(cfg.sweep.injection)},
               {"optimizer", to_json(cfg.sweep.optimizer)}};
        out.write_json("manifest.json", run_manifest(e, c, timings(), workers, &records));
    } else if (e == "uniformisation") {
        const auto records = uniformisation_records(cfg.sweep);
        out.write("uniformisation.csv", [&](std::ostream& os) { write_uniformisation_csv(os, records); });
        out.write("uniformisation_summary.csv", [&](std::ostream& os) {
            write_uniformisation_summary_csv(os, summarize_uniformisation(records));
        });
        out.write_json("manifest.json", run_manifest(e, to_json(cfg.sweep), timings(), workers));
    } else if (e == "dynamics") {
        const auto traces = transient_experiment(cfg.transient);
        out.write("transient.csv", [&](std::ostream& os) { write_transient_csv(os, traces); });
        auto manifest = run_manifest(e, transient_json(cfg.transient), timings(), resolve_workers(cfg.transient.workers));
        json conv = json::array();
        for (const auto& tr : traces) {
            conv.push_back({{"gamma", tr.dephasing_rate},
                            {"asymptote", tr.asymptote},
                            {"convergence_time", tr.convergence_time ? json(*tr.convergence_time) : json(nullptr)},
                            {"stays_converged", tr.stays_converged}});
        }
        manifest["convergence"] = conv;
        out.write_json("manifest.json", manifest);
    } else {
        if (cfg.input.empty()) throw ConfigError("fit needs an input CSV (--input or `input =` in the config)");
        std::ifstream is(cfg.input);
        if (!is) throw ConfigError("cannot read input " + cfg.input);
        const auto records = read_records_csv(is);
        json fits = json::object();
        std::size_t ok = 0;
        std::map<std::size_t, std::vector<SweepRecord>> by_n;
        for (const auto& r : records) by_n[r.n_sites].push_back(r);
        for (const auto& [n, rs] : by_n) {
            try {
                fits[std::to_string(n)] = to_json(fit_power_law(rs));
                ++ok;
            } catch (const UnderdeterminedFit& err) {
                fits[std::to_string(n)] = {{"error", err.what()}};
            }
        }
        if (ok == 0) throw UnderdeterminedFit("no chain length has enough eta = 0 interior records to fit");
        out.write_json("fit.json", {{"input", cfg.input}, {"fits", fits}});
        out.write_json("manifest.json", run_manifest(e, {{"input", cfg.input}}, timings(), 1, &records));
    }
    return Ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Steady-state transport in disordered tight-binding chains"};
    Options o;
    app.add_option("experiment", o.experiment,
                   "sweep | fit | optimize | dynamics | redfield-sweep | uniformisation | gradient-scan")
        ->required();
    app.add_option("--config", o.config_path, "key = value configuration file");
    app.add_option("--out", o.out, "output directory")->capture_default_str();
    app.add_option("--input", o.input, "sweep CSV for the fit experiment");
    app.add_option("--seed", o.seed, "master seed override");
    app.add_option("--workers", o.workers, "worker threads, 0 for all cores");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        return report(Usage, "usage", err.what());
    }

    try {
        return run(o);
    } catch (const UsageError& err) {
        return report(Usage, "usage", err.what());
    } catch (const OutputError& err) {
        return report(BadOutput, "output", err.what());
    } catch (const InvalidArgument& err) {
        return report(BadConfig, "config", err.what());
    } catch (const std::exception& err) {
        return report(Runtime, "runtime", err.what());
    }
}
