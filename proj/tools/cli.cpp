#include "cli.hpp"

#include "phoenix/characterize.hpp"
#include "phoenix/fit.hpp"
#include "phoenix/forecast.hpp"
#include "phoenix/model.hpp"
#include "phoenix/peaks.hpp"
#include "phoenix/series.hpp"
#include "phoenix/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace phoenix::cli {

namespace {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

LogLevel g_log_level = LogLevel::info;

void log(LogLevel severity, const std::string& message) {
    if (severity < g_log_level) {
        return;
    }
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(severity)], message.c_str());
}

struct GlobalConfig {
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string log_level = "info";
    std::string format = "csv";   // json | csv, for commands that emit a series
};

LogLevel parse_log_level(const std::string& name) {
    if (name == "debug") return LogLevel::debug;
    if (name == "info") return LogLevel::info;
    if (name == "warn") return LogLevel::warn;
    if (name == "error") return LogLevel::error;
    if (name == "off") return LogLevel::off;
    throw CLI::ValidationError("--log-level", "unknown log level '" + name + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path);
    }
    out << contents;
    if (contents.empty() || contents.back() != '\n') {
        out << '\n';
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

/// "3600", "1h", "1d", "1w", "1m" (months are 30 days exactly).
double parse_window_token(const std::string& token) {
    if (token.empty()) {
        throw std::runtime_error("empty window token");
    }
    double unit = 1.0;
    std::string digits = token;
    switch (token.back()) {
        case 's': unit = 1.0; digits.pop_back(); break;
        case 'h': unit = 3600.0; digits.pop_back(); break;
        case 'd': unit = 86400.0; digits.pop_back(); break;
        case 'w': unit = 7.0 * 86400.0; digits.pop_back(); break;
        case 'm': unit = 30.0 * 86400.0; digits.pop_back(); break;
        default: break;
    }
    std::size_t consumed = 0;
    const double count = std::stod(digits, &consumed);
    if (consumed != digits.size() || count <= 0.0) {
        throw std::runtime_error("bad window token '" + token + "'");
    }
    return count * unit;
}

PopularitySeries load_series_auto(const std::string& path, const std::string& format) {
    if (format == "plain") {
        return load_series(path, SeriesFormat::plain_lines);
    }
    if (format == "csv") {
        return load_series(path, SeriesFormat::csv_indexed);
    }
    return load_series(path, detect_series_format(path));
}

std::vector<std::string> read_path_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open list file: " + path);
    }
    std::vector<std::string> paths;
    std::string line;
    while (std::getline(in, line)) {
        const auto begin = line.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) {
            continue;
        }
        const auto end = line.find_last_not_of(" \t\r\n");
        paths.push_back(line.substr(begin, end - begin + 1));
    }
    if (paths.empty()) {
        throw std::runtime_error("list file is empty: " + path);
    }
    return paths;
}

void write_simulation_csv(const std::string& path, const ModelSimulation& sim, bool emit_audience,
                          bool emit_revisits) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write series file: " + path);
    }
    out << std::setprecision(17);
    if (!emit_audience && !emit_revisits) {
        out << "window,value\n";
        for (std::size_t t = 0; t < sim.popularity.size(); ++t) {
            out << t << ',' << sim.popularity.values[t] << '\n';
        }
        return;
    }
    out << "window,popularity";
    if (emit_audience) {
        out << ",audience";
    }
    if (emit_revisits) {
        out << ",revisits";
    }
    out << '\n';
    for (std::size_t t = 0; t < sim.popularity.size(); ++t) {
        out << t << ',' << sim.popularity.values[t];
        if (emit_audience) {
            out << ',' << sim.audience.values[t];
        }
        if (emit_revisits) {
            out << ',' << sim.revisits.values[t];
        }
        out << '\n';
    }
}

FitConfig make_fit_config(const GlobalConfig& global, bool hourly, bool period) {
    FitConfig config;
    config.rng_seed = global.seed;
    config.period_enabled = period;
    config.period_e = hourly ? 24.0 : 7.0;
    return config;
}

// --- subcommand bodies ----------------------------------------------------

struct SimulateOptions {
    std::string model_path;
    std::size_t n = 0;
    std::string out_path;
    std::string emit;
};

void run_simulate(const SimulateOptions& options, const GlobalConfig& global) {
    const PhoenixRModel model = model_from_json(read_file(options.model_path));
    const ModelSimulation sim = simulate(model, options.n);

    bool emit_audience = false;
    bool emit_revisits = false;
    for (const auto& item : split_list(options.emit)) {
        if (item == "audience") {
            emit_audience = true;
        } else if (item == "revisits") {
            emit_revisits = true;
        } else {
            throw std::runtime_error("unknown --emit item '" + item + "'");
        }
    }

    if (global.format == "json") {
        if (emit_audience || emit_revisits) {
            nlohmann::json out;
            out["popularity"] = nlohmann::json::parse(series_to_json(sim.popularity));
            if (emit_audience) {
                out["audience"] = nlohmann::json::parse(series_to_json(sim.audience));
            }
            if (emit_revisits) {
                out["revisits"] = nlohmann::json::parse(series_to_json(sim.revisits));
            }
            write_file(options.out_path, out.dump(2));
        } else {
            write_file(options.out_path, series_to_json(sim.popularity));
        }
    } else {
        write_simulation_csv(options.out_path, sim, emit_audience, emit_revisits);
    }
    log(LogLevel::info, "simulated " + std::to_string(options.n) + " windows -> " + options.out_path);
}

struct PeaksOptions {
    std::string series_path;
    std::string series_format = "auto";
    std::string out_path;
};

void run_peaks(const PeaksOptions& options) {
    const PopularitySeries series = load_series_auto(options.series_path, options.series_format);
    const ShockCandidateList candidates = find_peaks(series);
    write_file(options.out_path, peaks_to_json(candidates));
    log(LogLevel::info, "found " + std::to_string(candidates.peaks.size()) + " peaks -> " +
                            options.out_path);
}

struct FitOptions {
    std::string series_path;
    std::string series_format = "auto";
    std::string out_path;
    bool hourly = false;
    bool daily = false;
    bool period = false;
};

void run_fit(const FitOptions& options, const GlobalConfig& global) {
    const PopularitySeries series = load_series_auto(options.series_path, options.series_format);
    const FitConfig config = make_fit_config(global, options.hourly, options.period);
    const FitResult result = fit_phoenix_r(series, config);
    write_file(options.out_path, fit_result_to_json(result));
    log(LogLevel::info, "fit " + options.series_path + ": " +
                            std::to_string(result.model.shocks.size()) + " shocks, rmse " +
                            std::to_string(result.rmse));
}

struct FitBatchOptions {
    std::string list_path;
    std::string out_dir;
    std::string series_format = "auto";
    bool hourly = false;
    bool daily = false;
    bool period = false;
};

void run_fit_batch(const FitBatchOptions& options, const GlobalConfig& global) {
    const auto paths = read_path_list(options.list_path);
    std::filesystem::create_directories(options.out_dir);

    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= paths.size()) {
                return;
            }
            const std::string& path = paths[index];
            try {
                const PopularitySeries series = load_series_auto(path, options.series_format);
                FitConfig config = make_fit_config(global, options.hourly, options.period);
                config.rng_seed = global.seed + index;
                const FitResult result = fit_phoenix_r(series, config);
                const auto stem = std::filesystem::path(path).stem().string();
                const auto out_path = std::filesystem::path(options.out_dir) / (stem + ".fit.json");
                write_file(out_path.string(), fit_result_to_json(result));
                log(LogLevel::info, path + ": " + std::to_string(result.model.shocks.size()) +
                                        " shocks, rmse " + std::to_string(result.rmse));
            } catch (const std::exception& error) {
                failures.fetch_add(1);
                log(LogLevel::error, path + ": " + error.what());
            }
        }
    };

    const int worker_count = std::max(1, std::min<int>(global.jobs, static_cast<int>(paths.size())));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < worker_count; ++i) {
            threads.emplace_back(worker);
        }
        for (auto& thread : threads) {
            thread.join();
        }
    }
    if (failures.load() > 0) {
        throw std::runtime_error(std::to_string(failures.load()) + " of " +
                                 std::to_string(paths.size()) + " series failed to fit");
    }
}

struct CharacterizeOptions {
    std::string events_path;
    std::string windows = "1h,1d,1w,1m";
    std::size_t min_popularity = 500;
    std::size_t min_window_popularity = 20;
    std::string out_path;
    std::string ccdf_csv;
};

void run_characterize(const CharacterizeOptions& options) {
    const auto events = load_events(options.events_path);
    log(LogLevel::info, "loaded " + std::to_string(events.size()) + " events");

    const RatioReport report = long_run_report(events, options.min_popularity);
    std::vector<WindowedQuartiles> windowed;
    for (const auto& token : split_list(options.windows)) {
        windowed.push_back(
            windowed_quartiles(events, parse_window_token(token), options.min_window_popularity));
    }
    write_file(options.out_path, characterize_report_to_json(report, windowed));
    if (!options.ccdf_csv.empty()) {
        write_ccdf_csv(report, options.ccdf_csv);
    }
    log(LogLevel::info, std::to_string(report.per_object_ratio.size()) + " objects -> " +
                            options.out_path);
}

struct EvaluateOptions {
    std::string list_path;
    std::string series_format = "auto";
    std::string splits = "0.05,0.25,0.5";
    std::string deltas = "1,7,30";
    std::string models = "phoenix,td";
    int ensemble = 10;
    std::string out_path;
    std::string csv_path;
    bool hourly = false;
};

void run_evaluate(const EvaluateOptions& options, const GlobalConfig& global) {
    std::vector<std::pair<std::string, PopularitySeries>> corpus;
    for (const auto& path : read_path_list(options.list_path)) {
        corpus.emplace_back(path, load_series_auto(path, options.series_format));
    }

    std::vector<double> fractions;
    for (const auto& token : split_list(options.splits)) {
        fractions.push_back(std::stod(token));
    }
    std::vector<std::size_t> deltas;
    for (const auto& token : split_list(options.deltas)) {
        deltas.push_back(static_cast<std::size_t>(std::stoul(token)));
    }
    std::vector<ForecastModelKind> kinds;
    for (const auto& token : split_list(options.models)) {
        if (token == "phoenix") {
            kinds.push_back(ForecastModelKind::phoenix_r);
        } else if (token == "td") {
            kinds.push_back(ForecastModelKind::temporal_dynamics);
        } else {
            throw std::runtime_error("unknown model '" + token + "' (use phoenix,td)");
        }
    }

    const FitConfig fit_config = make_fit_config(global, options.hourly, false);
    const ForecastReport report = compare_models(corpus, fractions, deltas, kinds, options.ensemble,
                                                 global.seed, global.jobs, fit_config);
    write_file(options.out_path, forecast_report_to_json(report));
    std::string csv_path = options.csv_path;
    if (csv_path.empty()) {
        csv_path = std::filesystem::path(options.out_path).replace_extension(".csv").string();
    }
    write_forecast_report_csv(report, csv_path);
    log(LogLevel::info, std::to_string(report.per_series.size()) + " protocol runs -> " +
                            options.out_path);
}

struct GenSyntheticOptions {
    std::string model_path;
    std::size_t n = 0;
    double noise = 0.0;
    std::string out_path;
    std::string truth_path;
};

void run_gen_synthetic(const GenSyntheticOptions& options, const GlobalConfig& global) {
    const PhoenixRModel model = model_from_json(read_file(options.model_path));
    const PopularitySeries series = make_synthetic_series(model, options.n, options.noise, global.seed);
    if (global.format == "json") {
        write_file(options.out_path, series_to_json(series));
    } else {
        write_series_csv(series, options.out_path);
    }
    if (!options.truth_path.empty()) {
        nlohmann::json truth;
        truth["model"] = nlohmann::json::parse(model_to_json(model));
        truth["n"] = options.n;
        truth["noise_level"] = options.noise;
        truth["seed"] = global.seed;
        write_file(options.truth_path, truth.dump(2));
    }
    log(LogLevel::info, "wrote " + std::to_string(options.n) + " windows -> " + options.out_path);
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Phoenix-R popularity dynamics toolkit"};
    app.require_subcommand(1);
    app.fallthrough(true);

    GlobalConfig global;
    app.add_option("--seed", global.seed, "random seed for stochastic subcommands");
    app.add_option("--jobs", global.jobs, "worker threads for batch subcommands")
        ->envname("PHOENIX_JOBS")
        ->check(CLI::PositiveNumber);
    app.add_option("--log-level", global.log_level, "debug|info|warn|error|off");
    app.add_option("--format", global.format, "series output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    SimulateOptions simulate_options;
    auto* simulate_cmd = app.add_subcommand("simulate", "run a model forward and write its series");
    simulate_cmd->add_option("--model", simulate_options.model_path, "model JSON file")->required();
    simulate_cmd->add_option("--n", simulate_options.n, "number of windows")->required();
    simulate_cmd->add_option("--out", simulate_options.out_path, "output series file")->required();
    simulate_cmd->add_option("--emit", simulate_options.emit, "extra series: audience,revisits");

    PeaksOptions peaks_options;
    auto* peaks_cmd = app.add_subcommand("peaks", "detect candidate shock start times");
    peaks_cmd->add_option("--series", peaks_options.series_path, "input series file")->required();
    peaks_cmd->add_option("--series-format", peaks_options.series_format, "auto|plain|csv")
        ->check(CLI::IsMember({"auto", "plain", "csv"}));
    peaks_cmd->add_option("--out", peaks_options.out_path, "output peaks JSON")->required();

    FitOptions fit_options;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model to a series");
    fit_cmd->add_option("--series", fit_options.series_path, "input series file")->required();
    fit_cmd->add_option("--series-format", fit_options.series_format, "auto|plain|csv")
        ->check(CLI::IsMember({"auto", "plain", "csv"}));
    fit_cmd->add_option("--out", fit_options.out_path, "output fit JSON")->required();
    fit_cmd->add_flag("--hourly", fit_options.hourly, "hourly windows (period e = 24)");
    fit_cmd->add_flag("--daily", fit_options.daily, "daily windows (period e = 7, default)");
    fit_cmd->add_flag("--period", fit_options.period, "fit the periodic visit-rate modulation");

    FitBatchOptions batch_options;
    auto* batch_cmd = app.add_subcommand("fit-batch", "fit every series in a list file");
    batch_cmd->add_option("--list", batch_options.list_path, "file with one series path per line")
        ->required();
    batch_cmd->add_option("--out", batch_options.out_dir, "output directory")->required();
    batch_cmd->add_option("--series-format", batch_options.series_format, "auto|plain|csv")
        ->check(CLI::IsMember({"auto", "plain", "csv"}));
    batch_cmd->add_flag("--hourly", batch_options.hourly, "hourly windows");
    batch_cmd->add_flag("--daily", batch_options.daily, "daily windows (default)");
    batch_cmd->add_flag("--period", batch_options.period, "fit the periodic modulation");

    CharacterizeOptions characterize_options;
    auto* characterize_cmd =
        app.add_subcommand("characterize", "audience/revisit composition of an event log");
    characterize_cmd->add_option("--events", characterize_options.events_path, "event CSV")->required();
    characterize_cmd->add_option("--windows", characterize_options.windows,
                                 "window sizes, e.g. 1h,1d,1w,1m");
    characterize_cmd->add_option("--min-pop", characterize_options.min_popularity,
                                 "long-run popularity filter");
    characterize_cmd->add_option("--min-window-pop", characterize_options.min_window_popularity,
                                 "per-window popularity filter");
    characterize_cmd->add_option("--out", characterize_options.out_path, "output report JSON")
        ->required();
    characterize_cmd->add_option("--ccdf-csv", characterize_options.ccdf_csv,
                                 "optional threshold,fraction CSV");

    EvaluateOptions evaluate_options;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "forecasting protocol over a corpus");
    evaluate_cmd->add_option("--list", evaluate_options.list_path, "file with one series path per line")
        ->required();
    evaluate_cmd->add_option("--series-format", evaluate_options.series_format, "auto|plain|csv")
        ->check(CLI::IsMember({"auto", "plain", "csv"}));
    evaluate_cmd->add_option("--splits", evaluate_options.splits, "training fractions");
    evaluate_cmd->add_option("--deltas", evaluate_options.deltas, "horizons in windows");
    evaluate_cmd->add_option("--models", evaluate_options.models, "phoenix,td");
    evaluate_cmd->add_option("--ensemble", evaluate_options.ensemble, "candidate models per series");
    evaluate_cmd->add_option("--out", evaluate_options.out_path, "output report JSON")->required();
    evaluate_cmd->add_option("--csv", evaluate_options.csv_path, "flat CSV path (default: out with .csv)");
    evaluate_cmd->add_flag("--hourly", evaluate_options.hourly, "hourly windows");

    GenSyntheticOptions synthetic_options;
    auto* synthetic_cmd =
        app.add_subcommand("gen-synthetic", "simulate a model plus noise for test fixtures");
    synthetic_cmd->add_option("--model", synthetic_options.model_path, "model JSON file")->required();
    synthetic_cmd->add_option("--n", synthetic_options.n, "number of windows")->required();
    synthetic_cmd->add_option("--noise", synthetic_options.noise,
                              "noise std as a fraction of the peak");
    synthetic_cmd->add_option("--out", synthetic_options.out_path, "output series file")->required();
    synthetic_cmd->add_option("--truth", synthetic_options.truth_path, "ground-truth JSON file");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("phoenix");
    for (const auto& arg : args) {
        argv_storage.push_back(arg);
    }
    std::vector<char*> argv;
    argv.reserve(argv_storage.size());
    for (auto& arg : argv_storage) {
        argv.push_back(arg.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 1;
    }

    try {
        g_log_level = parse_log_level(global.log_level);
        if (*simulate_cmd) {
            run_simulate(simulate_options, global);
        } else if (*peaks_cmd) {
            run_peaks(peaks_options);
        } else if (*fit_cmd) {
            run_fit(fit_options, global);
        } else if (*batch_cmd) {
            run_fit_batch(batch_options, global);
        } else if (*characterize_cmd) {
            run_characterize(characterize_options);
        } else if (*evaluate_cmd) {
            run_evaluate(evaluate_options, global);
        } else if (*synthetic_cmd) {
            run_gen_synthetic(synthetic_options, global);
        }
    } catch (const CLI::ValidationError& error) {
        log(LogLevel::error, error.what());
        return 1;
    } catch (const std::exception& error) {
        log(LogLevel::error, error.what());
        return 2;
    }
    return 0;
}

}  // namespace phoenix::cli
