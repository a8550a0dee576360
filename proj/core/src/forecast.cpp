#include "phoenix/forecast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <thread>

namespace phoenix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<double>& smoothing_grid() {
    static const std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    return grid;
}

struct SmoothingChoice {
    SmoothingVariant variant = SmoothingVariant::ses;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

std::string label_for(const SmoothingChoice& choice) {
    switch (choice.variant) {
        case SmoothingVariant::ses:
            return "ses(alpha=" + std::to_string(choice.alpha) + ")";
        case SmoothingVariant::holt_trend:
            return "holt(alpha=" + std::to_string(choice.alpha) +
                   ",beta=" + std::to_string(choice.beta) + ")";
        case SmoothingVariant::holt_winters_seasonal:
            return "holt_winters(alpha=" + std::to_string(choice.alpha) +
                   ",beta=" + std::to_string(choice.beta) +
                   ",gamma=" + std::to_string(choice.gamma) + ")";
        case SmoothingVariant::linear_trend:
            return "linear_trend";
    }
    return "unknown";
}

struct SmoothingRun {
    double train_sse = kInf;          // one-step-ahead squared error on the training windows
    std::vector<double> forecast;     // horizon values, clamped at 0
    bool valid = false;
};

// Runs the additive smoothing recursions and forecasts `horizon` windows
// past the end of the training series.
SmoothingRun run_smoothing(const std::vector<double>& y, std::size_t horizon,
                           const SmoothingChoice& choice, std::size_t season) {
    const std::size_t n = y.size();
    SmoothingRun run;

    double sse = 0.0;
    double level = 0.0;
    double trend = 0.0;
    std::vector<double> seasonal;

    switch (choice.variant) {
        case SmoothingVariant::ses: {
            level = y[0];
            for (std::size_t t = 1; t < n; ++t) {
                const double err = y[t] - level;
                sse += err * err;
                level = choice.alpha * y[t] + (1.0 - choice.alpha) * level;
            }
            run.forecast.assign(horizon, level);
            break;
        }
        case SmoothingVariant::holt_trend: {
            level = y[0];
            trend = y[1] - y[0];
            for (std::size_t t = 1; t < n; ++t) {
                const double predicted = level + trend;
                const double err = y[t] - predicted;
                sse += err * err;
                const double prev_level = level;
                level = choice.alpha * y[t] + (1.0 - choice.alpha) * predicted;
                trend = choice.beta * (level - prev_level) + (1.0 - choice.beta) * trend;
            }
            for (std::size_t h = 1; h <= horizon; ++h) {
                run.forecast.push_back(level + static_cast<double>(h) * trend);
            }
            break;
        }
        case SmoothingVariant::holt_winters_seasonal: {
            // Initialization from the first two seasons: level is the first
            // season's mean, trend the per-window change between season
            // means, seasonal indices the first season's deviations.
            double first_mean = 0.0;
            double second_mean = 0.0;
            for (std::size_t i = 0; i < season; ++i) {
                first_mean += y[i];
                second_mean += y[season + i];
            }
            first_mean /= static_cast<double>(season);
            second_mean /= static_cast<double>(season);
            level = first_mean;
            trend = (second_mean - first_mean) / static_cast<double>(season);
            seasonal.resize(season);
            for (std::size_t i = 0; i < season; ++i) {
                seasonal[i] = y[i] - first_mean;
            }

            for (std::size_t t = season; t < n; ++t) {
                const std::size_t phase = t % season;
                const double predicted = level + trend + seasonal[phase];
                const double err = y[t] - predicted;
                sse += err * err;
                const double prev_level = level;
                level = choice.alpha * (y[t] - seasonal[phase]) + (1.0 - choice.alpha) * (level + trend);
                trend = choice.beta * (level - prev_level) + (1.0 - choice.beta) * trend;
                seasonal[phase] = choice.gamma * (y[t] - level) + (1.0 - choice.gamma) * seasonal[phase];
            }
            for (std::size_t h = 1; h <= horizon; ++h) {
                const std::size_t phase = (n - 1 + h) % season;
                run.forecast.push_back(level + static_cast<double>(h) * trend + seasonal[phase]);
            }
            break;
        }
        case SmoothingVariant::linear_trend: {
            double mean_t = 0.0;
            double mean_y = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                mean_t += static_cast<double>(t);
                mean_y += y[t];
            }
            mean_t /= static_cast<double>(n);
            mean_y /= static_cast<double>(n);
            double cov = 0.0;
            double var = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                const double dt = static_cast<double>(t) - mean_t;
                cov += dt * (y[t] - mean_y);
                var += dt * dt;
            }
            const double slope = var > 0.0 ? cov / var : 0.0;
            const double intercept = mean_y - slope * mean_t;
            for (std::size_t t = 0; t < n; ++t) {
                const double err = y[t] - (intercept + slope * static_cast<double>(t));
                sse += err * err;
            }
            for (std::size_t h = 1; h <= horizon; ++h) {
                run.forecast.push_back(intercept + slope * static_cast<double>(n - 1 + h));
            }
            break;
        }
    }

    for (double& value : run.forecast) {
        value = std::max(value, 0.0);
    }
    run.train_sse = sse;
    run.valid = true;
    return run;
}

std::size_t min_train_length(SmoothingVariant variant, std::size_t season) {
    return variant == SmoothingVariant::holt_winters_seasonal ? std::max<std::size_t>(4, 2 * season)
                                                              : 4;
}

std::vector<SmoothingChoice> variant_grid(SmoothingVariant variant) {
    std::vector<SmoothingChoice> grid;
    switch (variant) {
        case SmoothingVariant::ses:
            for (double a : smoothing_grid()) {
                grid.push_back({variant, a, 0.0, 0.0});
            }
            break;
        case SmoothingVariant::holt_trend:
            for (double a : smoothing_grid()) {
                for (double b : smoothing_grid()) {
                    grid.push_back({variant, a, b, 0.0});
                }
            }
            break;
        case SmoothingVariant::holt_winters_seasonal:
            for (double a : smoothing_grid()) {
                for (double b : smoothing_grid()) {
                    for (double g : smoothing_grid()) {
                        grid.push_back({variant, a, b, g});
                    }
                }
            }
            break;
        case SmoothingVariant::linear_trend:
            grid.push_back({variant, 0.0, 0.0, 0.0});
            break;
    }
    return grid;
}

double rmse_against(const std::vector<double>& forecast, const PopularitySeries& series,
                    std::size_t offset, std::size_t count, std::size_t forecast_offset) {
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double r = series.values[offset + i] - forecast[forecast_offset + i];
        sum_sq += r * r;
    }
    return std::sqrt(sum_sq / static_cast<double>(count));
}

PopularitySeries train_prefix(const PopularitySeries& series, std::size_t train_n) {
    PopularitySeries train;
    train.values.assign(series.values.begin(), series.values.begin() + static_cast<long>(train_n));
    train.window_length = series.window_length;
    train.start_time = series.start_time;
    return train;
}

}  // namespace

std::string to_string(ForecastModelKind kind) {
    return kind == ForecastModelKind::phoenix_r ? "phoenix_r" : "temporal_dynamics";
}

PopularitySeries holt_winters_forecast(const PopularitySeries& train, std::size_t horizon,
                                       SmoothingVariant variant, std::size_t season_length) {
    validate(train);
    if (horizon < 1) {
        throw std::invalid_argument("holt_winters_forecast requires horizon >= 1");
    }
    if (variant == SmoothingVariant::holt_winters_seasonal && season_length < 2) {
        throw std::invalid_argument("seasonal variant requires season_length >= 2");
    }
    if (train.size() < min_train_length(variant, season_length)) {
        throw std::invalid_argument("training series too short for the requested variant");
    }

    SmoothingRun best;
    for (const auto& choice : variant_grid(variant)) {
        const SmoothingRun run = run_smoothing(train.values, horizon, choice, season_length);
        if (run.train_sse < best.train_sse || !best.valid) {
            best = run;
        }
    }

    PopularitySeries forecast;
    forecast.values = best.forecast;
    forecast.window_length = train.window_length;
    return forecast;
}

ProtocolResult run_protocol(const PopularitySeries& series, ForecastModelKind kind,
                            const SplitSpec& split, std::uint64_t seed,
                            const FitConfig& fit_config) {
    validate(series);
    const std::size_t n = series.size();
    const auto train_n =
        static_cast<std::size_t>(std::ceil(split.train_fraction * static_cast<double>(n)));
    if (split.delta < 1 || split.ensemble_size < 1) {
        throw std::invalid_argument("split requires delta >= 1 and ensemble_size >= 1");
    }
    if (train_n < 1 || train_n + 2 * split.delta > n) {
        throw std::invalid_argument("split does not fit the series: train + 2*delta > n");
    }

    const std::size_t validation_begin = train_n;
    const std::size_t test_begin = train_n + split.delta;
    const PopularitySeries train = train_prefix(series, train_n);

    struct Candidate {
        std::vector<double> forecast;   // 2*delta windows past the training prefix
        double validation_rmse = kInf;
        std::string label;
    };
    std::vector<Candidate> candidates;

    if (kind == ForecastModelKind::phoenix_r) {
        for (int member = 0; member < split.ensemble_size; ++member) {
            FitConfig config = fit_config;
            config.rng_seed = seed + static_cast<std::uint64_t>(member);
            const FitResult fitted = fit_phoenix_r(train, config);
            // Extrapolate the fitted dynamics; future shocks are unknowable.
            const ModelSimulation sim = simulate(fitted.model, train_n + 2 * split.delta);
            Candidate candidate;
            candidate.forecast.assign(sim.popularity.values.begin() + static_cast<long>(train_n),
                                      sim.popularity.values.end());
            candidate.label = "phoenix(seed=" + std::to_string(config.rng_seed) + ")";
            candidates.push_back(std::move(candidate));
        }
    } else {
        for (SmoothingVariant variant :
             {SmoothingVariant::ses, SmoothingVariant::holt_trend,
              SmoothingVariant::holt_winters_seasonal, SmoothingVariant::linear_trend}) {
            if (train_n < min_train_length(variant, 7)) {
                continue;
            }
            for (const auto& choice : variant_grid(variant)) {
                const SmoothingRun run = run_smoothing(train.values, 2 * split.delta, choice, 7);
                Candidate candidate;
                candidate.forecast = run.forecast;
                candidate.label = label_for(choice);
                candidates.push_back(std::move(candidate));
            }
        }
        if (candidates.empty()) {
            throw std::invalid_argument("training prefix too short for every temporal-dynamics variant");
        }
    }

    for (auto& candidate : candidates) {
        candidate.validation_rmse = rmse_against(candidate.forecast, series, validation_begin,
                                                 split.delta, 0);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.validation_rmse < b.validation_rmse;
    });
    if (candidates.size() > static_cast<std::size_t>(split.ensemble_size)) {
        candidates.resize(static_cast<std::size_t>(split.ensemble_size));
    }

    ProtocolResult result;
    for (const auto& candidate : candidates) {
        result.candidate_validation_rmse.push_back(candidate.validation_rmse);
    }
    const Candidate& selected = candidates.front();
    result.validation_rmse = selected.validation_rmse;
    result.selected_label = selected.label;
    result.test_rmse = rmse_against(selected.forecast, series, test_begin, split.delta, split.delta);
    return result;
}

ForecastReport compare_models(const std::vector<std::pair<std::string, PopularitySeries>>& corpus,
                              const std::vector<double>& train_fractions,
                              const std::vector<std::size_t>& deltas,
                              const std::vector<ForecastModelKind>& kinds, int ensemble_size,
                              std::uint64_t seed, int jobs, const FitConfig& fit_config) {
    if (corpus.size() < 2) {
        throw std::invalid_argument("compare_models requires at least two series");
    }
    if (train_fractions.empty() || deltas.empty() || kinds.empty()) {
        throw std::invalid_argument("compare_models requires non-empty splits, deltas and kinds");
    }

    struct Task {
        std::size_t series_index;
        ForecastModelKind kind;
        double train_fraction;
        std::size_t delta;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < corpus.size(); ++s) {
        for (ForecastModelKind kind : kinds) {
            for (double fraction : train_fractions) {
                for (std::size_t delta : deltas) {
                    tasks.push_back(Task{s, kind, fraction, delta});
                }
            }
        }
    }

    std::vector<double> rmse_values(tasks.size(), 0.0);
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= tasks.size()) {
                return;
            }
            const Task& task = tasks[index];
            SplitSpec split{task.train_fraction, task.delta, ensemble_size};
            try {
                const ProtocolResult protocol =
                    run_protocol(corpus[task.series_index].second, task.kind, split,
                                 seed + task.series_index, fit_config);
                rmse_values[index] = protocol.test_rmse;
            } catch (const std::exception& error) {
                errors[index] = error.what();
            }
        }
    };

    const int worker_count = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(worker_count));
        for (int i = 0; i < worker_count; ++i) {
            threads.emplace_back(worker);
        }
        for (auto& thread : threads) {
            thread.join();
        }
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!errors[i].empty()) {
            throw std::runtime_error("protocol failed on series '" + corpus[tasks[i].series_index].first +
                                     "': " + errors[i]);
        }
    }

    ForecastReport report;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const Task& task = tasks[i];
        report.per_series.push_back(ForecastRow{corpus[task.series_index].first, task.kind,
                                                task.train_fraction, task.delta, rmse_values[i]});
    }

    for (double fraction : train_fractions) {
        for (std::size_t delta : deltas) {
            AggregateCell cell;
            cell.train_fraction = fraction;
            cell.delta = delta;
            for (ForecastModelKind kind : kinds) {
                std::vector<double> values;
                for (const auto& row : report.per_series) {
                    if (row.kind == kind && row.train_fraction == fraction && row.delta == delta) {
                        values.push_back(row.rmse);
                    }
                }
                AggregateEntry entry;
                entry.kind = kind;
                entry.series_count = values.size();
                double mean = 0.0;
                for (double v : values) {
                    mean += v;
                }
                mean /= static_cast<double>(values.size());
                entry.mean_rmse = mean;
                if (values.size() > 1) {
                    double variance = 0.0;
                    for (double v : values) {
                        variance += (v - mean) * (v - mean);
                    }
                    variance /= static_cast<double>(values.size() - 1);
                    entry.ci_half_width =
                        1.96 * std::sqrt(variance / static_cast<double>(values.size()));
                }
                cell.entries.push_back(entry);
            }
            if (cell.entries.size() >= 2) {
                const auto best = std::min_element(
                    cell.entries.begin(), cell.entries.end(),
                    [](const AggregateEntry& a, const AggregateEntry& b) { return a.mean_rmse < b.mean_rmse; });
                cell.winner = best->kind;
                cell.significant = true;
                for (const auto& entry : cell.entries) {
                    if (entry.kind == best->kind) {
                        continue;
                    }
                    if (best->mean_rmse + best->ci_half_width >= entry.mean_rmse - entry.ci_half_width) {
                        cell.significant = false;
                    }
                }
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

void write_forecast_report_csv(const ForecastReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write report file: " + path);
    }
    out << std::setprecision(17);
    out << "series,model,split,delta,rmse\n";
    for (const auto& row : report.per_series) {
        out << row.series_id << ',' << to_string(row.kind) << ',' << row.train_fraction << ','
            << row.delta << ',' << row.rmse << '\n';
    }
}

}  // namespace phoenix
