#pragma once

#include "phoenix/fit.hpp"
#include "phoenix/series.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace phoenix {

enum class SmoothingVariant {
    ses,                     ///< simple exponential smoothing
    holt_trend,              ///< additive level + trend
    holt_winters_seasonal,   ///< additive level + trend + season
    linear_trend,            ///< ordinary least squares on (t, y)
};

/// Standard additive exponential-smoothing forecast. Smoothing constants
/// are picked by grid search over {0.1, ..., 0.9} (step 0.1) on the
/// training one-step-ahead squared error; forecasts are clamped at 0.
/// Throws when the training series is too short for the variant (4 windows,
/// or two full seasons for the seasonal variant).
[[nodiscard]] PopularitySeries holt_winters_forecast(const PopularitySeries& train,
                                                     std::size_t horizon, SmoothingVariant variant,
                                                     std::size_t season_length = 7);

struct SplitSpec {
    double train_fraction = 0.25;   ///< fraction of initial windows used for training
    std::size_t delta = 7;          ///< validation and test horizon, windows
    int ensemble_size = 10;         ///< candidate models trained per series
};

enum class ForecastModelKind { phoenix_r, temporal_dynamics };

[[nodiscard]] std::string to_string(ForecastModelKind kind);

/// Outcome of one train/validate/test run. Candidates are logged so that
/// selection can be audited: the selected candidate always has the minimum
/// validation RMSE.
struct ProtocolResult {
    double test_rmse = 0.0;
    double validation_rmse = 0.0;
    std::vector<double> candidate_validation_rmse;
    std::string selected_label;
};

/// The prediction protocol: train on the first ceil(train_fraction * n)
/// windows, validate on the next delta windows, report RMSE on the delta
/// windows after that. Phoenix candidates are ensemble_size fits with seeds
/// seed+0..; temporal-dynamics candidates are every variant/smoothing-grid
/// combination, of which the best ensemble_size by validation RMSE are
/// kept. Validation windows are never folded back into training, and test
/// windows are read only after selection. Throws when the split does not
/// fit the series.
[[nodiscard]] ProtocolResult run_protocol(const PopularitySeries& series, ForecastModelKind kind,
                                          const SplitSpec& split, std::uint64_t seed,
                                          const FitConfig& fit_config = {});

struct AggregateEntry {
    ForecastModelKind kind = ForecastModelKind::phoenix_r;
    double mean_rmse = 0.0;
    double ci_half_width = 0.0;   ///< normal-approximation 95% half-width
    std::size_t series_count = 0;
};

struct AggregateCell {
    double train_fraction = 0.0;
    std::size_t delta = 0;
    std::vector<AggregateEntry> entries;
    std::optional<ForecastModelKind> winner;   ///< lowest mean RMSE
    bool significant = false;                  ///< confidence intervals do not overlap
};

struct ForecastRow {
    std::string series_id;
    ForecastModelKind kind = ForecastModelKind::phoenix_r;
    double train_fraction = 0.0;
    std::size_t delta = 0;
    double rmse = 0.0;
};

struct ForecastReport {
    std::vector<ForecastRow> per_series;
    std::vector<AggregateCell> cells;
};

/// Runs the protocol for every model kind over all
/// (series, train_fraction, delta) combinations and aggregates mean RMSE
/// with 95% confidence half-widths. Requires at least two series. `jobs`
/// bounds the worker threads; results are deterministic regardless of the
/// worker count (per-series seeds derive from `seed` and the series index).
[[nodiscard]] ForecastReport compare_models(
    const std::vector<std::pair<std::string, PopularitySeries>>& corpus,
    const std::vector<double>& train_fractions, const std::vector<std::size_t>& deltas,
    const std::vector<ForecastModelKind>& kinds, int ensemble_size, std::uint64_t seed,
    int jobs = 1, const FitConfig& fit_config = {});

[[nodiscard]] std::string forecast_report_to_json(const ForecastReport& report);

/// Flat `series,model,split,delta,rmse` rows.
void write_forecast_report_csv(const ForecastReport& report, const std::string& path);

}  // namespace phoenix
