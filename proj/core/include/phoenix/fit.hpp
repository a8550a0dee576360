#pragma once

#include "phoenix/mdl.hpp"
#include "phoenix/model.hpp"
#include "phoenix/peaks.hpp"
#include "phoenix/series.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace phoenix {

struct FitConfig {
    double epsilon = 0.05;                          ///< MDL guard threshold
    std::vector<double> s1_grid = {1e3, 1e4, 1e5, 1e6};  ///< multi-start S0 values for the first shock
    int max_lm_iterations = 200;
    double lm_tolerance = 1e-8;                     ///< relative objective change
    std::uint64_t rng_seed = 0;
    bool period_enabled = false;
    double period_e = 7.0;                          ///< 7 for daily series, 24 for hourly
    PeakFinderConfig peaks;
};

/// Log of one Levenberg-Marquardt run. Accepted objectives are
/// non-increasing by construction.
struct LmTrace {
    std::vector<double> accepted_objectives;
    int iterations = 0;
    bool converged = false;
};

/// Least-squares fit of {S0, beta, gamma, omega} per shock (start times held
/// fixed) and {m, h} when the period is enabled. Positivity is kept through
/// an exponential reparameterization and m through a sigmoid squash, so the
/// returned parameters always satisfy the model invariants. The Jacobian is
/// built by forward finite differences; damping adapts multiplicatively
/// (down on accepted steps, up on rejected ones). Returns the
/// best-objective parameter vector visited.
///
/// Without `init`, each shock draws beta, gamma, omega ~ U(0,1); the first
/// shock's S0 runs over the multi-start grid (best kept) and later shocks
/// start from the series value at their start window. With `init`, a single
/// run starts from the given model, whose shock count must match `starts`.
/// Throws when the objective is still non-finite after 10 redraws.
[[nodiscard]] PhoenixRModel lm_fit(const PopularitySeries& series,
                                   const std::vector<std::size_t>& starts,
                                   const FitConfig& config,
                                   const std::optional<PhoenixRModel>& init = std::nullopt,
                                   LmTrace* trace = nullptr);

/// As lm_fit, but draws from a caller-owned generator (one generator per
/// whole-series fit keeps results reproducible for a fixed seed).
[[nodiscard]] PhoenixRModel lm_fit_with_rng(const PopularitySeries& series,
                                            const std::vector<std::size_t>& starts,
                                            const FitConfig& config, std::mt19937_64& rng,
                                            const std::optional<PhoenixRModel>& init = std::nullopt,
                                            LmTrace* trace = nullptr);

struct FitResult {
    PhoenixRModel model;
    MdlBreakdown mdl;
    double rmse = 0.0;
    double bic = 0.0;
    int shocks_tried = 0;    ///< candidate models evaluated by the selection loop
    bool converged = false;  ///< LM convergence of the selected model
    int clamp_events = 0;    ///< clamped simulation steps of the selected model
};

/// Fits a full model from the series alone: peak detection proposes shock
/// start times (mandatory 0 first, then descending peak volume); shocks are
/// added one at a time, each candidate warm-started from the previous fit;
/// the loop keeps the minimum-MDL model and stops once a candidate's cost
/// exceeds the minimum by more than the epsilon guard. Requires n >= 8.
[[nodiscard]] FitResult fit_phoenix_r(const PopularitySeries& series, const FitConfig& config = {});

/// Root mean squared error between two equal-length series.
[[nodiscard]] double rmse(const PopularitySeries& observed, const PopularitySeries& modeled);

/// Gaussian-likelihood BIC: n*ln(SSE/n + 1e-12) + k*ln(n). Comparison
/// metric only; never used for selection.
[[nodiscard]] double bic(const PopularitySeries& observed, const PopularitySeries& modeled,
                         int parameter_count);

/// Parameters charged to a model in the BIC: 5 per shock (4 fitted + the
/// start time) plus 2 when a period is present.
[[nodiscard]] int bic_parameter_count(const PhoenixRModel& model);

[[nodiscard]] std::string fit_result_to_json(const FitResult& result);

}  // namespace phoenix
