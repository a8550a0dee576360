#pragma once

#include "phoenix/series.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace phoenix {

/// Parameters of one shock: an independent SIR cascade whose infected
/// compartment emits visits at Poisson rate omega.
struct ShockParams {
    std::size_t start = 0;   ///< s: window at which the shock begins
    double s0 = 1.0;         ///< S(0): initial susceptible population, > 0
    double beta = 0.0;       ///< infection strength per susceptible-infected pair per window
    double gamma = 0.0;      ///< recovery rate per window
    double omega = 1.0;      ///< visit rate per infected individual per window, > 0
};

/// Periodic modulation of the visit rate:
/// omega(t) = omega * (1 - m/2 * (sin(2*pi*(t + h)/e) + 1)).
struct PeriodParams {
    double m = 0.0;   ///< amplitude in [0, 1]
    double h = 0.0;   ///< phase shift, windows
    double e = 7.0;   ///< period length in windows (7 daily, 24 hourly)
};

/// A full model: one SIR population per shock plus shared period parameters.
/// Populations of distinct shocks do not interact.
struct PhoenixRModel {
    std::vector<ShockParams> shocks;
    std::optional<PeriodParams> period;

    /// N = sum_i (S0_i + 1)
    [[nodiscard]] double total_population() const;
};

/// Throws std::invalid_argument when a parameter invariant is violated
/// (empty shock set, S0 <= 0, omega <= 0, negative rates, m outside [0,1],
/// e <= 0).
void validate(const ShockParams& params);
void validate(const PhoenixRModel& model);

struct ShockState {
    double susceptible = 0.0;
    double infected = 0.0;
    double recovered = 0.0;
};

struct ShockSimulation {
    PopularitySeries popularity;         ///< p(t) = omega(t) * I(t)
    PopularitySeries audience;           ///< expected first-visit count per window
    std::vector<ShockState> states;      ///< S, I, R at each window
    int clamped_steps = 0;               ///< windows where an infection or recovery flow was clamped
};

/// Runs one shock for n windows on its own clock starting at S(0)=s0,
/// I(0)=1, R(0)=0. Flows are clamped so the compartments stay non-negative:
/// new infections per step are min(beta*S*I, S) and recoveries are
/// min(gamma*I, I), which also preserves S+I+R = s0+1.
///
/// The audience series counts individuals expected to make at least one
/// visit while infected: a(t) = (1 - exp(-omega/gamma)) * flow(t) for t >= 1
/// where flow is the clamped new-infection count, and a(0) covers the seed
/// individual. When gamma = 0 the at-least-one-visit factor is 1.
///
/// `period`, when present, modulates omega at global time
/// t_global = time_offset + t for both the popularity and audience factors.
[[nodiscard]] ShockSimulation simulate_shock(const ShockParams& params, std::size_t n,
                                             const std::optional<PeriodParams>& period = std::nullopt,
                                             double time_offset = 0.0);

struct ModelSimulation {
    PopularitySeries popularity;   ///< p_hat
    PopularitySeries audience;     ///< a_hat
    PopularitySeries revisits;     ///< max(p_hat - a_hat, 0) elementwise
    int clamped_steps = 0;
};

/// Superimposes all shocks over n windows:
/// p_hat(t) = sum_i p_i(t - s_i) * 1[t > s_i], with the exception that a
/// shock starting at s = 0 contributes from t = 0 (otherwise the strict
/// inequality would zero the seed's first window). Audience is composed the
/// same way; revisits are the clamped difference.
[[nodiscard]] ModelSimulation simulate(const PhoenixRModel& model, std::size_t n);

/// Eq. omega(t) = base * (1 - m/2 * (sin(2*pi*(t + h)/e) + 1)).
[[nodiscard]] double omega_at(double base_omega, const PeriodParams& period, double t);

/// Poisson probability of exactly k visits in tau windows at rate omega.
[[nodiscard]] double visit_probability(double omega, double tau, unsigned k);

/// `{"shocks":[{"s":..,"S0":..,"beta":..,"gamma":..,"omega":..},...],
///   "period":{"m":..,"h":..,"e":..} | null}`
[[nodiscard]] std::string model_to_json(const PhoenixRModel& model);
[[nodiscard]] PhoenixRModel model_from_json(const std::string& text);

}  // namespace phoenix
