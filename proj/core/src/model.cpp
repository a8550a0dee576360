#include "phoenix/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phoenix {

namespace {

double at_least_one_visit_probability(double omega, double gamma) {
    if (gamma == 0.0) {
        return 1.0;  // infinite expected infected duration
    }
    return 1.0 - std::exp(-omega / gamma);
}

}  // namespace

double PhoenixRModel::total_population() const {
    double total = 0.0;
    for (const auto& shock : shocks) {
        total += shock.s0 + 1.0;
    }
    return total;
}

void validate(const ShockParams& params) {
    if (!(params.s0 > 0.0) || !std::isfinite(params.s0)) {
        throw std::invalid_argument("shock S0 must be positive and finite");
    }
    if (!(params.omega > 0.0) || !std::isfinite(params.omega)) {
        throw std::invalid_argument("shock omega must be positive and finite");
    }
    if (params.beta < 0.0 || !std::isfinite(params.beta)) {
        throw std::invalid_argument("shock beta must be non-negative and finite");
    }
    if (params.gamma < 0.0 || !std::isfinite(params.gamma)) {
        throw std::invalid_argument("shock gamma must be non-negative and finite");
    }
}

void validate(const PhoenixRModel& model) {
    if (model.shocks.empty()) {
        throw std::invalid_argument("model must hold at least one shock");
    }
    for (const auto& shock : model.shocks) {
        validate(shock);
    }
    if (model.period) {
        if (model.period->m < 0.0 || model.period->m > 1.0) {
            throw std::invalid_argument("period amplitude m must lie in [0, 1]");
        }
        if (!(model.period->e > 0.0)) {
            throw std::invalid_argument("period length e must be positive");
        }
    }
}

ShockSimulation simulate_shock(const ShockParams& params, std::size_t n,
                               const std::optional<PeriodParams>& period,
                               double time_offset) {
    validate(params);
    if (n < 1) {
        throw std::invalid_argument("simulate_shock requires n >= 1");
    }

    ShockSimulation sim;
    sim.states.reserve(n);
    sim.popularity.values.reserve(n);
    sim.audience.values.reserve(n);

    const auto rate_at = [&](std::size_t t) {
        return period ? omega_at(params.omega, *period, time_offset + static_cast<double>(t))
                      : params.omega;
    };

    ShockState state{params.s0, 1.0, 0.0};
    sim.states.push_back(state);
    sim.popularity.values.push_back(rate_at(0) * state.infected);
    sim.audience.values.push_back(at_least_one_visit_probability(rate_at(0), params.gamma));

    for (std::size_t t = 1; t < n; ++t) {
        const double raw_infections = params.beta * state.susceptible * state.infected;
        const double raw_recoveries = params.gamma * state.infected;
        const double infections = std::min(raw_infections, state.susceptible);
        const double recoveries = std::min(raw_recoveries, state.infected);
        if (infections != raw_infections || recoveries != raw_recoveries) {
            ++sim.clamped_steps;
        }

        state.susceptible -= infections;
        state.infected += infections - recoveries;
        state.recovered += recoveries;

        const double rate = rate_at(t);
        sim.states.push_back(state);
        sim.popularity.values.push_back(rate * state.infected);
        sim.audience.values.push_back(at_least_one_visit_probability(rate, params.gamma) * infections);
    }
    return sim;
}

ModelSimulation simulate(const PhoenixRModel& model, std::size_t n) {
    validate(model);
    if (n < 1) {
        throw std::invalid_argument("simulate requires n >= 1");
    }

    ModelSimulation out;
    out.popularity.values.assign(n, 0.0);
    out.audience.values.assign(n, 0.0);
    out.revisits.values.assign(n, 0.0);

    for (const auto& shock : model.shocks) {
        if (shock.start >= n) {
            continue;
        }
        const std::size_t start = shock.start;
        const std::size_t local_n = n - start;
        const auto sim = simulate_shock(shock, local_n, model.period, static_cast<double>(start));
        out.clamped_steps += sim.clamped_steps;

        // Eq. 5 masks the tau = 0 window of shifted shocks via the strict
        // indicator; only the s = 0 shock contributes its seed window.
        const std::size_t first_tau = start == 0 ? 0 : 1;
        for (std::size_t tau = first_tau; tau < local_n; ++tau) {
            out.popularity.values[start + tau] += sim.popularity.values[tau];
            out.audience.values[start + tau] += sim.audience.values[tau];
        }
    }

    for (std::size_t t = 0; t < n; ++t) {
        out.revisits.values[t] = std::max(out.popularity.values[t] - out.audience.values[t], 0.0);
    }
    return out;
}

double omega_at(double base_omega, const PeriodParams& period, double t) {
    const double phase = 2.0 * std::numbers::pi * (t + period.h) / period.e;
    return base_omega * (1.0 - period.m / 2.0 * (std::sin(phase) + 1.0));
}

double visit_probability(double omega, double tau, unsigned k) {
    if (!(omega > 0.0)) {
        throw std::invalid_argument("visit_probability requires omega > 0");
    }
    if (tau < 0.0) {
        throw std::invalid_argument("visit_probability requires tau >= 0");
    }
    const double mean = omega * tau;
    if (mean == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    const double log_pmf = static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0);
    return std::exp(log_pmf);
}

}  // namespace phoenix
