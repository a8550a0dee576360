#include "phoenix/mdl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phoenix {

double log_star_real(double x) {
    double bits = 1.0;
    while (x > 1.0) {
        x = std::log2(x);
        bits += 1.0;
    }
    return bits;
}

double log_star(std::uint64_t x) {
    if (x < 1) {
        throw std::invalid_argument("log_star requires x >= 1");
    }
    return log_star_real(static_cast<double>(x));
}

double param_cost(const PhoenixRModel& model, std::size_t n) {
    validate(model);
    if (n < 1) {
        throw std::invalid_argument("param_cost requires n >= 1");
    }
    double bits = 0.0;
    for (const auto& shock : model.shocks) {
        const double s0_coded = std::max(std::round(shock.s0), 1.0);
        bits += log_star(n) + log_star_real(s0_coded) + 3.0 * kFloatCostBits;
    }
    bits += log_star(model.shocks.size());
    return bits;
}

ResidualCostResult residual_cost(const PopularitySeries& observed,
                                 const PopularitySeries& modeled) {
    if (observed.size() != modeled.size()) {
        throw std::invalid_argument("residual_cost requires equal-length series");
    }
    const std::size_t n = observed.size();
    if (n == 0) {
        throw std::invalid_argument("residual_cost requires at least one window");
    }

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += observed.values[i] - modeled.values[i];
    }
    mean /= static_cast<double>(n);

    double variance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = observed.values[i] - modeled.values[i] - mean;
        variance += d * d;
    }
    variance /= static_cast<double>(n);

    ResidualCostResult result;
    result.mu = mean;
    result.sigma = std::max(std::sqrt(variance), kSigmaFloor);

    // -sum log2 pdf(residual; mu, sigma) in closed form.
    const double log2_norm = std::log2(result.sigma * std::sqrt(2.0 * std::numbers::pi));
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = observed.values[i] - modeled.values[i] - mean;
        sum_sq += d * d;
    }
    result.bits = static_cast<double>(n) * log2_norm +
                  sum_sq / (2.0 * result.sigma * result.sigma * std::numbers::ln2);
    return result;
}

MdlBreakdown total_cost(const PopularitySeries& observed, const PopularitySeries& modeled,
                        const PhoenixRModel& model, std::size_t n) {
    MdlBreakdown breakdown;
    breakdown.data_size_cost = log_star(n);
    breakdown.param_cost = param_cost(model, n);
    const auto residual = residual_cost(observed, modeled);
    breakdown.residual_cost = residual.bits;
    breakdown.mu = residual.mu;
    breakdown.sigma = residual.sigma;
    breakdown.total = breakdown.data_size_cost + breakdown.param_cost + breakdown.residual_cost;
    return breakdown;
}

}  // namespace phoenix
