#pragma once

#include "phoenix/model.hpp"
#include "phoenix/series.hpp"

#include <cstddef>
#include <cstdint>

namespace phoenix {

/// Bits charged for one floating point parameter.
inline constexpr double kFloatCostBits = 64.0;

/// Lower bound on the residual standard deviation; keeps perfect fits from
/// collapsing the Gaussian code to -infinity.
inline constexpr double kSigmaFloor = 1e-6;

/// Universal code length for integers over base-2 logarithms:
/// log_star(x) = 1 + log_star(log2(x)) while the argument exceeds 1, else 1.
/// The recursive argument is real-valued. Throws for x < 1.
[[nodiscard]] double log_star(std::uint64_t x);

/// The real-valued recursion behind log_star.
[[nodiscard]] double log_star_real(double x);

/// Parameter cost in bits of a model against a series of n windows:
/// sum over shocks of (log_star(n) + log_star(round(S0)) + 3 * c_f) plus
/// log_star(#shocks). S0 is rounded to the nearest integer >= 1 for the
/// integer code. Period parameters are excluded: they are constant across
/// candidate models and cannot affect selection.
[[nodiscard]] double param_cost(const PhoenixRModel& model, std::size_t n);

struct ResidualCostResult {
    double bits = 0.0;
    double mu = 0.0;      ///< residual mean
    double sigma = 0.0;   ///< residual standard deviation, floored
};

/// Gaussian code length of the residuals observed - modeled, in bits, with
/// mu and sigma estimated from the residuals themselves (their coding cost
/// is constant across models and excluded). Throws on length mismatch.
[[nodiscard]] ResidualCostResult residual_cost(const PopularitySeries& observed,
                                               const PopularitySeries& modeled);

struct MdlBreakdown {
    double data_size_cost = 0.0;   ///< log_star(n)
    double param_cost = 0.0;
    double residual_cost = 0.0;
    double total = 0.0;            ///< sum of the three components
    double mu = 0.0;
    double sigma = 0.0;
};

[[nodiscard]] MdlBreakdown total_cost(const PopularitySeries& observed,
                                      const PopularitySeries& modeled,
                                      const PhoenixRModel& model, std::size_t n);

}  // namespace phoenix
