#pragma once

#include "phoenix/model.hpp"
#include "phoenix/series.hpp"

#include <cstdint>

namespace phoenix {

/// Simulated popularity plus Gaussian noise with standard deviation
/// noise_level * max(p_hat), floored at 0. noise_level = 0 returns the
/// simulation output unchanged. Deterministic for a fixed seed.
[[nodiscard]] PopularitySeries make_synthetic_series(const PhoenixRModel& model, std::size_t n,
                                                     double noise_level, std::uint64_t seed);

}  // namespace phoenix
