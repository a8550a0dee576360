#include "phoenix/synthetic.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace phoenix {

PopularitySeries make_synthetic_series(const PhoenixRModel& model, std::size_t n,
                                       double noise_level, std::uint64_t seed) {
    if (noise_level < 0.0) {
        throw std::invalid_argument("noise_level must be non-negative");
    }
    PopularitySeries series = simulate(model, n).popularity;
    if (noise_level == 0.0) {
        return series;
    }

    const double peak = *std::max_element(series.values.begin(), series.values.end());
    const double sigma = noise_level * peak;
    if (sigma == 0.0) {
        return series;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& value : series.values) {
        value = std::max(value + noise(rng), 0.0);
    }
    return series;
}

}  // namespace phoenix
