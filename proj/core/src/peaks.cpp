#include "phoenix/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace phoenix {

namespace {

// Whole-sample symmetric reflection: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
std::size_t reflect_index(long long i, long long n) {
    while (i < 0 || i >= n) {
        if (i < 0) {
            i = -i - 1;
        }
        if (i >= n) {
            i = 2 * n - 1 - i;
        }
    }
    return static_cast<std::size_t>(i);
}

// Linear-interpolation percentile of |values| restricted to [lo, hi].
double abs_percentile(const std::vector<double>& values, std::size_t lo, std::size_t hi,
                      double percentile) {
    std::vector<double> window;
    window.reserve(hi - lo + 1);
    for (std::size_t i = lo; i <= hi; ++i) {
        window.push_back(std::abs(values[i]));
    }
    std::sort(window.begin(), window.end());
    if (window.size() == 1) {
        return window.front();
    }
    const double h = percentile / 100.0 * static_cast<double>(window.size() - 1);
    const auto lo_idx = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo_idx);
    if (frac == 0.0) {
        return window[lo_idx];
    }
    return window[lo_idx] + frac * (window[lo_idx + 1] - window[lo_idx]);
}

std::vector<std::size_t> local_maxima(const std::vector<double>& row) {
    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < row.size(); ++i) {
        if (row[i] > row[i - 1] && row[i] > row[i + 1]) {
            maxima.push_back(i);
        }
    }
    return maxima;
}

struct RidgeLine {
    std::vector<std::size_t> rows;   // scale indices, coarse to fine
    std::vector<std::size_t> cols;   // positions
    std::size_t gap = 0;
};

// Links local maxima across scales, walking from the coarsest row with any
// maximum down to the finest. Each maximum either extends the nearest active
// line within the per-scale connection distance or starts a new line; lines
// whose gap counter exceeds the threshold are finalized.
std::vector<RidgeLine> link_ridges(const std::vector<std::vector<double>>& matrix,
                                   const std::vector<double>& scales,
                                   std::size_t gap_threshold) {
    std::vector<std::vector<std::size_t>> maxima_per_row(matrix.size());
    long long start_row = -1;
    for (std::size_t r = 0; r < matrix.size(); ++r) {
        maxima_per_row[r] = local_maxima(matrix[r]);
        if (!maxima_per_row[r].empty()) {
            start_row = static_cast<long long>(r);
        }
    }
    if (start_row < 0) {
        return {};
    }

    std::vector<RidgeLine> active;
    std::vector<RidgeLine> finished;
    for (std::size_t col : maxima_per_row[static_cast<std::size_t>(start_row)]) {
        active.push_back(RidgeLine{{static_cast<std::size_t>(start_row)}, {col}, 0});
    }

    for (long long row = start_row - 1; row >= 0; --row) {
        const auto r = static_cast<std::size_t>(row);
        // scale/4 per the reference defaults, floored at one column so that
        // doubling scale sets can still track a +/-1 drift at fine scales.
        const double max_distance = std::max(scales[r] / 4.0, 1.0);
        for (auto& line : active) {
            ++line.gap;
        }
        for (std::size_t col : maxima_per_row[r]) {
            RidgeLine* best = nullptr;
            double best_distance = std::numeric_limits<double>::infinity();
            for (auto& line : active) {
                const double distance = std::abs(static_cast<double>(col) -
                                                 static_cast<double>(line.cols.back()));
                if (distance < best_distance) {
                    best_distance = distance;
                    best = &line;
                }
            }
            if (best != nullptr && best_distance <= max_distance) {
                best->rows.push_back(r);
                best->cols.push_back(col);
                best->gap = 0;
            } else {
                active.push_back(RidgeLine{{r}, {col}, 0});
            }
        }
        for (auto it = active.begin(); it != active.end();) {
            if (it->gap > gap_threshold) {
                finished.push_back(std::move(*it));
                it = active.erase(it);
            } else {
                ++it;
            }
        }
    }

    finished.insert(finished.end(), active.begin(), active.end());
    return finished;
}

}  // namespace

double mexican_hat(double t, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("mexican_hat requires sigma > 0");
    }
    const double amplitude = 2.0 / (std::sqrt(3.0) * sigma * std::pow(std::numbers::pi, 0.25));
    const double u = t / sigma;
    return amplitude * (1.0 - u * u) * std::exp(-0.5 * u * u);
}

std::vector<std::vector<double>> cwt(const PopularitySeries& series,
                                     const std::vector<double>& scales,
                                     double sigma_ratio) {
    const auto n = static_cast<long long>(series.size());
    if (n < 2) {
        throw std::invalid_argument("cwt requires a series of length >= 2");
    }
    if (scales.empty()) {
        throw std::invalid_argument("cwt requires at least one scale");
    }

    std::vector<std::vector<double>> matrix;
    matrix.reserve(scales.size());
    for (double scale : scales) {
        if (!(scale > 0.0)) {
            throw std::invalid_argument("cwt scales must be positive");
        }
        const double sigma = scale * sigma_ratio;
        // 8 sigma of support keeps the truncated kernel's sum below ~1e-12,
        // so a constant series maps to ~0.
        const auto half_width = static_cast<long long>(std::ceil(8.0 * sigma));
        std::vector<double> kernel(static_cast<std::size_t>(2 * half_width + 1));
        for (long long d = -half_width; d <= half_width; ++d) {
            kernel[static_cast<std::size_t>(d + half_width)] = mexican_hat(static_cast<double>(d), sigma);
        }

        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        for (long long i = 0; i < n; ++i) {
            double acc = 0.0;
            for (long long d = -half_width; d <= half_width; ++d) {
                acc += series.values[reflect_index(i + d, n)] *
                       kernel[static_cast<std::size_t>(d + half_width)];
            }
            row[static_cast<std::size_t>(i)] = acc;
        }
        matrix.push_back(std::move(row));
    }
    return matrix;
}

ShockCandidateList find_peaks(const PopularitySeries& series, const PeakFinderConfig& config) {
    const std::size_t n = series.size();
    if (n < 2) {
        throw std::invalid_argument("find_peaks requires a series of length >= 2");
    }

    std::vector<double> scales;
    for (double scale : config.scales) {
        if (scale <= static_cast<double>(n) / 2.0) {
            scales.push_back(scale);
        }
    }
    std::sort(scales.begin(), scales.end());

    std::vector<Peak> peaks;
    if (!scales.empty()) {
        const auto matrix = cwt(series, scales, config.sigma_ratio);
        const auto gap_threshold = static_cast<std::size_t>(std::ceil(scales.front()));
        const auto min_ridge_length =
            static_cast<std::size_t>(std::ceil(static_cast<double>(scales.size()) / 4.0));
        const auto noise_window = static_cast<std::size_t>(scales.back());

        for (const auto& ridge : link_ridges(matrix, scales, gap_threshold)) {
            if (ridge.rows.size() < min_ridge_length) {
                continue;
            }
            // Best scale by the energy-normalized response coef * sqrt(scale),
            // which compensates the 1/scale kernel amplitude. Points whose
            // column drifts from the finest-scale column (neighboring peaks
            // blurring together at coarse scales) are not eligible; the raw
            // ridge maximum feeds the SNR.
            std::size_t finest = 0;
            for (std::size_t i = 1; i < ridge.rows.size(); ++i) {
                if (ridge.rows[i] < ridge.rows[finest]) {
                    finest = i;
                }
            }
            std::size_t best = finest;
            double best_normalized = -std::numeric_limits<double>::infinity();
            double ridge_max = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ridge.rows.size(); ++i) {
                const double coefficient = matrix[ridge.rows[i]][ridge.cols[i]];
                ridge_max = std::max(ridge_max, coefficient);
                const double drift = std::abs(static_cast<double>(ridge.cols[i]) -
                                              static_cast<double>(ridge.cols[finest]));
                if (drift > 2.0) {
                    continue;
                }
                const double normalized = coefficient * std::sqrt(scales[ridge.rows[i]]);
                if (normalized > best_normalized) {
                    best_normalized = normalized;
                    best = i;
                }
            }
            const std::size_t k = ridge.cols[best];

            const std::size_t lo = k >= noise_window ? k - noise_window : 0;
            const std::size_t hi = std::min(k + noise_window, n - 1);
            const double noise = abs_percentile(matrix.front(), lo, hi, config.noise_percentile);
            const double snr = noise > 0.0
                                   ? ridge_max / noise
                                   : (ridge_max > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (snr < config.min_snr) {
                continue;
            }
            peaks.push_back(Peak{k, scales[ridge.rows[best]], snr, ridge.rows.size()});
        }
    }

    // Descending peak volume; ties broken by position for determinism.
    std::sort(peaks.begin(), peaks.end(), [&](const Peak& a, const Peak& b) {
        const double va = series.values[a.position];
        const double vb = series.values[b.position];
        if (va != vb) {
            return va > vb;
        }
        return a.position < b.position;
    });

    ShockCandidateList candidates;
    for (const auto& peak : peaks) {
        // One candidate per distinct peak: a position within the smaller
        // scale span of an already-kept (higher-volume) peak is the same
        // feature seen at a neighboring scale. The smaller span keeps two
        // genuinely distinct peaks apart even when one was found coarse.
        bool duplicate = false;
        for (const auto& kept : candidates.peaks) {
            const double span = std::max(std::min(kept.scale, peak.scale), 1.0);
            if (std::abs(static_cast<double>(peak.position) - static_cast<double>(kept.position)) <=
                span) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) {
            continue;
        }
        const auto scale = static_cast<std::size_t>(peak.scale);
        const std::size_t start = peak.position > scale ? peak.position - scale : 0;
        if (std::find(candidates.starts.begin(), candidates.starts.end(), start) !=
            candidates.starts.end()) {
            continue;
        }
        candidates.starts.push_back(start);
        candidates.peak_volumes.push_back(series.values[peak.position]);
        candidates.peaks.push_back(peak);
    }

    if (candidates.starts.empty() || candidates.starts.front() != 0) {
        const auto zero = std::find(candidates.starts.begin(), candidates.starts.end(), std::size_t{0});
        if (zero == candidates.starts.end()) {
            candidates.starts.insert(candidates.starts.begin(), 0);
            candidates.peak_volumes.insert(candidates.peak_volumes.begin(), series.values[0]);
        } else {
            // Move the detected 0-start candidate to the mandatory first slot.
            const auto i = static_cast<std::size_t>(zero - candidates.starts.begin());
            std::rotate(candidates.starts.begin(), candidates.starts.begin() + i,
                        candidates.starts.begin() + i + 1);
            std::rotate(candidates.peak_volumes.begin(), candidates.peak_volumes.begin() + i,
                        candidates.peak_volumes.begin() + i + 1);
            std::rotate(candidates.peaks.begin(), candidates.peaks.begin() + i,
                        candidates.peaks.begin() + i + 1);
        }
    }
    return candidates;
}

}  // namespace phoenix
