#pragma once

#include "phoenix/series.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace phoenix {

/// One detected peak: position k, half-width l (from the scale set), and
/// the ridge statistics that qualified it.
struct Peak {
    std::size_t position = 0;     ///< k, window index of the peak
    double scale = 1.0;           ///< l, half-width at the ridge's best scale
    double snr = 0.0;             ///< ridge max coefficient over local noise level
    std::size_t ridge_length = 0;
};

/// Candidate shock start times: a mandatory leading 0 followed by detected
/// starts (s = max(0, k - l)) in descending order of the series value at the
/// peak position. Duplicate start times are collapsed, keeping the larger
/// peak volume.
struct ShockCandidateList {
    std::vector<std::size_t> starts;
    std::vector<double> peak_volumes;   ///< series value at each start's peak position
    std::vector<Peak> peaks;            ///< detected peaks, same order as their starts
};

struct PeakFinderConfig {
    std::vector<double> scales = {1, 2, 4, 8, 16, 32, 64, 128, 256};
    double sigma_ratio = 1.0;        ///< wavelet sigma per unit half-width
    double min_snr = 1.0;
    double noise_percentile = 10.0;  ///< percentile of |finest-scale row| used as noise level
};

/// Mexican hat wavelet psi(t) = 2/(sqrt(3)*sigma*pi^(1/4)) * (1 - (t/sigma)^2)
/// * exp(-t^2 / (2*sigma^2)).
[[nodiscard]] double mexican_hat(double t, double sigma);

/// One row per scale: the discrete convolution of the series with the
/// Mexican hat sampled at that scale, same length as the series, symmetric
/// reflection at the boundaries. Requires n >= 2 and positive scales.
[[nodiscard]] std::vector<std::vector<double>> cwt(const PopularitySeries& series,
                                                   const std::vector<double>& scales,
                                                   double sigma_ratio = 1.0);

/// CWT ridge-line peak detection. Scales larger than n/2 are skipped; ridge
/// lines are linked coarse to fine with a per-scale connection distance of
/// scale/4 and a gap threshold of ceil(smallest scale); ridges survive with
/// length >= ceil(#scales/4) and SNR >= min_snr, where the noise level is
/// the noise percentile of |finest-scale row| within +/- max scale of the
/// peak. Returns the candidate list described above; an empty detection
/// still yields starts = [0].
[[nodiscard]] ShockCandidateList find_peaks(const PopularitySeries& series,
                                            const PeakFinderConfig& config = {});

/// `{"starts":[...], "peaks":[{"k":..,"l":..,"snr":..},...]}`
[[nodiscard]] std::string peaks_to_json(const ShockCandidateList& candidates);

}  // namespace phoenix
