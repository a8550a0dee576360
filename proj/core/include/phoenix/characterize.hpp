#pragma once

#include "phoenix/series.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace phoenix {

/// Long-run revisit statistics over an event log. Ratios are
/// revisits/audience; an object whose activity is all revisits inside the
/// filter would map to +infinity (cannot happen on whole-log totals, where
/// audience >= 1, but the representation allows it).
struct RatioReport {
    std::map<std::string, double> per_object_ratio;
    std::vector<std::pair<double, double>> ccdf;   ///< (threshold, fraction of objects with ratio > threshold)
    double median_revisits_over_audience = 0.0;
    double median_revisits_over_popularity = 0.0;
    double pct_dominated = 0.0;                    ///< fraction of objects with ratio > 1
};

/// Whole-log report over objects with total popularity strictly above
/// min_popularity. Throws when no object passes the filter.
[[nodiscard]] RatioReport long_run_report(const std::vector<EventRecord>& events,
                                          std::size_t min_popularity = 500);

struct WindowedQuartiles {
    double window_length = 0.0;   ///< seconds
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    std::size_t windows_counted = 0;
};

/// Pools the ratio revisits/audience over every (object, window) cell whose
/// popularity strictly exceeds min_window_popularity and reports its
/// quartiles (linear interpolation between order statistics). Cells with
/// audience = 0 and revisits > 0 contribute +infinity and sort last. Throws
/// when no window qualifies.
[[nodiscard]] WindowedQuartiles windowed_quartiles(const std::vector<EventRecord>& events,
                                                   double window_length,
                                                   std::size_t min_window_popularity = 20);

/// Report JSON with the long-run section and one windowed section per
/// window size. Infinite ratios serialize as the string "inf".
[[nodiscard]] std::string characterize_report_to_json(const RatioReport& report,
                                                      const std::vector<WindowedQuartiles>& windowed);

/// `threshold,fraction` rows for external plotting.
void write_ccdf_csv(const RatioReport& report, const std::string& path);

}  // namespace phoenix
