#include "phoenix/characterize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace phoenix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Type-7 quantile: linear interpolation between order statistics. `sorted`
// must be ascending; +inf entries are legal and sit at the top.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1) {
        return sorted.front();
    }
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) {
        return sorted[lo];
    }
    if (std::isinf(sorted[lo + 1])) {
        return sorted[lo + 1];
    }
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double ratio_or_inf(double revisits, double audience) {
    if (audience == 0.0) {
        return revisits > 0.0 ? kInf : 0.0;
    }
    return revisits / audience;
}

struct ObjectTotals {
    double popularity = 0.0;
    double audience = 0.0;
};

}  // namespace

RatioReport long_run_report(const std::vector<EventRecord>& events, std::size_t min_popularity) {
    if (events.empty()) {
        throw std::invalid_argument("long_run_report requires a non-empty event log");
    }

    std::unordered_map<std::string, ObjectTotals> totals;
    std::unordered_set<std::string> seen;  // object + '\x1f' + user pairs
    seen.reserve(events.size());
    for (const auto& event : events) {
        auto& t = totals[event.object_id];
        t.popularity += 1.0;
        if (seen.insert(event.object_id + '\x1f' + event.user_id).second) {
            t.audience += 1.0;
        }
    }

    RatioReport report;
    std::vector<double> ratios;
    std::vector<double> revisit_fractions;
    for (const auto& [object, t] : totals) {
        if (t.popularity <= static_cast<double>(min_popularity)) {
            continue;
        }
        const double revisits = t.popularity - t.audience;
        const double ratio = ratio_or_inf(revisits, t.audience);
        report.per_object_ratio.emplace(object, ratio);
        ratios.push_back(ratio);
        revisit_fractions.push_back(revisits / t.popularity);
    }
    if (ratios.empty()) {
        throw std::runtime_error("no object passes the popularity filter");
    }

    std::sort(ratios.begin(), ratios.end());
    std::sort(revisit_fractions.begin(), revisit_fractions.end());
    report.median_revisits_over_audience = quantile_sorted(ratios, 0.5);
    report.median_revisits_over_popularity = quantile_sorted(revisit_fractions, 0.5);

    const auto count = static_cast<double>(ratios.size());
    report.pct_dominated =
        static_cast<double>(std::count_if(ratios.begin(), ratios.end(), [](double r) { return r > 1.0; })) /
        count;

    // CCDF sampled at each distinct finite ratio value.
    for (std::size_t i = 0; i < ratios.size();) {
        const double threshold = ratios[i];
        if (std::isinf(threshold)) {
            break;
        }
        std::size_t j = i;
        while (j < ratios.size() && ratios[j] == threshold) {
            ++j;
        }
        report.ccdf.emplace_back(threshold, static_cast<double>(ratios.size() - j) / count);
        i = j;
    }
    return report;
}

WindowedQuartiles windowed_quartiles(const std::vector<EventRecord>& events, double window_length,
                                     std::size_t min_window_popularity) {
    if (events.empty()) {
        throw std::invalid_argument("windowed_quartiles requires a non-empty event log");
    }
    if (!(window_length > 0.0)) {
        throw std::invalid_argument("window_length must be positive");
    }

    std::unordered_set<std::string> objects;
    for (const auto& event : events) {
        objects.insert(event.object_id);
    }

    std::vector<double> pooled;
    for (const auto& object : objects) {
        const WindowedActivity activity = window_events(events, object, window_length);
        for (std::size_t w = 0; w < activity.popularity.size(); ++w) {
            if (activity.popularity.values[w] > static_cast<double>(min_window_popularity)) {
                pooled.push_back(ratio_or_inf(activity.revisits.values[w], activity.audience.values[w]));
            }
        }
    }
    if (pooled.empty()) {
        throw std::runtime_error("no window passes the popularity filter");
    }

    std::sort(pooled.begin(), pooled.end());
    WindowedQuartiles out;
    out.window_length = window_length;
    out.q25 = quantile_sorted(pooled, 0.25);
    out.median = quantile_sorted(pooled, 0.50);
    out.q75 = quantile_sorted(pooled, 0.75);
    out.windows_counted = pooled.size();
    return out;
}

void write_ccdf_csv(const RatioReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write ccdf file: " + path);
    }
    out << "threshold,fraction\n";
    for (const auto& [threshold, fraction] : report.ccdf) {
        out << threshold << ',' << fraction << '\n';
    }
}

}  // namespace phoenix
