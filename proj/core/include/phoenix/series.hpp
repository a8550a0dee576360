#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace phoenix {

/// A uniformly windowed, non-negative count series. Values are stored as
/// reals so that fractional model output and integer event counts share one
/// type. Immutable by convention once constructed.
struct PopularitySeries {
    std::vector<double> values;
    double window_length = 1.0;              ///< seconds per window
    std::optional<double> start_time;        ///< epoch seconds of window 0; absent for pre-windowed data

    [[nodiscard]] std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Throws std::invalid_argument if the series is empty or holds a negative
/// or non-finite value.
void validate(const PopularitySeries& series);

/// One access of an object by a user.
struct EventRecord {
    double timestamp = 0.0;   ///< epoch seconds
    std::string user_id;
    std::string object_id;
};

/// popularity = audience + revisits, per object or per object-window.
struct ActivitySplit {
    double popularity = 0.0;
    double audience = 0.0;
    double revisits = 0.0;
};

enum class SeriesFormat {
    plain_lines,   ///< one value per line
    csv_indexed,   ///< `window,value` rows; gaps filled with 0
};

/// Reads a popularity series from disk. csv_indexed rows are sorted by
/// window index and missing indices are filled with zeros. An optional
/// `window,value` header row is skipped. Throws std::runtime_error naming
/// the offending line on parse failures, negative values, or empty files.
[[nodiscard]] PopularitySeries load_series(const std::string& path, SeriesFormat format);

/// Guesses the on-disk format: a comma in the first non-empty line means
/// csv_indexed, otherwise plain_lines.
[[nodiscard]] SeriesFormat detect_series_format(const std::string& path);

/// Reads an event log CSV with the mandatory header
/// `timestamp,user_id,object_id`. Records are returned in file order with
/// no deduplication; memory is O(1) per record beyond the output vector.
[[nodiscard]] std::vector<EventRecord> load_events(const std::string& path);

struct WindowedActivity {
    PopularitySeries popularity;
    PopularitySeries audience;
    PopularitySeries revisits;
};

/// Buckets one object's events into fixed windows anchored at the object's
/// first event. An event counts toward audience iff its user has no earlier
/// event on that object anywhere in the log (stable sort by timestamp; the
/// first of same-user same-timestamp duplicates is the audience event).
/// Throws std::invalid_argument when the object has no events.
[[nodiscard]] WindowedActivity window_events(const std::vector<EventRecord>& events,
                                             const std::string& object_id,
                                             double window_length);

/// `{ "window_length": <sec>, "start_time": <sec|null>, "values": [...] }`
[[nodiscard]] std::string series_to_json(const PopularitySeries& series);
[[nodiscard]] PopularitySeries series_from_json(const std::string& text);

/// Writes `window,value` rows with a header.
void write_series_csv(const PopularitySeries& series, const std::string& path);

}  // namespace phoenix
