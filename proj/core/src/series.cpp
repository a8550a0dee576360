#include "phoenix/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace phoenix {

namespace {

std::string strip(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return {};
    }
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& token, const std::string& path, std::size_t line_no) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &consumed);
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": not a number: '" + token + "'");
    }
    if (consumed != token.size() || !std::isfinite(value)) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": not a finite number: '" + token + "'");
    }
    return value;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(strip(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

}  // namespace

void validate(const PopularitySeries& series) {
    if (series.values.empty()) {
        throw std::invalid_argument("series must hold at least one window");
    }
    for (double v : series.values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("series values must be finite and non-negative");
        }
    }
    if (!(series.window_length > 0.0)) {
        throw std::invalid_argument("window_length must be positive");
    }
}

PopularitySeries load_series(const std::string& path, SeriesFormat format) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open series file: " + path);
    }

    PopularitySeries series;
    std::string line;
    std::size_t line_no = 0;

    if (format == SeriesFormat::plain_lines) {
        while (std::getline(in, line)) {
            ++line_no;
            const std::string token = strip(line);
            if (token.empty()) {
                continue;
            }
            const double value = parse_number(token, path, line_no);
            if (value < 0.0) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": negative value");
            }
            series.values.push_back(value);
        }
    } else {
        std::map<long long, double> by_index;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string text = strip(line);
            if (text.empty()) {
                continue;
            }
            auto fields = split_csv(text);
            if (line_no == 1 && fields.size() >= 2 && fields[0] == "window") {
                continue;  // header row
            }
            if (fields.size() != 2) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": expected 'window,value', got " + std::to_string(fields.size()) +
                                         " fields");
            }
            const double index_raw = parse_number(fields[0], path, line_no);
            const double value = parse_number(fields[1], path, line_no);
            if (index_raw < 0.0 || index_raw != std::floor(index_raw)) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": window index must be a non-negative integer");
            }
            if (value < 0.0) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": negative value");
            }
            by_index[static_cast<long long>(index_raw)] = value;
        }
        if (!by_index.empty()) {
            series.values.assign(static_cast<std::size_t>(by_index.rbegin()->first) + 1, 0.0);
            for (const auto& [index, value] : by_index) {
                series.values[static_cast<std::size_t>(index)] = value;
            }
        }
    }

    if (series.values.empty()) {
        throw std::runtime_error("series file is empty: " + path);
    }
    return series;
}

SeriesFormat detect_series_format(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open series file: " + path);
    }
    std::string line;
    while (std::getline(in, line)) {
        if (strip(line).empty()) {
            continue;
        }
        return line.find(',') != std::string::npos ? SeriesFormat::csv_indexed
                                                   : SeriesFormat::plain_lines;
    }
    throw std::runtime_error("series file is empty: " + path);
}

std::vector<EventRecord> load_events(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open event file: " + path);
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("event file is empty: " + path);
    }
    {
        auto header = split_csv(strip(line));
        if (header.size() != 3 || header[0] != "timestamp" || header[1] != "user_id" ||
            header[2] != "object_id") {
            throw std::runtime_error(path + ":1: expected header 'timestamp,user_id,object_id'");
        }
    }

    std::vector<EventRecord> events;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = strip(line);
        if (text.empty()) {
            continue;
        }
        auto fields = split_csv(text);
        if (fields.size() != 3) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 3 fields, got " +
                                     std::to_string(fields.size()));
        }
        const double timestamp = parse_number(fields[0], path, line_no);
        if (timestamp < 0.0) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": negative timestamp");
        }
        if (fields[1].empty() || fields[2].empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty user_id or object_id");
        }
        events.push_back(EventRecord{timestamp, std::move(fields[1]), std::move(fields[2])});
    }
    return events;
}

WindowedActivity window_events(const std::vector<EventRecord>& events,
                               const std::string& object_id,
                               double window_length) {
    if (!(window_length > 0.0)) {
        throw std::invalid_argument("window_length must be positive");
    }

    std::vector<const EventRecord*> mine;
    for (const auto& event : events) {
        if (event.object_id == object_id) {
            mine.push_back(&event);
        }
    }
    if (mine.empty()) {
        throw std::invalid_argument("no events for object '" + object_id + "'");
    }

    // Stable sort keeps input order for equal timestamps, which makes the
    // audience assignment for same-user duplicates deterministic.
    std::stable_sort(mine.begin(), mine.end(),
                     [](const EventRecord* a, const EventRecord* b) { return a->timestamp < b->timestamp; });

    const double start = mine.front()->timestamp;
    const double last = mine.back()->timestamp;
    const auto window_count = static_cast<std::size_t>(std::floor((last - start) / window_length)) + 1;

    WindowedActivity out;
    for (auto* series : {&out.popularity, &out.audience, &out.revisits}) {
        series->values.assign(window_count, 0.0);
        series->window_length = window_length;
        series->start_time = start;
    }

    std::unordered_set<std::string> seen_users;
    seen_users.reserve(mine.size());
    for (const EventRecord* event : mine) {
        auto window = static_cast<std::size_t>(std::floor((event->timestamp - start) / window_length));
        window = std::min(window, window_count - 1);  // guard float round-up on the last event
        out.popularity.values[window] += 1.0;
        if (seen_users.insert(event->user_id).second) {
            out.audience.values[window] += 1.0;
        } else {
            out.revisits.values[window] += 1.0;
        }
    }
    return out;
}

void write_series_csv(const PopularitySeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write series file: " + path);
    }
    out << std::setprecision(17);
    out << "window,value\n";
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        out << i << ',' << series.values[i] << '\n';
    }
}

}  // namespace phoenix
