#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "phoenix/characterize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace phoenix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Brute-force recount of whole-log ratios: nested scans, no hashing.
std::map<std::string, double> recount_ratios(const std::vector<EventRecord>& events,
                                             std::size_t min_popularity) {
    std::vector<std::string> objects;
    for (const auto& e : events) {
        if (std::find(objects.begin(), objects.end(), e.object_id) == objects.end()) {
            objects.push_back(e.object_id);
        }
    }
    std::map<std::string, double> ratios;
    for (const auto& object : objects) {
        std::vector<std::string> users;
        double popularity = 0.0;
        for (const auto& e : events) {
            if (e.object_id != object) {
                continue;
            }
            popularity += 1.0;
            if (std::find(users.begin(), users.end(), e.user_id) == users.end()) {
                users.push_back(e.user_id);
            }
        }
        if (popularity <= static_cast<double>(min_popularity)) {
            continue;
        }
        const double audience = static_cast<double>(users.size());
        const double revisits = popularity - audience;
        ratios[object] = audience == 0.0 ? (revisits > 0.0 ? kInf : 0.0) : revisits / audience;
    }
    return ratios;
}

double median_oracle(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double quantile_oracle(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) {
        return values[lo];
    }
    if (std::isinf(values[lo + 1])) {
        return kInf;
    }
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace

TEST_CASE("all-first-visit log yields zero ratios") {
    std::vector<EventRecord> events;
    for (int u = 0; u < 600; ++u) {
        events.push_back({static_cast<double>(u), "u" + std::to_string(u), "a"});
        events.push_back({static_cast<double>(u) + 0.5, "u" + std::to_string(u), "b"});
    }
    const auto report = long_run_report(events);  // default filter: popularity > 500
    REQUIRE(report.per_object_ratio.size() == 2);
    for (const auto& [object, ratio] : report.per_object_ratio) {
        CHECK(ratio == 0.0);
    }
    CHECK(report.pct_dominated == 0.0);
    CHECK(report.median_revisits_over_audience == 0.0);
    CHECK(report.median_revisits_over_popularity == 0.0);
}

TEST_CASE("a single heavy revisitor dominates its object") {
    std::vector<EventRecord> events;
    for (int i = 0; i < 26; ++i) {
        events.push_back({static_cast<double>(i), "u", "video"});
    }
    const auto report = long_run_report(events, 0);
    CHECK(report.per_object_ratio.at("video") == doctest::Approx(25.0));
    CHECK(report.median_revisits_over_popularity == doctest::Approx(25.0 / 26.0));
    CHECK(report.pct_dominated == 1.0);
}

TEST_CASE("programmed synthetic log matches the brute-force recount") {
    // 100 objects, object k gets k+1 distinct users plus k revisits by user 0.
    std::vector<EventRecord> events;
    double clock = 0.0;
    for (int k = 0; k < 100; ++k) {
        const std::string object = "o" + std::to_string(k);
        for (int u = 0; u <= k; ++u) {
            events.push_back({clock, "u" + std::to_string(u), object});
            clock += 1.0;
        }
        for (int r = 0; r < k; ++r) {
            events.push_back({clock, "u0", object});
            clock += 1.0;
        }
    }
    std::mt19937_64 rng(17);
    std::shuffle(events.begin(), events.end(), rng);

    const auto report = long_run_report(events, 0);
    const auto expected = recount_ratios(events, 0);
    REQUIRE(report.per_object_ratio.size() == expected.size());
    for (const auto& [object, ratio] : expected) {
        CHECK(report.per_object_ratio.at(object) == doctest::Approx(ratio).epsilon(1e-12));
    }

    std::vector<double> ratios;
    for (const auto& [object, ratio] : expected) {
        ratios.push_back(ratio);
    }
    CHECK(report.median_revisits_over_audience == doctest::Approx(median_oracle(ratios)).epsilon(1e-12));
}

TEST_CASE("ccdf is non-increasing with fractions in the unit interval") {
    std::vector<EventRecord> events;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> user(0, 9);
    for (int k = 0; k < 40; ++k) {
        for (int i = 0; i < 30; ++i) {
            events.push_back({static_cast<double>(i), "u" + std::to_string(user(rng)),
                              "o" + std::to_string(k)});
        }
    }
    const auto report = long_run_report(events, 0);
    double previous = 1.1;
    for (const auto& [threshold, fraction] : report.ccdf) {
        CHECK(fraction >= 0.0);
        CHECK(fraction <= 1.0);
        CHECK(fraction <= previous);
        previous = fraction;
    }
    // pct_dominated agrees with a direct strict count
    double dominated = 0.0;
    for (const auto& [object, ratio] : report.per_object_ratio) {
        if (ratio > 1.0) {
            dominated += 1.0;
        }
    }
    CHECK(report.pct_dominated ==
          doctest::Approx(dominated / static_cast<double>(report.per_object_ratio.size())));
}

TEST_CASE("raising the popularity filter never adds objects") {
    std::vector<EventRecord> events;
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> count(1, 40);
    for (int k = 0; k < 30; ++k) {
        const int events_for_object = count(rng);
        for (int i = 0; i < events_for_object; ++i) {
            events.push_back({static_cast<double>(i), "u" + std::to_string(i % 7),
                              "o" + std::to_string(k)});
        }
    }
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (std::size_t threshold : {0, 5, 10, 20, 30}) {
        std::size_t included = 0;
        try {
            included = long_run_report(events, threshold).per_object_ratio.size();
        } catch (const std::runtime_error&) {
            included = 0;  // nothing passes
        }
        CHECK(included <= previous);
        previous = included;
    }
}

TEST_CASE("long_run_report error paths") {
    CHECK_THROWS_AS(long_run_report({}), std::invalid_argument);
    std::vector<EventRecord> tiny = {{0, "u", "o"}};
    CHECK_THROWS_AS(long_run_report(tiny, 500), std::runtime_error);
}

TEST_CASE("fresh-user windows give all-zero quartiles") {
    std::vector<EventRecord> events;
    int user = 0;
    for (int w = 0; w < 5; ++w) {
        for (int i = 0; i < 21; ++i) {
            events.push_back({w * 100.0 + i, "u" + std::to_string(user++), "o"});
        }
    }
    const auto quartiles = windowed_quartiles(events, 100.0, 20);
    CHECK(quartiles.q25 == 0.0);
    CHECK(quartiles.median == 0.0);
    CHECK(quartiles.q75 == 0.0);
    CHECK(quartiles.windows_counted == 5);
}

TEST_CASE("a single qualifying window pins all three quartiles") {
    std::vector<EventRecord> events;
    for (int u = 0; u < 6; ++u) {
        events.push_back({static_cast<double>(u), "u" + std::to_string(u), "o"});
    }
    for (int r = 0; r < 24; ++r) {
        events.push_back({10.0 + r, "u0", "o"});
    }
    const auto quartiles = windowed_quartiles(events, 1000.0, 20);
    CHECK(quartiles.windows_counted == 1);
    CHECK(quartiles.q25 == doctest::Approx(4.0));   // 24 revisits over 6 first visits
    CHECK(quartiles.median == doctest::Approx(4.0));
    CHECK(quartiles.q75 == doctest::Approx(4.0));
}

TEST_CASE("revisit-only windows contribute +inf and sort last") {
    std::vector<EventRecord> events;
    // window 0: 21 fresh users -> ratio 0
    for (int u = 0; u < 21; ++u) {
        events.push_back({static_cast<double>(u), "u" + std::to_string(u), "o"});
    }
    // window 1: 11 fresh + 11 revisits -> ratio 1
    for (int u = 0; u < 11; ++u) {
        events.push_back({100.0 + u, "v" + std::to_string(u), "o"});
        events.push_back({100.0 + 50 + u, "u" + std::to_string(u), "o"});
    }
    // window 2: 22 revisits by known users -> ratio +inf
    for (int u = 0; u < 21; ++u) {
        events.push_back({200.0 + u, "u" + std::to_string(u), "o"});
    }
    events.push_back({200.0 + 30, "u0", "o"});

    const auto quartiles = windowed_quartiles(events, 100.0, 20);
    CHECK(quartiles.windows_counted == 3);
    CHECK(quartiles.q25 == doctest::Approx(0.5));
    CHECK(quartiles.median == doctest::Approx(1.0));
    CHECK(std::isinf(quartiles.q75));
}

TEST_CASE("pooled quartiles match a brute-force recount oracle") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> users(1, 12);
    std::uniform_int_distribution<int> extra(0, 40);
    std::vector<EventRecord> events;
    for (int k = 0; k < 12; ++k) {
        const std::string object = "o" + std::to_string(k);
        double clock = 1000.0 * k;
        for (int w = 0; w < 6; ++w) {
            const int fresh = users(rng);
            for (int u = 0; u < fresh; ++u) {
                events.push_back({clock + w * 50.0 + u * 0.25,
                                  "o" + std::to_string(k) + "_u" + std::to_string(w * 100 + u), object});
            }
            const int revisits = extra(rng);
            for (int r = 0; r < revisits; ++r) {
                // user from window 0 of the same object revisits
                events.push_back({clock + w * 50.0 + 20.0 + r * 0.25,
                                  "o" + std::to_string(k) + "_u0", object});
            }
        }
    }
    std::shuffle(events.begin(), events.end(), rng);

    // Oracle: per object, recount windows anchored at the first event with a
    // per-user first-visit scan, pool the qualifying ratios, interpolate.
    std::vector<double> pooled;
    std::vector<std::string> objects;
    for (const auto& e : events) {
        if (std::find(objects.begin(), objects.end(), e.object_id) == objects.end()) {
            objects.push_back(e.object_id);
        }
    }
    const double window_length = 50.0;
    for (const auto& object : objects) {
        std::vector<EventRecord> mine;
        for (const auto& e : events) {
            if (e.object_id == object) {
                mine.push_back(e);
            }
        }
        std::stable_sort(mine.begin(), mine.end(),
                         [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
        const double start = mine.front().timestamp;
        std::map<std::size_t, double> pop;
        std::map<std::size_t, double> audience;
        std::vector<std::string> seen;
        for (const auto& e : mine) {
            const auto w = static_cast<std::size_t>(std::floor((e.timestamp - start) / window_length));
            pop[w] += 1.0;
            if (std::find(seen.begin(), seen.end(), e.user_id) == seen.end()) {
                seen.push_back(e.user_id);
                audience[w] += 1.0;
            }
        }
        for (const auto& [w, p] : pop) {
            if (p > 20.0) {
                const double a = audience.count(w) ? audience.at(w) : 0.0;
                const double r = p - a;
                pooled.push_back(a == 0.0 ? (r > 0.0 ? kInf : 0.0) : r / a);
            }
        }
    }
    REQUIRE_FALSE(pooled.empty());

    const auto quartiles = windowed_quartiles(events, window_length, 20);
    CHECK(quartiles.windows_counted == pooled.size());
    CHECK(quartiles.q25 == doctest::Approx(quantile_oracle(pooled, 0.25)).epsilon(1e-12));
    CHECK(quartiles.median == doctest::Approx(quantile_oracle(pooled, 0.50)).epsilon(1e-12));
    if (std::isinf(quantile_oracle(pooled, 0.75))) {
        CHECK(std::isinf(quartiles.q75));
    } else {
        CHECK(quartiles.q75 == doctest::Approx(quantile_oracle(pooled, 0.75)).epsilon(1e-12));
    }
    CHECK(quartiles.q25 <= quartiles.median);
    CHECK(quartiles.median <= quartiles.q75);
}

TEST_CASE("windowed quartile error paths") {
    CHECK_THROWS_AS(windowed_quartiles({}, 3600.0), std::invalid_argument);
    std::vector<EventRecord> sparse = {{0, "u", "o"}, {10, "u", "o"}};
    CHECK_THROWS_AS(windowed_quartiles(sparse, 3600.0, 20), std::runtime_error);
}

TEST_CASE("report json serializes infinities as strings") {
    std::vector<EventRecord> events;
    for (int i = 0; i < 26; ++i) {
        events.push_back({static_cast<double>(i), "u", "video"});
    }
    const auto report = long_run_report(events, 0);
    const auto json_text = characterize_report_to_json(report, {});
    CHECK(json_text.find("per_object_ratio") != std::string::npos);
    CHECK(json_text.find("pct_dominated") != std::string::npos);
}
