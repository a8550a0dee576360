// JSON (de)serialization for every module, kept in one translation unit so
// the vendored header is compiled once.

#include "phoenix/characterize.hpp"
#include "phoenix/fit.hpp"
#include "phoenix/forecast.hpp"
#include "phoenix/model.hpp"
#include "phoenix/peaks.hpp"
#include "phoenix/series.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phoenix {

namespace {

using nlohmann::json;

// JSON has no infinity; infinite ratios travel as the string "inf".
json finite_or_inf(double value) {
    if (std::isinf(value)) {
        return json("inf");
    }
    return json(value);
}

json parse(const std::string& text, const char* what) {
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) {
        throw std::runtime_error(std::string("malformed ") + what + " JSON");
    }
    return parsed;
}

double require_number(const json& node, const std::string& path) {
    if (!node.is_number()) {
        throw std::runtime_error("expected a number at " + path);
    }
    return node.get<double>();
}

}  // namespace

std::string series_to_json(const PopularitySeries& series) {
    json out;
    out["window_length"] = series.window_length;
    out["start_time"] = series.start_time ? json(*series.start_time) : json(nullptr);
    out["values"] = series.values;
    return out.dump(2);
}

PopularitySeries series_from_json(const std::string& text) {
    const json parsed = parse(text, "series");
    PopularitySeries series;
    series.window_length = require_number(parsed.at("window_length"), "window_length");
    if (parsed.contains("start_time") && !parsed.at("start_time").is_null()) {
        series.start_time = require_number(parsed.at("start_time"), "start_time");
    }
    if (!parsed.contains("values") || !parsed.at("values").is_array()) {
        throw std::runtime_error("expected an array at values");
    }
    for (std::size_t i = 0; i < parsed.at("values").size(); ++i) {
        series.values.push_back(require_number(parsed.at("values")[i], "values[" + std::to_string(i) + "]"));
    }
    validate(series);
    return series;
}

std::string model_to_json(const PhoenixRModel& model) {
    json out;
    out["shocks"] = json::array();
    for (const auto& shock : model.shocks) {
        out["shocks"].push_back({{"s", shock.start},
                                 {"S0", shock.s0},
                                 {"beta", shock.beta},
                                 {"gamma", shock.gamma},
                                 {"omega", shock.omega}});
    }
    if (model.period) {
        out["period"] = {{"m", model.period->m}, {"h", model.period->h}, {"e", model.period->e}};
    } else {
        out["period"] = nullptr;
    }
    return out.dump(2);
}

PhoenixRModel model_from_json(const std::string& text) {
    const json parsed = parse(text, "model");
    if (!parsed.contains("shocks") || !parsed.at("shocks").is_array()) {
        throw std::runtime_error("expected an array at shocks");
    }
    PhoenixRModel model;
    std::size_t index = 0;
    for (const auto& node : parsed.at("shocks")) {
        const std::string path = "shocks[" + std::to_string(index++) + "]";
        ShockParams shock;
        const double start = require_number(node.at("s"), path + ".s");
        if (start < 0.0 || start != std::floor(start)) {
            throw std::runtime_error(path + ".s must be a non-negative integer");
        }
        shock.start = static_cast<std::size_t>(start);
        shock.s0 = require_number(node.at("S0"), path + ".S0");
        shock.beta = require_number(node.at("beta"), path + ".beta");
        shock.gamma = require_number(node.at("gamma"), path + ".gamma");
        shock.omega = require_number(node.at("omega"), path + ".omega");
        model.shocks.push_back(shock);
    }
    if (parsed.contains("period") && !parsed.at("period").is_null()) {
        const auto& node = parsed.at("period");
        model.period = PeriodParams{require_number(node.at("m"), "period.m"),
                                    require_number(node.at("h"), "period.h"),
                                    require_number(node.at("e"), "period.e")};
    }
    validate(model);
    return model;
}

std::string peaks_to_json(const ShockCandidateList& candidates) {
    json out;
    out["starts"] = candidates.starts;
    out["peaks"] = json::array();
    for (const auto& peak : candidates.peaks) {
        out["peaks"].push_back({{"k", peak.position},
                                {"l", peak.scale},
                                {"snr", std::isinf(peak.snr)
                                            ? json(std::numeric_limits<double>::max())
                                            : json(peak.snr)}});
    }
    return out.dump(2);
}

std::string fit_result_to_json(const FitResult& result) {
    json out;
    out["model"] = json::parse(model_to_json(result.model));
    out["mdl"] = {{"data_size_cost", result.mdl.data_size_cost},
                  {"param_cost", result.mdl.param_cost},
                  {"residual_cost", result.mdl.residual_cost},
                  {"total", result.mdl.total},
                  {"mu", result.mdl.mu},
                  {"sigma", result.mdl.sigma}};
    out["rmse"] = result.rmse;
    out["bic"] = result.bic;
    out["diagnostics"] = {{"shocks_tried", result.shocks_tried},
                          {"converged", result.converged},
                          {"clamp_events", result.clamp_events}};
    return out.dump(2);
}

std::string characterize_report_to_json(const RatioReport& report,
                                        const std::vector<WindowedQuartiles>& windowed) {
    json out;
    json objects = json::object();
    for (const auto& [object, ratio] : report.per_object_ratio) {
        objects[object] = finite_or_inf(ratio);
    }
    json ccdf = json::array();
    for (const auto& [threshold, fraction] : report.ccdf) {
        ccdf.push_back({threshold, fraction});
    }
    out["long_run"] = {
        {"per_object_ratio", objects},
        {"ccdf", ccdf},
        {"medians",
         {{"revisits_over_audience", finite_or_inf(report.median_revisits_over_audience)},
          {"revisits_over_popularity", report.median_revisits_over_popularity}}},
        {"pct_dominated", report.pct_dominated}};
    out["windowed"] = json::array();
    for (const auto& q : windowed) {
        out["windowed"].push_back({{"window_length", q.window_length},
                                   {"q25", finite_or_inf(q.q25)},
                                   {"median", finite_or_inf(q.median)},
                                   {"q75", finite_or_inf(q.q75)},
                                   {"windows_counted", q.windows_counted}});
    }
    return out.dump(2);
}

std::string forecast_report_to_json(const ForecastReport& report) {
    json out;
    out["per_series"] = json::array();
    for (const auto& row : report.per_series) {
        out["per_series"].push_back({{"series", row.series_id},
                                     {"model", to_string(row.kind)},
                                     {"split", row.train_fraction},
                                     {"delta", row.delta},
                                     {"rmse", row.rmse}});
    }
    out["cells"] = json::array();
    for (const auto& cell : report.cells) {
        json entries = json::array();
        for (const auto& entry : cell.entries) {
            entries.push_back({{"model", to_string(entry.kind)},
                               {"mean_rmse", entry.mean_rmse},
                               {"ci_half_width", entry.ci_half_width},
                               {"series_count", entry.series_count}});
        }
        out["cells"].push_back({{"split", cell.train_fraction},
                                {"delta", cell.delta},
                                {"models", entries},
                                {"winner", cell.winner ? json(to_string(*cell.winner)) : json(nullptr)},
                                {"significant", cell.significant}});
    }
    return out.dump(2);
}

}  // namespace phoenix
