#include "phoenix/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phoenix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kThetaLimit = 700.0;   // beyond this exp() overflows
constexpr double kLambdaInit = 1e-3;
constexpr double kLambdaShrink = 0.5;
constexpr double kLambdaGrow = 4.0;
constexpr double kLambdaMax = 1e14;
constexpr double kFdStep = 1e-6;

double logit(double p) {
    const double clamped = std::clamp(p, 1e-9, 1.0 - 1e-9);
    return std::log(clamped / (1.0 - clamped));
}

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

/// Maps between the free optimization vector and a model with fixed shock
/// start times: [log S0, log beta, log gamma, log omega] per shock, then
/// [logit m, h] when the period is fitted.
struct ParameterMap {
    std::vector<std::size_t> starts;
    bool with_period = false;
    double period_e = 7.0;

    [[nodiscard]] std::size_t size() const { return 4 * starts.size() + (with_period ? 2 : 0); }

    [[nodiscard]] Eigen::VectorXd pack(const PhoenixRModel& model) const {
        Eigen::VectorXd theta(size());
        for (std::size_t i = 0; i < starts.size(); ++i) {
            const auto& shock = model.shocks[i];
            theta[4 * i + 0] = std::log(std::max(shock.s0, 1e-12));
            theta[4 * i + 1] = std::log(std::max(shock.beta, 1e-12));
            theta[4 * i + 2] = std::log(std::max(shock.gamma, 1e-12));
            theta[4 * i + 3] = std::log(std::max(shock.omega, 1e-12));
        }
        if (with_period) {
            const PeriodParams period = model.period.value_or(PeriodParams{0.5, 0.0, period_e});
            theta[4 * starts.size() + 0] = logit(period.m);
            theta[4 * starts.size() + 1] = period.h;
        }
        return theta;
    }

    [[nodiscard]] PhoenixRModel unpack(const Eigen::VectorXd& theta) const {
        PhoenixRModel model;
        model.shocks.resize(starts.size());
        for (std::size_t i = 0; i < starts.size(); ++i) {
            auto& shock = model.shocks[i];
            shock.start = starts[i];
            shock.s0 = std::exp(theta[4 * i + 0]);
            shock.beta = std::exp(theta[4 * i + 1]);
            shock.gamma = std::exp(theta[4 * i + 2]);
            shock.omega = std::exp(theta[4 * i + 3]);
        }
        if (with_period) {
            model.period = PeriodParams{sigmoid(theta[4 * starts.size() + 0]),
                                        theta[4 * starts.size() + 1], period_e};
        }
        return model;
    }
};

struct Evaluation {
    double objective = kInf;
    std::vector<double> modeled;
    bool valid = false;
};

Evaluation evaluate(const ParameterMap& map, const Eigen::VectorXd& theta,
                    const PopularitySeries& observed) {
    Evaluation eval;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        if (!std::isfinite(theta[j]) || std::abs(theta[j]) > kThetaLimit) {
            return eval;
        }
    }
    const PhoenixRModel model = map.unpack(theta);
    const ModelSimulation sim = simulate(model, observed.size());
    double objective = 0.0;
    for (std::size_t t = 0; t < observed.size(); ++t) {
        const double r = observed.values[t] - sim.popularity.values[t];
        objective += r * r;
    }
    if (!std::isfinite(objective)) {
        return eval;
    }
    eval.objective = objective;
    eval.modeled = sim.popularity.values;
    eval.valid = true;
    return eval;
}

struct LmRun {
    Eigen::VectorXd theta;
    double objective = kInf;
    bool converged = false;
    int iterations = 0;
};

LmRun run_lm(const PopularitySeries& observed, const ParameterMap& map,
             const Eigen::VectorXd& theta0, const FitConfig& config, LmTrace* trace) {
    const auto n = static_cast<Eigen::Index>(observed.size());
    const auto p = static_cast<Eigen::Index>(map.size());

    Eigen::VectorXd theta = theta0;
    Evaluation current = evaluate(map, theta, observed);

    LmRun best;
    best.theta = theta;
    best.objective = current.objective;
    if (!current.valid) {
        return best;
    }
    if (trace != nullptr) {
        trace->accepted_objectives.push_back(current.objective);
    }

    double lambda = kLambdaInit;
    Eigen::MatrixXd jacobian(n, p);
    int iteration = 0;
    bool stale_jacobian = true;

    while (iteration < config.max_lm_iterations) {
        ++iteration;

        if (stale_jacobian) {
            for (Eigen::Index j = 0; j < p; ++j) {
                const double h = kFdStep * std::max(1.0, std::abs(theta[j]));
                Eigen::VectorXd probe = theta;
                probe[j] += h;
                Evaluation shifted = evaluate(map, probe, observed);
                if (!shifted.valid) {
                    probe[j] = theta[j] - h;
                    shifted = evaluate(map, probe, observed);
                }
                if (!shifted.valid) {
                    jacobian.col(j).setZero();
                    continue;
                }
                const double step = probe[j] - theta[j];
                for (Eigen::Index t = 0; t < n; ++t) {
                    jacobian(t, j) =
                        (shifted.modeled[static_cast<std::size_t>(t)] -
                         current.modeled[static_cast<std::size_t>(t)]) / step;
                }
            }
            stale_jacobian = false;
        }

        Eigen::VectorXd residual(n);
        for (Eigen::Index t = 0; t < n; ++t) {
            residual[t] = observed.values[static_cast<std::size_t>(t)] -
                          current.modeled[static_cast<std::size_t>(t)];
        }
        const Eigen::VectorXd gradient = jacobian.transpose() * residual;
        Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
        for (Eigen::Index j = 0; j < p; ++j) {
            normal(j, j) += lambda * std::max(normal(j, j), 1e-12);
        }

        const Eigen::VectorXd step = normal.ldlt().solve(gradient);
        const Eigen::VectorXd candidate = theta + step;
        const Evaluation next = step.allFinite() ? evaluate(map, candidate, observed) : Evaluation{};

        if (next.valid && next.objective < current.objective) {
            const double drop = current.objective - next.objective;
            theta = candidate;
            current = next;
            lambda = std::max(lambda * kLambdaShrink, 1e-12);
            stale_jacobian = true;
            if (trace != nullptr) {
                trace->accepted_objectives.push_back(current.objective);
            }
            if (current.objective < best.objective) {
                best.theta = theta;
                best.objective = current.objective;
            }
            if (drop < config.lm_tolerance * std::max(current.objective, 1e-30)) {
                best.converged = true;
                break;
            }
        } else {
            lambda *= kLambdaGrow;
            if (lambda > kLambdaMax) {
                break;  // stalled; keep the best point visited
            }
        }
    }

    best.iterations = iteration;
    if (trace != nullptr) {
        trace->iterations = iteration;
        trace->converged = best.converged;
    }
    return best;
}

void draw_rates(ShockParams& shock, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    // The infection-rate draw is scaled by the susceptible pool so the
    // initial per-window growth beta*S0 lands in the unit range; a raw
    // U(0,1) beta with a large S0 would start inside the flow clamp where
    // the beta gradient vanishes.
    shock.beta = std::max(uniform(rng), 1e-9) / std::max(shock.s0, 1.0);
    shock.gamma = std::max(uniform(rng), 1e-9);
    shock.omega = std::max(uniform(rng), 1e-9);
}

PhoenixRModel initial_model(const PopularitySeries& series, const std::vector<std::size_t>& starts,
                            const FitConfig& config, double first_s0, std::mt19937_64& rng) {
    PhoenixRModel model;
    model.shocks.resize(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        auto& shock = model.shocks[i];
        shock.start = starts[i];
        shock.s0 = i == 0 ? first_s0 : std::max(series.values[starts[i]], 1.0);
        draw_rates(shock, rng);
    }
    if (config.period_enabled) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        model.period = PeriodParams{unit(rng), unit(rng), config.period_e};
    }
    return model;
}

void redraw_rates(PhoenixRModel& model, std::mt19937_64& rng) {
    for (auto& shock : model.shocks) {
        draw_rates(shock, rng);
    }
}

Eigen::VectorXd finite_start(const PopularitySeries& series, const ParameterMap& map,
                             PhoenixRModel model, std::mt19937_64& rng) {
    Eigen::VectorXd theta = map.pack(model);
    for (int attempt = 0; attempt < 10; ++attempt) {
        if (evaluate(map, theta, series).valid) {
            return theta;
        }
        redraw_rates(model, rng);
        theta = map.pack(model);
    }
    if (evaluate(map, theta, series).valid) {
        return theta;
    }
    throw std::runtime_error("non-finite objective at initialization after 10 redraws");
}

void check_starts(const PopularitySeries& series, const std::vector<std::size_t>& starts) {
    if (starts.empty()) {
        throw std::invalid_argument("lm_fit requires at least one shock start");
    }
    for (std::size_t start : starts) {
        if (start >= series.size()) {
            throw std::invalid_argument("shock start beyond the series length");
        }
    }
}

}  // namespace

PhoenixRModel lm_fit_with_rng(const PopularitySeries& series, const std::vector<std::size_t>& starts,
                              const FitConfig& config, std::mt19937_64& rng,
                              const std::optional<PhoenixRModel>& init, LmTrace* trace) {
    validate(series);
    check_starts(series, starts);

    const ParameterMap map{starts, config.period_enabled, config.period_e};

    if (init) {
        if (init->shocks.size() != starts.size()) {
            throw std::invalid_argument("initial model's shock count must match the start list");
        }
        const Eigen::VectorXd theta0 = finite_start(series, map, *init, rng);
        const LmRun run = run_lm(series, map, theta0, config, trace);
        return map.unpack(run.theta);
    }

    if (config.s1_grid.empty()) {
        throw std::invalid_argument("fit config requires a non-empty S0 multi-start grid");
    }

    LmRun best;
    LmTrace best_trace;
    for (double s0 : config.s1_grid) {
        const PhoenixRModel start_model = initial_model(series, starts, config, s0, rng);
        const Eigen::VectorXd theta0 = finite_start(series, map, start_model, rng);
        LmTrace run_trace;
        const LmRun run = run_lm(series, map, theta0, config, &run_trace);
        if (run.objective < best.objective) {
            best = run;
            best_trace = std::move(run_trace);
        }
    }
    if (trace != nullptr) {
        *trace = std::move(best_trace);
    }
    return map.unpack(best.theta);
}

PhoenixRModel lm_fit(const PopularitySeries& series, const std::vector<std::size_t>& starts,
                     const FitConfig& config, const std::optional<PhoenixRModel>& init,
                     LmTrace* trace) {
    std::mt19937_64 rng(config.rng_seed);
    return lm_fit_with_rng(series, starts, config, rng, init, trace);
}

FitResult fit_phoenix_r(const PopularitySeries& series, const FitConfig& config) {
    validate(series);
    if (series.size() < 8) {
        throw std::invalid_argument("fit_phoenix_r requires at least 8 windows");
    }

    const ShockCandidateList candidates = find_peaks(series, config.peaks);
    std::mt19937_64 rng(config.rng_seed);

    struct Candidate {
        PhoenixRModel model;
        MdlBreakdown mdl;
        ModelSimulation sim;
        bool converged = false;
    };

    std::optional<Candidate> best;
    double min_cost = kInf;
    std::optional<PhoenixRModel> previous;
    int tried = 0;

    for (std::size_t i = 1; i <= candidates.starts.size(); ++i) {
        const std::vector<std::size_t> starts(candidates.starts.begin(),
                                              candidates.starts.begin() + static_cast<long>(i));

        LmTrace trace;
        PhoenixRModel model;
        if (previous) {
            // Warm start: carry over the shocks fitted so far, seed the new
            // shock from its peak volume and fresh rate draws. A cold
            // multi-start run guards against inheriting a poor basin from
            // the previous candidate; the better objective wins.
            PhoenixRModel warm = *previous;
            ShockParams extra;
            extra.start = candidates.starts[i - 1];
            extra.s0 = std::max(candidates.peak_volumes[i - 1], 1.0);
            draw_rates(extra, rng);
            warm.shocks.push_back(extra);

            LmTrace warm_trace;
            PhoenixRModel warm_fit = lm_fit_with_rng(series, starts, config, rng, warm, &warm_trace);
            LmTrace cold_trace;
            PhoenixRModel cold_fit =
                lm_fit_with_rng(series, starts, config, rng, std::nullopt, &cold_trace);
            const double warm_sse =
                std::pow(rmse(series, simulate(warm_fit, series.size()).popularity), 2);
            const double cold_sse =
                std::pow(rmse(series, simulate(cold_fit, series.size()).popularity), 2);
            if (warm_sse <= cold_sse) {
                model = std::move(warm_fit);
                trace = std::move(warm_trace);
            } else {
                model = std::move(cold_fit);
                trace = std::move(cold_trace);
            }
        } else {
            model = lm_fit_with_rng(series, starts, config, rng, std::nullopt, &trace);
        }
        ModelSimulation sim = simulate(model, series.size());
        const MdlBreakdown cost = total_cost(series, sim.popularity, model, series.size());
        tried = static_cast<int>(i);

        if (cost.total < min_cost) {
            min_cost = cost.total;
            best = Candidate{model, cost, std::move(sim), trace.converged};
        }
        previous = std::move(model);

        if (cost.total > min_cost * (1.0 + config.epsilon)) {
            break;
        }
    }

    FitResult result;
    result.model = best->model;
    result.mdl = best->mdl;
    result.rmse = rmse(series, best->sim.popularity);
    result.bic = bic(series, best->sim.popularity, bic_parameter_count(best->model));
    result.shocks_tried = tried;
    result.converged = best->converged;
    result.clamp_events = best->sim.clamped_steps;
    return result;
}

double rmse(const PopularitySeries& observed, const PopularitySeries& modeled) {
    if (observed.size() != modeled.size()) {
        throw std::invalid_argument("rmse requires equal-length series");
    }
    if (observed.size() == 0) {
        throw std::invalid_argument("rmse requires at least one window");
    }
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double r = observed.values[i] - modeled.values[i];
        sum_sq += r * r;
    }
    return std::sqrt(sum_sq / static_cast<double>(observed.size()));
}

double bic(const PopularitySeries& observed, const PopularitySeries& modeled, int parameter_count) {
    if (observed.size() != modeled.size() || observed.size() == 0) {
        throw std::invalid_argument("bic requires equal-length, non-empty series");
    }
    const auto n = static_cast<double>(observed.size());
    double sse = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double r = observed.values[i] - modeled.values[i];
        sse += r * r;
    }
    return n * std::log(sse / n + 1e-12) + static_cast<double>(parameter_count) * std::log(n);
}

int bic_parameter_count(const PhoenixRModel& model) {
    return static_cast<int>(5 * model.shocks.size()) + (model.period ? 2 : 0);
}

}  // namespace phoenix
