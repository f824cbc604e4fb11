#pragma once

#include "tscal/forecasters.hpp"
#include "tscal/rng.hpp"

namespace tscal {

enum class Strategy { naive, branching, trajectory, exact };
enum class PointRule { median, mean };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::naive: return "naive";
        case Strategy::branching: return "branching";
        case Strategy::trajectory: return "trajectory";
        case Strategy::exact: return "exact";
    }
    return "?";
}

inline Strategy strategy_from_string(const std::string& s) {
    if (s == "naive") return Strategy::naive;
    if (s == "branching") return Strategy::branching;
    if (s == "trajectory") return Strategy::trajectory;
    if (s == "exact") return Strategy::exact;
    throw DataError("unknown rollout strategy '" + s + "'");
}

struct RolloutConfig {
    Strategy strategy = Strategy::naive;
    std::int64_t patch = 1;          // steps per forward pass, <= native horizon
    std::int64_t total_horizon = 1;  // H
    PointRule point_rule = PointRule::median;
    int n_trajectories = 100;
    QuantileLevels levels;
    std::uint64_t seed = 0;
    std::int64_t max_context = 0;  // oldest values dropped beyond this; 0 = unlimited
};

struct RolloutResult {
    QuantileForecast forecast;
    std::int64_t invocations = 0;               // forecaster predict calls
    std::vector<std::int64_t> calls_per_step;   // predict calls covering each step
};

namespace detail {

inline void validate_rollout(const Forecaster& f, const RolloutConfig& cfg) {
    if (cfg.patch < 1 || cfg.total_horizon < cfg.patch)
        throw DataError("rollout requires H >= patch >= 1");
    if (cfg.strategy != Strategy::exact && cfg.patch > f.native_horizon())
        throw DataError("rollout patch exceeds the forecaster's native horizon");
    if (cfg.strategy == Strategy::trajectory && cfg.n_trajectories < 2)
        throw DataError("trajectory rollout requires n_trajectories >= 2");
}

inline void append_capped(std::vector<double>& ctx, double v, std::int64_t cap) {
    ctx.push_back(v);
    if (cap > 0 && static_cast<std::int64_t>(ctx.size()) > cap)
        ctx.erase(ctx.begin(), ctx.end() - cap);
}

inline double point_value(const PredictiveDistribution& d, PointRule rule) {
    return rule == PointRule::median ? icdf(d, 0.5) : dist_mean(d);
}

inline void attach_provenance(QuantileForecast& f, const RolloutConfig& cfg,
                              std::int64_t invocations) {
    f.extra["strategy"] = to_string(cfg.strategy);
    f.extra["patch"] = std::to_string(cfg.patch);
    if (cfg.strategy == Strategy::trajectory)
        f.extra["n_traj"] = std::to_string(cfg.n_trajectories);
    f.extra["seed"] = std::to_string(cfg.seed);
    f.extra["invocations"] = std::to_string(invocations);
}

} // namespace detail

// Point-feedback rollout: each patch is forecast from a context extended by
// the previous patch's point values only, so per-patch quantiles carry no
// cross-patch widening (the context is re-initialized every iteration).
inline RolloutResult rollout_naive(const Forecaster& f, std::span<const double> context,
                                   const RolloutConfig& cfg, ForecastWindow window) {
    detail::validate_rollout(f, cfg);
    const std::int64_t H = cfg.total_horizon;
    std::vector<double> ctx(context.begin(), context.end());
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(H));
    RolloutResult res;
    res.calls_per_step.assign(static_cast<std::size_t>(H), 0);
    for (std::int64_t done = 0; done < H;) {
        const std::int64_t steps = std::min(cfg.patch, H - done);
        const auto preds = f.predict(ctx, steps);
        ++res.invocations;
        for (std::int64_t h = 0; h < steps; ++h) {
            res.calls_per_step[static_cast<std::size_t>(done + h)] += 1;
            std::vector<double> row(cfg.levels.size());
            for (std::size_t j = 0; j < cfg.levels.size(); ++j)
                row[j] = icdf(preds[static_cast<std::size_t>(h)], cfg.levels[j]);
            rows.push_back(std::move(row));
            detail::append_capped(
                ctx, detail::point_value(preds[static_cast<std::size_t>(h)], cfg.point_rule),
                cfg.max_context);
        }
        done += steps;
    }
    window.horizon = H;
    res.forecast = QuantileForecast::make(std::move(window), cfg.levels, std::move(rows));
    detail::attach_provenance(res.forecast, cfg, res.invocations);
    return res;
}

// Per-quantile contexts: after the first patch the context is branched into
// |Q| copies, each extended by its own quantile track. Later patches run the
// forecaster once per context; the |Q|^2 values per step are aggregated back
// to |Q| rows by taking empirical quantiles, and each aggregated row extends
// the context of its matching level.
inline RolloutResult rollout_branching(const Forecaster& f, std::span<const double> context,
                                       const RolloutConfig& cfg, ForecastWindow window) {
    detail::validate_rollout(f, cfg);
    const std::int64_t H = cfg.total_horizon;
    const std::size_t nq = cfg.levels.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(H));
    RolloutResult res;
    res.calls_per_step.assign(static_cast<std::size_t>(H), 0);

    std::vector<std::vector<double>> contexts;  // one per level after patch 1
    std::int64_t done = 0;
    {
        const std::int64_t steps = std::min(cfg.patch, H - done);
        std::vector<double> ctx(context.begin(), context.end());
        const auto preds = f.predict(ctx, steps);
        ++res.invocations;
        contexts.assign(nq, ctx);
        for (std::int64_t h = 0; h < steps; ++h) {
            res.calls_per_step[static_cast<std::size_t>(done + h)] += 1;
            std::vector<double> row(nq);
            for (std::size_t j = 0; j < nq; ++j)
                row[j] = icdf(preds[static_cast<std::size_t>(h)], cfg.levels[j]);
            for (std::size_t j = 0; j < nq; ++j)
                detail::append_capped(contexts[j], row[j], cfg.max_context);
            rows.push_back(std::move(row));
        }
        done += steps;
    }
    while (done < H) {
        const std::int64_t steps = std::min(cfg.patch, H - done);
        // candidates[t] collects the |Q|^2 values across contexts and levels
        std::vector<std::vector<double>> candidates(static_cast<std::size_t>(steps));
        for (auto& c : candidates) c.reserve(nq * nq);
        for (std::size_t j = 0; j < nq; ++j) {
            const auto preds = f.predict(contexts[j], steps);
            ++res.invocations;
            for (std::int64_t h = 0; h < steps; ++h)
                for (std::size_t l = 0; l < nq; ++l)
                    candidates[static_cast<std::size_t>(h)].push_back(
                        icdf(preds[static_cast<std::size_t>(h)], cfg.levels[l]));
        }
        for (std::int64_t h = 0; h < steps; ++h) {
            res.calls_per_step[static_cast<std::size_t>(done + h)] +=
                static_cast<std::int64_t>(nq);
            std::vector<double> agg(nq);
            for (std::size_t l = 0; l < nq; ++l)
                agg[l] = empirical_quantile(candidates[static_cast<std::size_t>(h)],
                                            cfg.levels[l]);
            for (std::size_t l = 0; l < nq; ++l)
                detail::append_capped(contexts[l], agg[l], cfg.max_context);
            rows.push_back(std::move(agg));
        }
        done += steps;
    }
    window.horizon = H;
    res.forecast = QuantileForecast::make(std::move(window), cfg.levels, std::move(rows));
    detail::attach_provenance(res.forecast, cfg, res.invocations);
    return res;
}

// Sampled-path rollout: n independent contexts, one sample per step appended
// to each; final quantiles are empirical quantiles across the n trajectory
// values at each step. Trajectory i draws from stream ("traj", i), so results
// do not depend on evaluation order.
inline RolloutResult rollout_trajectory(const Forecaster& f, std::span<const double> context,
                                        const RolloutConfig& cfg, ForecastWindow window) {
    detail::validate_rollout(f, cfg);
    const std::int64_t H = cfg.total_horizon;
    const auto n = static_cast<std::size_t>(cfg.n_trajectories);
    RolloutResult res;
    res.calls_per_step.assign(static_cast<std::size_t>(H), 0);

    std::vector<std::vector<double>> samples(n);  // per trajectory, H values
    for (std::size_t i = 0; i < n; ++i) {
        RngStream stream(cfg.seed, "traj", static_cast<std::uint64_t>(i));
        std::vector<double> ctx(context.begin(), context.end());
        auto& path = samples[i];
        path.reserve(static_cast<std::size_t>(H));
        for (std::int64_t done = 0; done < H;) {
            const std::int64_t steps = std::min(cfg.patch, H - done);
            const auto preds = f.predict(ctx, steps);
            ++res.invocations;
            for (std::int64_t h = 0; h < steps; ++h) {
                const double v = sample(preds[static_cast<std::size_t>(h)], stream);
                path.push_back(v);
                detail::append_capped(ctx, v, cfg.max_context);
            }
            done += steps;
        }
    }
    for (std::int64_t t = 0; t < H; ++t)
        res.calls_per_step[static_cast<std::size_t>(t)] = cfg.n_trajectories;

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(H));
    std::vector<double> column(n);
    for (std::int64_t t = 0; t < H; ++t) {
        for (std::size_t i = 0; i < n; ++i) column[i] = samples[i][static_cast<std::size_t>(t)];
        std::sort(column.begin(), column.end());
        auto& row = rows[static_cast<std::size_t>(t)];
        row.resize(cfg.levels.size());
        for (std::size_t j = 0; j < cfg.levels.size(); ++j)
            row[j] = empirical_quantile_sorted(column, cfg.levels[j]);
    }
    window.horizon = H;
    res.forecast = QuantileForecast::make(std::move(window), cfg.levels, std::move(rows));
    detail::attach_provenance(res.forecast, cfg, res.invocations);
    return res;
}

// Closed-form h-step law of the AR(1) oracle for every h <= H, bypassing
// patching; the ground-truth reference for the other strategies.
inline RolloutResult rollout_exact(const Forecaster& f, std::span<const double> context,
                                   const RolloutConfig& cfg, ForecastWindow window) {
    if (f.kind() != ForecasterKind::oracle_ar1)
        throw std::invalid_argument("rollout_exact requires the oracle_ar1 forecaster");
    if (cfg.total_horizon < 1) throw DataError("rollout requires H >= 1");
    const auto full = Forecaster::oracle_ar1(f.ar1_alpha(), f.ar1_sigma(), cfg.total_horizon);
    const auto preds = full.predict(context, cfg.total_horizon);
    RolloutResult res;
    res.invocations = 1;
    res.calls_per_step.assign(static_cast<std::size_t>(cfg.total_horizon), 1);
    res.forecast = quantiles_of(preds, cfg.levels, std::move(window));
    detail::attach_provenance(res.forecast, cfg, res.invocations);
    return res;
}

inline RolloutResult rollout(const Forecaster& f, std::span<const double> context,
                             const RolloutConfig& cfg, ForecastWindow window) {
    switch (cfg.strategy) {
        case Strategy::naive: return rollout_naive(f, context, cfg, std::move(window));
        case Strategy::branching: return rollout_branching(f, context, cfg, std::move(window));
        case Strategy::trajectory: return rollout_trajectory(f, context, cfg, std::move(window));
        case Strategy::exact: return rollout_exact(f, context, cfg, std::move(window));
    }
    throw NumericError("rollout: unknown strategy");
}

} // namespace tscal
