#pragma once

#include <optional>

#include "tscal/core.hpp"
#include "tscal/dist.hpp"

namespace tscal {

enum class ForecasterKind { oracle_iid, oracle_ar1, linear_ar, persistence, climatology };

inline const char* to_string(ForecasterKind k) {
    switch (k) {
        case ForecasterKind::oracle_iid: return "oracle_iid";
        case ForecasterKind::oracle_ar1: return "oracle_ar1";
        case ForecasterKind::linear_ar: return "linear_ar";
        case ForecasterKind::persistence: return "persistence";
        case ForecasterKind::climatology: return "climatology";
    }
    return "?";
}

// A fitted model mapping a context window to per-step predictive
// distributions for up to native_horizon() future steps. Immutable once
// constructed; predict is pure.
class Forecaster {
public:
    // Oracles take their true parameters directly.
    static Forecaster oracle_iid(double mu, double sigma, std::int64_t native_horizon) {
        Forecaster f(ForecasterKind::oracle_iid, native_horizon);
        f.mu_ = mu;
        f.sigma_ = std::max(sigma, kScaleFloor);
        return f;
    }

    static Forecaster oracle_ar1(double alpha, double sigma_eps, std::int64_t native_horizon) {
        if (!(std::abs(alpha) < 1.0)) throw DataError("oracle_ar1 requires |alpha| < 1");
        Forecaster f(ForecasterKind::oracle_ar1, native_horizon);
        f.alpha_ = alpha;
        f.sigma_ = std::max(sigma_eps, kScaleFloor);
        return f;
    }

    static Forecaster fit(ForecasterKind kind, const TimeSeries& train, int order,
                          std::int64_t native_horizon,
                          const QuantileLevels& levels = QuantileLevels{}) {
        switch (kind) {
            case ForecasterKind::linear_ar: return fit_linear_ar(train, order, native_horizon);
            case ForecasterKind::climatology: {
                Forecaster f(kind, native_horizon);
                f.marginal_ = piecewise_from_quantiles(
                    levels, empirical_quantiles(train.values, levels));
                return f;
            }
            case ForecasterKind::persistence:
                return Forecaster(kind, native_horizon);  // nothing to fit
            default:
                throw std::invalid_argument("oracle forecasters take parameters directly");
        }
    }

    ForecasterKind kind() const { return kind_; }
    std::int64_t native_horizon() const { return p_; }
    double ar1_alpha() const { return alpha_; }
    double ar1_sigma() const { return sigma_; }
    const std::vector<double>& coefficients() const { return coeffs_; }
    double innovation_sd() const { return sigma_; }

    std::vector<PredictiveDistribution> predict(std::span<const double> context,
                                                std::int64_t steps) const {
        if (steps < 1) throw DataError("predict: steps must be >= 1");
        if (steps > p_)
            throw DataError("predict: steps exceed the native horizon; use a rollout");
        switch (kind_) {
            case ForecasterKind::oracle_iid: {
                std::vector<PredictiveDistribution> out;
                out.reserve(static_cast<std::size_t>(steps));
                for (std::int64_t h = 0; h < steps; ++h)
                    out.push_back(make_gaussian(mu_, sigma_));
                return out;
            }
            case ForecasterKind::oracle_ar1: return predict_ar1(context, steps);
            case ForecasterKind::linear_ar: return predict_linear_ar(context, steps);
            case ForecasterKind::persistence: return predict_persistence(context, steps);
            case ForecasterKind::climatology: {
                std::vector<PredictiveDistribution> out(static_cast<std::size_t>(steps),
                                                        *marginal_);
                return out;
            }
        }
        throw NumericError("predict: unknown forecaster kind");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["kind"] = to_string(kind_);
        j["native_horizon"] = p_;
        switch (kind_) {
            case ForecasterKind::oracle_iid:
                j["mu"] = mu_;
                j["sigma"] = sigma_;
                break;
            case ForecasterKind::oracle_ar1:
                j["alpha"] = alpha_;
                j["sigma_eps"] = sigma_;
                break;
            case ForecasterKind::linear_ar:
                j["coefficients"] = coeffs_;  // intercept first
                j["innovation_sd"] = sigma_;
                break;
            case ForecasterKind::climatology: j["marginal"] = dist_to_json(*marginal_); break;
            case ForecasterKind::persistence: break;
        }
        return j;
    }

private:
    Forecaster(ForecasterKind kind, std::int64_t native_horizon) : kind_(kind), p_(native_horizon) {
        if (p_ < 1) throw DataError("native horizon must be >= 1");
    }

    static Forecaster fit_linear_ar(const TimeSeries& train, int order,
                                    std::int64_t native_horizon) {
        if (order < 1) throw DataError("linear_ar order must be >= 1");
        const auto& y = train.values;
        const auto n = static_cast<std::int64_t>(y.size());
        if (n <= order + 2)
            throw DataError("series '" + train.id + "' too short to fit linear_ar(" +
                            std::to_string(order) + ")");
        // least squares on lagged values plus intercept, via normal equations
        const int k = order + 1;
        std::vector<double> xtx(static_cast<std::size_t>(k * k), 0.0);
        std::vector<double> xty(static_cast<std::size_t>(k), 0.0);
        std::vector<double> row(static_cast<std::size_t>(k));
        for (std::int64_t t = order; t < n; ++t) {
            row[0] = 1.0;
            for (int i = 1; i <= order; ++i)
                row[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(t - i)];
            for (int a = 0; a < k; ++a) {
                for (int b = 0; b < k; ++b)
                    xtx[static_cast<std::size_t>(a * k + b)] +=
                        row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)];
                xty[static_cast<std::size_t>(a)] +=
                    row[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(t)];
            }
        }
        auto beta = solve_spd(xtx, xty, k, train.id);

        double ssr = 0.0;
        std::int64_t rows = 0;
        for (std::int64_t t = order; t < n; ++t) {
            double pred = beta[0];
            for (int i = 1; i <= order; ++i)
                pred += beta[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(t - i)];
            const double e = y[static_cast<std::size_t>(t)] - pred;
            ssr += e * e;
            ++rows;
        }
        Forecaster f(ForecasterKind::linear_ar, native_horizon);
        f.order_ = order;
        f.coeffs_ = std::move(beta);
        f.sigma_ = std::max(std::sqrt(ssr / static_cast<double>(rows - k)), kScaleFloor);
        return f;
    }

    // Gaussian elimination with partial pivoting; pivots are judged relative
    // to the design scale, so a singular design (constant series) is caught
    // whatever the value units.
    static std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, int k,
                                         const std::string& id) {
        double scale = 0.0;
        for (int i = 0; i < k; ++i)
            scale = std::max(scale, std::abs(a[static_cast<std::size_t>(i * k + i)]));
        const double pivot_tol = std::max(scale, 1.0) * 1e-12;
        for (int col = 0; col < k; ++col) {
            int piv = col;
            for (int r = col + 1; r < k; ++r)
                if (std::abs(a[static_cast<std::size_t>(r * k + col)]) >
                    std::abs(a[static_cast<std::size_t>(piv * k + col)]))
                    piv = r;
            if (std::abs(a[static_cast<std::size_t>(piv * k + col)]) < pivot_tol)
                throw DataError("singular design fitting linear_ar on series '" + id +
                                "' (constant series?)");
            if (piv != col) {
                for (int c = 0; c < k; ++c)
                    std::swap(a[static_cast<std::size_t>(col * k + c)],
                              a[static_cast<std::size_t>(piv * k + c)]);
                std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(piv)]);
            }
            const double d = a[static_cast<std::size_t>(col * k + col)];
            for (int r = col + 1; r < k; ++r) {
                const double m = a[static_cast<std::size_t>(r * k + col)] / d;
                if (m == 0.0) continue;
                for (int c = col; c < k; ++c)
                    a[static_cast<std::size_t>(r * k + c)] -=
                        m * a[static_cast<std::size_t>(col * k + c)];
                b[static_cast<std::size_t>(r)] -= m * b[static_cast<std::size_t>(col)];
            }
        }
        std::vector<double> x(static_cast<std::size_t>(k));
        for (int r = k - 1; r >= 0; --r) {
            double s = b[static_cast<std::size_t>(r)];
            for (int c = r + 1; c < k; ++c)
                s -= a[static_cast<std::size_t>(r * k + c)] * x[static_cast<std::size_t>(c)];
            x[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r * k + r)];
        }
        return x;
    }

    // Exact h-step law of the AR(1) oracle: mean alpha^h * y_T, variance
    // sigma^2 * (1 - alpha^(2h)) / (1 - alpha^2).
    std::vector<PredictiveDistribution> predict_ar1(std::span<const double> context,
                                                    std::int64_t steps) const {
        if (context.empty()) throw DataError("predict: empty context");
        const double y_last = context.back();
        std::vector<PredictiveDistribution> out;
        out.reserve(static_cast<std::size_t>(steps));
        double mean = y_last;
        double var_sum = 0.0;  // sum of alpha^(2j), j < h
        double pow2 = 1.0;
        for (std::int64_t h = 1; h <= steps; ++h) {
            mean *= alpha_;
            var_sum += pow2;
            pow2 *= alpha_ * alpha_;
            out.push_back(make_gaussian(mean, sigma_ * std::sqrt(var_sum)));
        }
        return out;
    }

    // Mean by coefficient recursion on plugged-in means; variance by the
    // impulse-response recursion Var_h = sigma^2 * sum_{j<h} psi_j^2.
    std::vector<PredictiveDistribution> predict_linear_ar(std::span<const double> context,
                                                          std::int64_t steps) const {
        const int k = order_;
        if (static_cast<std::int64_t>(context.size()) < k)
            throw DataError("predict: context shorter than the model order");
        std::vector<double> path(context.end() - k, context.end());
        std::vector<double> psi{1.0};
        double var = 0.0;
        std::vector<PredictiveDistribution> out;
        out.reserve(static_cast<std::size_t>(steps));
        for (std::int64_t h = 1; h <= steps; ++h) {
            double mean = coeffs_[0];
            for (int i = 1; i <= k; ++i)
                mean += coeffs_[static_cast<std::size_t>(i)] * path[path.size() - static_cast<std::size_t>(i)];
            path.push_back(mean);
            var += psi.back() * psi.back();
            out.push_back(make_gaussian(mean, sigma_ * std::sqrt(var)));
            double next_psi = 0.0;
            for (int i = 1; i <= std::min<int>(k, static_cast<int>(psi.size())); ++i)
                next_psi += coeffs_[static_cast<std::size_t>(i)] * psi[psi.size() - static_cast<std::size_t>(i)];
            psi.push_back(next_psi);
        }
        return out;
    }

    // Point mass at the last observation widened by the one-step naive
    // residual scale of the context.
    std::vector<PredictiveDistribution> predict_persistence(std::span<const double> context,
                                                            std::int64_t steps) const {
        if (context.empty()) throw DataError("predict: empty context");
        double ss = 0.0;
        for (std::size_t i = 1; i < context.size(); ++i) {
            const double d = context[i] - context[i - 1];
            ss += d * d;
        }
        const double sd = context.size() > 1
                              ? std::sqrt(ss / static_cast<double>(context.size() - 1))
                              : 0.0;
        std::vector<PredictiveDistribution> out(
            static_cast<std::size_t>(steps), make_gaussian(context.back(), sd));
        return out;
    }

    ForecasterKind kind_;
    std::int64_t p_;
    int order_ = 1;
    double alpha_ = 0.0;
    double sigma_ = 1.0;
    double mu_ = 0.0;
    std::vector<double> coeffs_;  // intercept first
    std::optional<PredictiveDistribution> marginal_;
};

// Per-step inverse CDF at each level; rows are monotone by construction.
inline QuantileForecast quantiles_of(std::span<const PredictiveDistribution> predictions,
                                     const QuantileLevels& levels, ForecastWindow window) {
    if (predictions.empty()) throw DataError("quantiles_of: no predictions");
    std::vector<std::vector<double>> rows;
    rows.reserve(predictions.size());
    for (const auto& d : predictions) {
        std::vector<double> row(levels.size());
        for (std::size_t j = 0; j < levels.size(); ++j) row[j] = icdf(d, levels[j]);
        rows.push_back(std::move(row));
    }
    window.horizon = static_cast<std::int64_t>(predictions.size());
    return QuantileForecast::make(std::move(window), levels, std::move(rows));
}

} // namespace tscal
