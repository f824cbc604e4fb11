#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tscal {

// Bad input data: files, schemas, series that violate invariants.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal numeric failure: divergence, singular systems, non-finite results.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A metric whose defining denominator is zero for this window. Callers record
// the metric as missing; it is never coerced to 0 or infinity.
struct UndefinedMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kLevelTol = 1e-9;

inline bool near_level(double a, double b) { return std::abs(a - b) <= kLevelTol; }

namespace detail {

inline bool parse_int64(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    std::int64_t v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = (s[0] == '-') ? -v : v;
    return true;
}

// Integer timestamps order numerically; anything else (ISO-8601 in
// particular) orders lexicographically.
inline bool timestamp_less(const std::string& a, const std::string& b) {
    std::int64_t ia = 0, ib = 0;
    if (parse_int64(a, ia) && parse_int64(b, ib)) return ia < ib;
    return a < b;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

struct TimeSeries {
    std::string id;
    std::vector<double> values;
    std::int64_t start_index = 0;
    std::string granularity;                  // optional label, empty = unset
    std::vector<std::string> timestamps;      // optional, length-matched when present

    std::int64_t length() const { return static_cast<std::int64_t>(values.size()); }

    void validate() const {
        if (values.empty())
            throw DataError("series '" + id + "' is empty");
        for (double v : values)
            if (!std::isfinite(v))
                throw DataError("series '" + id + "' contains a non-finite value");
        if (!timestamps.empty()) {
            if (timestamps.size() != values.size())
                throw DataError("series '" + id + "': timestamp count does not match values");
            for (std::size_t i = 1; i < timestamps.size(); ++i)
                if (!detail::timestamp_less(timestamps[i - 1], timestamps[i]))
                    throw DataError("series '" + id + "': timestamps are not strictly increasing");
        }
    }
};

// ---------------------------------------------------------------------------
// Level grids
// ---------------------------------------------------------------------------

// Sorted quantile levels in the open interval (0,1). Default grid is
// {0.1, 0.2, ..., 0.9}.
class QuantileLevels {
public:
    QuantileLevels() : levels_{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9} {}

    explicit QuantileLevels(std::vector<double> levels) : levels_(std::move(levels)) {
        if (levels_.empty())
            throw DataError("quantile level grid is empty");
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            if (!(levels_[i] > 0.0 && levels_[i] < 1.0))
                throw DataError("quantile level outside (0,1)");
            if (i > 0 && !(levels_[i] > levels_[i - 1] + kLevelTol))
                throw DataError("quantile levels must be strictly increasing");
        }
    }

    std::size_t size() const { return levels_.size(); }
    double operator[](std::size_t i) const { return levels_[i]; }
    const std::vector<double>& levels() const { return levels_; }

    bool contains(double level) const {
        for (double q : levels_)
            if (near_level(q, level)) return true;
        return false;
    }

    // Index of a level, matched within kLevelTol.
    std::size_t index_of(double level) const {
        for (std::size_t i = 0; i < levels_.size(); ++i)
            if (near_level(levels_[i], level)) return i;
        throw DataError("quantile level " + std::to_string(level) + " not in grid");
    }

    bool operator==(const QuantileLevels& o) const {
        if (levels_.size() != o.levels_.size()) return false;
        for (std::size_t i = 0; i < levels_.size(); ++i)
            if (!near_level(levels_[i], o.levels_[i])) return false;
        return true;
    }

private:
    std::vector<double> levels_;
};

// Central-interval confidences s; each implies the pair of quantile levels
// q_low = (1-s)/2 and q_high = (1+s)/2. Default is {0.2, 0.4, 0.6, 0.8}.
class ConfidenceLevels {
public:
    ConfidenceLevels() : levels_{0.2, 0.4, 0.6, 0.8} {}

    explicit ConfidenceLevels(std::vector<double> levels) : levels_(std::move(levels)) {
        if (levels_.empty())
            throw DataError("confidence level set is empty");
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            if (!(levels_[i] > 0.0 && levels_[i] < 1.0))
                throw DataError("confidence level outside (0,1)");
            if (i > 0 && !(levels_[i] > levels_[i - 1] + kLevelTol))
                throw DataError("confidence levels must be strictly increasing");
        }
    }

    std::size_t size() const { return levels_.size(); }
    double operator[](std::size_t i) const { return levels_[i]; }
    const std::vector<double>& levels() const { return levels_; }

    static double q_low(double s) { return (1.0 - s) / 2.0; }
    static double q_high(double s) { return (1.0 + s) / 2.0; }

    // Every implied bound must be a member of the active quantile grid.
    void validate_against(const QuantileLevels& q) const {
        for (double s : levels_) {
            if (!q.contains(q_low(s)) || !q.contains(q_high(s)))
                throw DataError("confidence " + std::to_string(s) +
                                " implies quantile levels missing from the grid");
        }
    }

private:
    std::vector<double> levels_;
};

// ---------------------------------------------------------------------------
// Forecast windows
// ---------------------------------------------------------------------------

// One forecast task: origin is the index of the last context observation,
// targets are the `horizon` values after it.
struct ForecastWindow {
    std::string series_id;
    std::int64_t origin = 0;
    std::int64_t context_len = 1;
    std::int64_t horizon = 1;
};

// Per-step predicted quantiles at a fixed level grid, rows monotone after
// construction (crossing rows are sorted and flagged).
struct QuantileForecast {
    ForecastWindow window;
    QuantileLevels levels;
    std::vector<std::vector<double>> values;  // horizon rows x |levels| columns
    bool crossing_repaired = false;
    std::map<std::string, std::string> extra;  // provenance carried into forecast files

    std::int64_t horizon() const { return static_cast<std::int64_t>(values.size()); }

    static QuantileForecast make(ForecastWindow window, QuantileLevels levels,
                                 std::vector<std::vector<double>> rows) {
        if (rows.empty()) throw DataError("forecast has no rows");
        QuantileForecast f;
        f.window = std::move(window);
        f.window.horizon = static_cast<std::int64_t>(rows.size());
        f.levels = std::move(levels);
        f.values = std::move(rows);
        for (auto& row : f.values) {
            if (row.size() != f.levels.size())
                throw DataError("forecast row width does not match level grid");
            for (double v : row)
                if (!std::isfinite(v))
                    throw DataError("forecast contains a non-finite value");
            if (!std::is_sorted(row.begin(), row.end())) {
                std::sort(row.begin(), row.end());
                f.crossing_repaired = true;
            }
        }
        return f;
    }

    const std::vector<double>& row(std::int64_t t) const {
        return values.at(static_cast<std::size_t>(t));
    }
};

// ---------------------------------------------------------------------------
// Empirical quantiles
// ---------------------------------------------------------------------------

// Linear-interpolation quantile on order statistics with plotting position
// h = (n-1)p: exact at order statistics, p=0 gives the minimum, p=1 the
// maximum.
inline double empirical_quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty())
        throw DataError("empirical quantile of empty data");
    if (!(p >= 0.0 && p <= 1.0))
        throw DataError("quantile probability outside [0,1]");
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double empirical_quantile(std::span<const double> data, double p) {
    std::vector<double> sorted(data.begin(), data.end());
    for (double v : sorted)
        if (std::isnan(v)) throw DataError("empirical quantile of data containing NaN");
    std::sort(sorted.begin(), sorted.end());
    return empirical_quantile_sorted(sorted, p);
}

inline std::vector<double> empirical_quantiles(std::span<const double> data,
                                               const QuantileLevels& levels) {
    std::vector<double> sorted(data.begin(), data.end());
    for (double v : sorted)
        if (std::isnan(v)) throw DataError("empirical quantile of data containing NaN");
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i)
        out[i] = empirical_quantile_sorted(sorted, levels[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Rolling forecast origins
// ---------------------------------------------------------------------------

// Rolling-origin protocol: the first origin sits just before the train/test
// split, each later origin advances by `stride`, and windows whose targets
// would overrun the series are excluded. Targets never precede split_index.
inline std::vector<ForecastWindow> rolling_windows(const TimeSeries& series,
                                                   std::int64_t split_index,
                                                   std::int64_t context_len,
                                                   std::int64_t horizon,
                                                   std::int64_t stride) {
    if (stride < 1) throw DataError("stride must be >= 1");
    if (horizon < 1) throw DataError("horizon must be >= 1");
    if (context_len < 1) throw DataError("context length must be >= 1");
    const std::int64_t n = series.length();
    if (split_index < context_len || split_index + horizon > n)
        throw DataError("series '" + series.id +
                        "' too short for one window: need context " +
                        std::to_string(context_len) + " before index " +
                        std::to_string(split_index) + " and horizon " +
                        std::to_string(horizon) + " after it");
    std::vector<ForecastWindow> windows;
    for (std::int64_t origin = split_index - 1; origin + horizon <= n - 1; origin += stride)
        windows.push_back(ForecastWindow{series.id, origin, context_len, horizon});
    return windows;
}

// Target slice of a window within its series.
inline std::span<const double> window_targets(const TimeSeries& series,
                                              const ForecastWindow& w) {
    if (w.origin < 0 || w.horizon < 1 || w.origin + w.horizon > series.length() - 1)
        throw DataError("window targets outside series '" + series.id + "'");
    const auto begin = static_cast<std::size_t>(w.origin + 1);
    return std::span<const double>(series.values).subspan(begin,
                                                          static_cast<std::size_t>(w.horizon));
}

inline std::span<const double> window_context(const TimeSeries& series,
                                              const ForecastWindow& w) {
    if (w.context_len < 1 || w.origin - w.context_len + 1 < 0 || w.origin >= series.length())
        throw DataError("window context outside series '" + series.id + "'");
    const auto begin = static_cast<std::size_t>(w.origin - w.context_len + 1);
    return std::span<const double>(series.values).subspan(begin,
                                                          static_cast<std::size_t>(w.context_len));
}

} // namespace tscal
