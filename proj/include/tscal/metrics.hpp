#pragma once

#include <map>
#include <optional>

#include "tscal/core.hpp"
#include "tscal/io.hpp"

namespace tscal {

// ---------------------------------------------------------------------------
// Per-window metrics
// ---------------------------------------------------------------------------

// Fraction of targets at or below the predicted quantile, one entry per level.
inline std::vector<double> below_fractions(const QuantileForecast& f,
                                           std::span<const double> targets,
                                           const QuantileLevels& levels) {
    const auto H = static_cast<std::size_t>(f.horizon());
    if (targets.size() != H)
        throw DataError("targets length does not match forecast horizon");
    std::vector<double> out(levels.size(), 0.0);
    for (std::size_t j = 0; j < levels.size(); ++j) {
        const std::size_t col = f.levels.index_of(levels[j]);
        std::size_t count = 0;
        for (std::size_t t = 0; t < H; ++t)
            if (targets[t] <= f.values[t][col]) ++count;
        out[j] = static_cast<double>(count) / static_cast<double>(H);
    }
    return out;
}

// Probabilistic calibration error: mean absolute gap between each nominal
// level and the empirical fraction of targets below its predicted quantile.
inline double pce(const QuantileForecast& f, std::span<const double> targets,
                  const QuantileLevels& levels) {
    const auto frac = below_fractions(f, targets, levels);
    double acc = 0.0;
    for (std::size_t j = 0; j < levels.size(); ++j) acc += std::abs(levels[j] - frac[j]);
    return acc / static_cast<double>(levels.size());
}

// Fraction of targets inside the central interval implied by each confidence,
// closed on both ends.
inline std::vector<double> coverage_fractions(const QuantileForecast& f,
                                              std::span<const double> targets,
                                              const ConfidenceLevels& conf) {
    const auto H = static_cast<std::size_t>(f.horizon());
    if (targets.size() != H)
        throw DataError("targets length does not match forecast horizon");
    std::vector<double> out(conf.size(), 0.0);
    for (std::size_t k = 0; k < conf.size(); ++k) {
        const std::size_t lo = f.levels.index_of(ConfidenceLevels::q_low(conf[k]));
        const std::size_t hi = f.levels.index_of(ConfidenceLevels::q_high(conf[k]));
        std::size_t count = 0;
        for (std::size_t t = 0; t < H; ++t)
            if (f.values[t][lo] <= targets[t] && targets[t] <= f.values[t][hi]) ++count;
        out[k] = static_cast<double>(count) / static_cast<double>(H);
    }
    return out;
}

// Centered calibration error: positive means overconfident (intervals miss
// more than nominal), negative means under-confident.
inline double cce(const QuantileForecast& f, std::span<const double> targets,
                  const ConfidenceLevels& conf) {
    const auto cov = coverage_fractions(f, targets, conf);
    double acc = 0.0;
    for (std::size_t k = 0; k < conf.size(); ++k) acc += conf[k] - cov[k];
    return acc / static_cast<double>(conf.size());
}

// Scaled interval width: predicted central-interval width relative to the
// quantile spread of the realized targets of the same window.
inline double siw(const QuantileForecast& f, std::span<const double> targets,
                  const ConfidenceLevels& conf) {
    const auto H = static_cast<std::size_t>(f.horizon());
    if (targets.size() != H)
        throw DataError("targets length does not match forecast horizon");
    std::vector<double> sorted(targets.begin(), targets.end());
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (std::size_t k = 0; k < conf.size(); ++k) {
        const double ql = ConfidenceLevels::q_low(conf[k]);
        const double qh = ConfidenceLevels::q_high(conf[k]);
        const double denom =
            empirical_quantile_sorted(sorted, qh) - empirical_quantile_sorted(sorted, ql);
        if (!(denom > 0.0))
            throw UndefinedMetricError("siw: zero quantile spread in target window");
        const std::size_t lo = f.levels.index_of(ql);
        const std::size_t hi = f.levels.index_of(qh);
        double width = 0.0;
        for (std::size_t t = 0; t < H; ++t) width += f.values[t][hi] - f.values[t][lo];
        acc += width / static_cast<double>(H) / denom;
    }
    return acc / static_cast<double>(conf.size());
}

// Mean absolute scaled error of the median forecast. The naive denominator
// runs over the target window itself, so it uses future information for
// multi-step windows.
inline double mase(std::span<const double> median, std::span<const double> targets) {
    if (median.size() != targets.size())
        throw DataError("median length does not match targets");
    const std::size_t H = targets.size();
    if (H < 2) throw DataError("mase requires a horizon of at least 2");
    double num = 0.0;
    for (std::size_t t = 0; t < H; ++t) num += std::abs(median[t] - targets[t]);
    num /= static_cast<double>(H);
    double den = 0.0;
    for (std::size_t t = 1; t < H; ++t) den += std::abs(targets[t] - targets[t - 1]);
    den /= static_cast<double>(H - 1);
    if (!(den > 0.0)) throw UndefinedMetricError("mase: constant target window");
    return num / den;
}

// Pinball loss with the factor-2 convention.
inline double pinball(double y, double y_hat, double q) {
    return y_hat >= y ? 2.0 * (1.0 - q) * (y_hat - y) : 2.0 * q * (y - y_hat);
}

// Weighted quantile loss: summed pinball loss over the grid scaled by the
// absolute sum of the targets.
inline double wql(const QuantileForecast& f, std::span<const double> targets,
                  const QuantileLevels& levels) {
    const auto H = static_cast<std::size_t>(f.horizon());
    if (targets.size() != H)
        throw DataError("targets length does not match forecast horizon");
    double scale = 0.0;
    for (double y : targets) scale += std::abs(y);
    if (!(scale > 0.0)) throw UndefinedMetricError("wql: all-zero targets");
    double acc = 0.0;
    for (std::size_t j = 0; j < levels.size(); ++j) {
        const std::size_t col = f.levels.index_of(levels[j]);
        for (std::size_t t = 0; t < H; ++t)
            acc += pinball(targets[t], f.values[t][col], levels[j]);
    }
    return acc / scale;
}

// Mean scaled interval score at confidence s: interval width plus 2/(1-s)
// penalties outside the bounds, scaled by the same naive MAE as mase.
inline double msis(const QuantileForecast& f, std::span<const double> targets,
                   double s = 0.8) {
    const auto H = static_cast<std::size_t>(f.horizon());
    if (targets.size() != H)
        throw DataError("targets length does not match forecast horizon");
    if (H < 2) throw DataError("msis requires a horizon of at least 2");
    const std::size_t lo = f.levels.index_of(ConfidenceLevels::q_low(s));
    const std::size_t hi = f.levels.index_of(ConfidenceLevels::q_high(s));
    double den = 0.0;
    for (std::size_t t = 1; t < H; ++t) den += std::abs(targets[t] - targets[t - 1]);
    den /= static_cast<double>(H - 1);
    if (!(den > 0.0)) throw UndefinedMetricError("msis: constant target window");
    const double penalty = 2.0 / (1.0 - s);
    double acc = 0.0;
    for (std::size_t t = 0; t < H; ++t) {
        const double L = f.values[t][lo];
        const double U = f.values[t][hi];
        acc += U - L;
        if (targets[t] < L) acc += penalty * (L - targets[t]);
        if (targets[t] > U) acc += penalty * (targets[t] - U);
    }
    return acc / static_cast<double>(H) / den;
}

// Tail calibration: pce restricted to the 0.1/0.9 levels and cce restricted
// to the 0.8 interval.
inline std::pair<double, double> tailed(const QuantileForecast& f,
                                        std::span<const double> targets) {
    const double tpce = pce(f, targets, QuantileLevels({0.1, 0.9}));
    const double tcce = cce(f, targets, ConfidenceLevels({0.8}));
    return {tpce, tcce};
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct MetricValues {
    std::optional<double> pce, cce, siw, mase, wql, msis, tpce, tcce;
};

struct MetricRecord {
    std::string dataset;
    std::string model;
    std::string series_id;
    std::int64_t origin = 0;
    bool crossing_repaired = false;
    MetricValues m;
    // per-level sufficient statistics; series-level calibration pools these
    std::vector<double> below_frac;  // |Q|
    std::vector<double> cover_frac;  // |S|
};

inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"mase", "pce",  "cce",  "siw",
                                                "wql",  "msis", "tpce", "tcce"};
    return names;
}

inline std::optional<double> metric_value(const MetricValues& m, const std::string& name) {
    if (name == "pce") return m.pce;
    if (name == "cce") return m.cce;
    if (name == "siw") return m.siw;
    if (name == "mase") return m.mase;
    if (name == "wql") return m.wql;
    if (name == "msis") return m.msis;
    if (name == "tpce") return m.tpce;
    if (name == "tcce") return m.tcce;
    throw DataError("unknown metric '" + name + "'");
}

// Scores one forecast window against its realized targets. Metrics whose
// denominator is undefined for this window are left missing; structural
// problems (missing levels, length mismatches) still throw.
inline MetricRecord score_window(std::string dataset, std::string model,
                                 const QuantileForecast& f, std::span<const double> targets,
                                 const QuantileLevels& levels, const ConfidenceLevels& conf,
                                 double msis_s = 0.8) {
    MetricRecord r;
    r.dataset = std::move(dataset);
    r.model = std::move(model);
    r.series_id = f.window.series_id;
    r.origin = f.window.origin;
    r.crossing_repaired = f.crossing_repaired;
    r.below_frac = below_fractions(f, targets, levels);
    r.cover_frac = coverage_fractions(f, targets, conf);

    double acc = 0.0;
    for (std::size_t j = 0; j < levels.size(); ++j)
        acc += std::abs(levels[j] - r.below_frac[j]);
    r.m.pce = acc / static_cast<double>(levels.size());
    acc = 0.0;
    for (std::size_t k = 0; k < conf.size(); ++k) acc += conf[k] - r.cover_frac[k];
    r.m.cce = acc / static_cast<double>(conf.size());

    try {
        r.m.siw = siw(f, targets, conf);
    } catch (const UndefinedMetricError&) {
    }
    try {
        r.m.wql = wql(f, targets, levels);
    } catch (const UndefinedMetricError&) {
    }
    if (targets.size() >= 2) {
        const std::size_t med = f.levels.index_of(0.5);
        std::vector<double> median(targets.size());
        for (std::size_t t = 0; t < targets.size(); ++t) median[t] = f.values[t][med];
        try {
            r.m.mase = mase(median, targets);
        } catch (const UndefinedMetricError&) {
        }
        try {
            r.m.msis = msis(f, targets, msis_s);
        } catch (const UndefinedMetricError&) {
        }
    }
    if (f.levels.contains(0.1) && f.levels.contains(0.9)) {
        auto [tp, tc] = tailed(f, targets);
        r.m.tpce = tp;
        r.m.tcce = tc;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct MetricStat {
    double mean = 0.0;
    double sem = 0.0;
    std::int64_t n_series = 0;
    std::int64_t excluded_windows = 0;  // undefined entries dropped
    std::int64_t excluded_series = 0;   // series with no defined window
};

struct AggregateReport {
    std::string dataset;
    std::string model;
    std::int64_t n_series = 0;
    std::int64_t n_windows = 0;
    std::map<std::string, MetricStat> metrics;  // keyed by metric_names()
};

namespace detail {

struct MeanSem {
    double mean = 0.0, sem = 0.0;
};

inline MeanSem mean_sem(const std::vector<double>& xs) {
    MeanSem r;
    const auto n = static_cast<double>(xs.size());
    for (double x : xs) r.mean += x;
    r.mean /= n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return r;
}

} // namespace detail

// Aggregates records per (dataset, model): windows are reduced to one value
// per series first, then the cross-series mean and standard error of the
// mean are reported. Calibration metrics (pce, cce, tpce, tcce) pool the
// per-window indicator fractions across a series' windows before applying
// the outer formula; the remaining metrics average per-window values.
// Undefined entries are excluded and counted.
inline std::vector<AggregateReport> aggregate(std::span<const MetricRecord> records,
                                              const QuantileLevels& levels,
                                              const ConfidenceLevels& conf,
                                              bool by_dataset = true, bool by_model = true) {
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::vector<const MetricRecord*>>>
        groups;
    for (const auto& r : records) {
        const std::pair<std::string, std::string> key{by_dataset ? r.dataset : "",
                                                      by_model ? r.model : ""};
        groups[key][r.series_id].push_back(&r);
    }

    std::vector<AggregateReport> out;
    for (auto& [key, series_map] : groups) {
        AggregateReport rep;
        rep.dataset = key.first;
        rep.model = key.second;
        rep.n_series = static_cast<std::int64_t>(series_map.size());

        std::map<std::string, std::vector<double>> series_values;
        std::map<std::string, std::int64_t> excluded_windows, excluded_series;
        for (const auto& name : metric_names()) {
            excluded_windows[name] = 0;
            excluded_series[name] = 0;
        }

        for (auto& [sid, recs] : series_map) {
            rep.n_windows += static_cast<std::int64_t>(recs.size());

            // pooled calibration fractions
            std::vector<double> fbar(levels.size(), 0.0), cbar(conf.size(), 0.0);
            std::size_t n_frac = 0;
            for (const auto* r : recs) {
                if (r->below_frac.size() != levels.size() ||
                    r->cover_frac.size() != conf.size())
                    throw DataError("record level grid does not match aggregation grid");
                for (std::size_t j = 0; j < levels.size(); ++j) fbar[j] += r->below_frac[j];
                for (std::size_t k = 0; k < conf.size(); ++k) cbar[k] += r->cover_frac[k];
                ++n_frac;
            }
            for (auto& v : fbar) v /= static_cast<double>(n_frac);
            for (auto& v : cbar) v /= static_cast<double>(n_frac);

            double acc = 0.0;
            for (std::size_t j = 0; j < levels.size(); ++j)
                acc += std::abs(levels[j] - fbar[j]);
            series_values["pce"].push_back(acc / static_cast<double>(levels.size()));
            acc = 0.0;
            for (std::size_t k = 0; k < conf.size(); ++k) acc += conf[k] - cbar[k];
            series_values["cce"].push_back(acc / static_cast<double>(conf.size()));
            if (levels.contains(0.1) && levels.contains(0.9)) {
                const double f10 = fbar[levels.index_of(0.1)];
                const double f90 = fbar[levels.index_of(0.9)];
                series_values["tpce"].push_back(0.5 *
                                                (std::abs(0.1 - f10) + std::abs(0.9 - f90)));
            }
            for (std::size_t k = 0; k < conf.size(); ++k)
                if (near_level(conf[k], 0.8)) series_values["tcce"].push_back(0.8 - cbar[k]);

            // windowwise metrics
            for (const auto& name : {std::string("siw"), std::string("mase"),
                                     std::string("wql"), std::string("msis")}) {
                std::vector<double> vals;
                for (const auto* r : recs) {
                    const auto v = metric_value(r->m, name);
                    if (v) vals.push_back(*v);
                    else ++excluded_windows[name];
                }
                if (vals.empty()) ++excluded_series[name];
                else
                    series_values[name].push_back(
                        std::accumulate(vals.begin(), vals.end(), 0.0) /
                        static_cast<double>(vals.size()));
            }
        }

        for (const auto& name : metric_names()) {
            auto it = series_values.find(name);
            if (it == series_values.end() || it->second.empty()) {
                if (excluded_series[name] > 0 || excluded_windows[name] > 0) {
                    MetricStat st;
                    st.excluded_windows = excluded_windows[name];
                    st.excluded_series = excluded_series[name];
                    st.n_series = 0;
                    rep.metrics[name] = st;
                }
                continue;
            }
            const auto ms = detail::mean_sem(it->second);
            MetricStat st;
            st.mean = ms.mean;
            st.sem = ms.sem;
            st.n_series = static_cast<std::int64_t>(it->second.size());
            st.excluded_windows = excluded_windows[name];
            st.excluded_series = excluded_series[name];
            rep.metrics[name] = st;
        }
        out.push_back(std::move(rep));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV serialization (fixed column order, see header row)
// ---------------------------------------------------------------------------

inline void write_records_csv(const std::filesystem::path& path,
                              std::span<const MetricRecord> records,
                              const QuantileLevels& levels, const ConfidenceLevels& conf) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "dataset,model,series_id,origin,crossing_repaired";
    for (const auto& name : metric_names()) out << ',' << name;
    for (std::size_t j = 0; j < levels.size(); ++j) out << ",below_" << format_double(levels[j]);
    for (std::size_t k = 0; k < conf.size(); ++k) out << ",cover_" << format_double(conf[k]);
    out << '\n';
    for (const auto& r : records) {
        if (r.below_frac.size() != levels.size() || r.cover_frac.size() != conf.size())
            throw DataError("record level grid does not match the file header");
        out << r.dataset << ',' << r.model << ',' << r.series_id << ',' << r.origin << ','
            << (r.crossing_repaired ? 1 : 0);
        for (const auto& name : metric_names()) {
            const auto v = metric_value(r.m, name);
            out << ',';
            if (v) out << format_double(*v);
        }
        for (double v : r.below_frac) out << ',' << format_double(v);
        for (double v : r.cover_frac) out << ',' << format_double(v);
        out << '\n';
    }
}

struct RecordsFile {
    std::vector<MetricRecord> records;
    QuantileLevels levels;
    ConfidenceLevels confidences;
};

inline RecordsFile read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    const auto header = detail::split_csv_line(line);
    std::vector<double> levels, confs;
    std::vector<std::size_t> below_ix, cover_ix;
    for (std::size_t i = 0; i < header.size(); ++i) {
        bool ok = false;
        if (header[i].rfind("below_", 0) == 0) {
            levels.push_back(parse_double(header[i].substr(6), ok));
            below_ix.push_back(i);
        } else if (header[i].rfind("cover_", 0) == 0) {
            confs.push_back(parse_double(header[i].substr(6), ok));
            cover_ix.push_back(i);
        }
    }
    auto col = [&](const std::string& name) {
        return detail::find_column(header, name, path.string());
    };
    const std::size_t ds_ix = col("dataset"), mdl_ix = col("model"), sid_ix = col("series_id"),
                      org_ix = col("origin"), rep_ix = col("crossing_repaired");
    std::map<std::string, std::size_t> metric_ix;
    for (const auto& name : metric_names()) metric_ix[name] = col(name);

    RecordsFile out{{}, QuantileLevels(levels), ConfidenceLevels(confs)};
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row_no) + " of " + path.string() +
                            " has wrong column count");
        MetricRecord r;
        r.dataset = fields[ds_ix];
        r.model = fields[mdl_ix];
        r.series_id = fields[sid_ix];
        bool ok = false;
        r.origin = static_cast<std::int64_t>(parse_double(fields[org_ix], ok));
        r.crossing_repaired = fields[rep_ix] == "1";
        auto set = [&](const std::string& name, std::optional<double>& slot) {
            const auto& cell = fields[metric_ix[name]];
            if (cell.empty()) return;
            bool k = false;
            const double v = parse_double(cell, k);
            if (!k) throw DataError("bad numeric cell at row " + std::to_string(row_no));
            slot = v;
        };
        set("pce", r.m.pce);
        set("cce", r.m.cce);
        set("siw", r.m.siw);
        set("mase", r.m.mase);
        set("wql", r.m.wql);
        set("msis", r.m.msis);
        set("tpce", r.m.tpce);
        set("tcce", r.m.tcce);
        for (std::size_t j : below_ix) {
            bool k = false;
            const double v = parse_double(fields[j], k);
            if (!k) throw DataError("bad fraction cell at row " + std::to_string(row_no));
            r.below_frac.push_back(v);
        }
        for (std::size_t j : cover_ix) {
            bool k = false;
            const double v = parse_double(fields[j], k);
            if (!k) throw DataError("bad coverage cell at row " + std::to_string(row_no));
            r.cover_frac.push_back(v);
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

inline void write_aggregates_csv(const std::filesystem::path& path,
                                 std::span<const AggregateReport> reports) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "dataset,model,metric,mean,sem,n_series,excluded_windows,excluded_series\n";
    for (const auto& rep : reports) {
        for (const auto& name : metric_names()) {
            auto it = rep.metrics.find(name);
            if (it == rep.metrics.end()) continue;
            const auto& st = it->second;
            out << rep.dataset << ',' << rep.model << ',' << name << ',';
            if (st.n_series > 0) out << format_double(st.mean) << ',' << format_double(st.sem);
            else out << ',';
            out << ',' << st.n_series << ',' << st.excluded_windows << ','
                << st.excluded_series << '\n';
        }
    }
}

} // namespace tscal
