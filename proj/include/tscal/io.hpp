#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscal/core.hpp"

namespace tscal {

// Shortest round-trip decimal representation; locale independent.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, bool& ok) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t' || *(e - 1) == '\r')) --e;
    double v = 0.0;
    auto res = std::from_chars(b, e, v);
    ok = res.ec == std::errc() && res.ptr == e && b != e;
    return v;
}

// ---------------------------------------------------------------------------
// Series CSV
// ---------------------------------------------------------------------------

struct CsvSchema {
    std::string id_col = "id";
    std::string value_col = "value";
    std::string timestamp_col;  // empty = no timestamps
};

namespace detail {

// Comma-separated fields; double quotes wrap fields containing commas.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::size_t find_column(const std::vector<std::string>& header,
                               const std::string& name, const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError("column '" + name + "' missing from " + path);
}

} // namespace detail

// Loads one TimeSeries per distinct id. Values keep file order, or ascending
// timestamp order when a timestamp column is mapped. Row numbers in errors
// are 1-based data rows (header excluded).
inline std::vector<TimeSeries> load_series_csv(const std::filesystem::path& path,
                                               const CsvSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    const auto header = detail::split_csv_line(line);
    const std::size_t id_ix = detail::find_column(header, schema.id_col, path.string());
    const std::size_t val_ix = detail::find_column(header, schema.value_col, path.string());
    std::optional<std::size_t> ts_ix;
    if (!schema.timestamp_col.empty())
        ts_ix = detail::find_column(header, schema.timestamp_col, path.string());

    struct Row {
        double value;
        std::string ts;
        std::size_t file_order;
    };
    std::map<std::string, std::vector<Row>> by_id;
    std::vector<std::string> id_order;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() <= std::max(id_ix, val_ix) ||
            (ts_ix && fields.size() <= *ts_ix))
            throw DataError("row " + std::to_string(row_no) + " of " + path.string() +
                            " has too few columns");
        bool ok = false;
        const double v = parse_double(fields[val_ix], ok);
        if (!ok || !std::isfinite(v))
            throw DataError("non-numeric value '" + fields[val_ix] + "' at row " +
                            std::to_string(row_no) + " of " + path.string());
        auto& rows = by_id[fields[id_ix]];
        if (rows.empty()) id_order.push_back(fields[id_ix]);
        Row r{v, {}, row_no};
        if (ts_ix) r.ts = fields[*ts_ix];
        rows.push_back(std::move(r));
    }

    std::vector<TimeSeries> out;
    for (const auto& id : id_order) {
        auto& rows = by_id[id];
        if (rows.empty())
            throw DataError("series '" + id + "' has no values");
        if (ts_ix) {
            std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
                return detail::timestamp_less(a.ts, b.ts);
            });
            for (std::size_t i = 1; i < rows.size(); ++i)
                if (!detail::timestamp_less(rows[i - 1].ts, rows[i].ts))
                    throw DataError("series '" + id + "' has duplicate timestamp '" +
                                    rows[i].ts + "'");
        }
        TimeSeries s;
        s.id = id;
        s.values.reserve(rows.size());
        for (const auto& r : rows) {
            s.values.push_back(r.value);
            if (ts_ix) s.timestamps.push_back(r.ts);
        }
        s.validate();
        out.push_back(std::move(s));
    }
    if (out.empty()) throw DataError("no data rows in " + path.string());
    return out;
}

inline void write_series_csv(const std::filesystem::path& path,
                             std::span<const TimeSeries> series) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    bool any_ts = false;
    for (const auto& s : series) any_ts = any_ts || !s.timestamps.empty();
    out << (any_ts ? "id,timestamp,value\n" : "id,value\n");
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            out << s.id << ',';
            if (any_ts) out << (i < s.timestamps.size() ? s.timestamps[i] : std::to_string(i)) << ',';
            out << format_double(s.values[i]) << '\n';
        }
    }
}

// Row-aligned feature sidecar, header f0..f{F-1}.
inline void write_features_csv(const std::filesystem::path& path,
                               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    if (rows.empty()) return;
    for (std::size_t j = 0; j < rows.front().size(); ++j)
        out << (j ? "," : "") << "f" << j;
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j)
            out << (j ? "," : "") << format_double(r[j]);
        out << '\n';
    }
}

inline std::vector<std::vector<double>> read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    std::vector<std::vector<double>> rows;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        std::vector<double> r(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            bool ok = false;
            r[j] = parse_double(fields[j], ok);
            if (!ok) throw DataError("non-numeric feature at row " + std::to_string(row_no) +
                                     " of " + path.string());
        }
        if (!rows.empty() && r.size() != rows.front().size())
            throw DataError("ragged feature row " + std::to_string(row_no) + " in " +
                            path.string());
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Forecast files: one JSON object per line
// ---------------------------------------------------------------------------
//
// Fields: series_id (string), origin (integer), levels (array), values
// (array of H arrays of |levels| numbers). Extra fields from
// QuantileForecast::extra are written alongside; unknown fields are ignored
// on read and preserved nowhere. Crossing rows are repaired on read by
// sorting, setting crossing_repaired.

inline void write_forecasts(const std::filesystem::path& path,
                            std::span<const QuantileForecast> forecasts) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& f : forecasts) {
        nlohmann::ordered_json rec;
        rec["series_id"] = f.window.series_id;
        rec["origin"] = f.window.origin;
        rec["levels"] = f.levels.levels();
        rec["values"] = f.values;
        for (const auto& [k, v] : f.extra) {
            bool ok = false;
            const double num = parse_double(v, ok);
            if (ok) rec[k] = num;
            else rec[k] = v;
        }
        out << rec.dump() << '\n';
    }
}

inline std::vector<QuantileForecast> read_forecasts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<QuantileForecast> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("bad JSON at line " + std::to_string(line_no) + " of " +
                            path.string() + ": " + e.what());
        }
        try {
            if (!rec.contains("series_id") || !rec.contains("origin") ||
                !rec.contains("levels") || !rec.contains("values"))
                throw DataError("record missing a required field");
            std::vector<double> levels = rec["levels"].get<std::vector<double>>();
            auto rows = rec["values"].get<std::vector<std::vector<double>>>();
            for (const auto& row : rows)
                if (row.size() != levels.size())
                    throw DataError("row width does not match level grid");
            ForecastWindow w;
            w.series_id = rec["series_id"].get<std::string>();
            w.origin = rec["origin"].get<std::int64_t>();
            w.horizon = static_cast<std::int64_t>(rows.size());
            w.context_len = 1;  // not carried by the format
            out.push_back(QuantileForecast::make(std::move(w), QuantileLevels(std::move(levels)),
                                                 std::move(rows)));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + " of " + path.string() +
                            ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + " of " + path.string() +
                            ": " + e.what());
        }
    }
    return out;
}

} // namespace tscal
