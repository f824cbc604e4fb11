#pragma once

#include <atomic>
#include <cctype>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "tscal/core.hpp"
#include "tscal/io.hpp"
#include "tscal/metrics.hpp"
#include "tscal/rollout.hpp"
#include "tscal/synthgen.hpp"

namespace tscal {

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct DatasetSpec {
    enum class Source { csv, synth };
    std::string name;
    Source source = Source::synth;
    std::string path;          // csv
    CsvSchema schema;          // csv column mapping
    std::int64_t split = 1440; // first test index (csv; synth carries its own)
    SynthSpec synth;

    std::int64_t split_index() const {
        return source == Source::synth ? synth.split : split;
    }
};

struct ModelSpec {
    std::string label;
    bool external = false;
    std::string forecast_path;  // external

    ForecasterKind forecaster = ForecasterKind::linear_ar;
    int order = 1;
    double alpha = 0.9, sigma = 0.1, mu = 0.0;  // oracle parameters
    bool refit_per_window = false;

    Strategy strategy = Strategy::naive;
    std::int64_t patch = 0;  // steps per forward pass; 0 = full horizon natively
    PointRule point_rule = PointRule::median;
    int n_trajectories = 100;
    std::int64_t max_context = 0;
};

// Every level implied by the confidences, msis, and the median/tail metrics
// must be a member of the active quantile grid.
inline void validate_level_closure(const QuantileLevels& levels,
                                   const ConfidenceLevels& confidences, double msis_s) {
    confidences.validate_against(levels);
    if (!levels.contains(ConfidenceLevels::q_low(msis_s)) ||
        !levels.contains(ConfidenceLevels::q_high(msis_s)))
        throw DataError("config: msis bounds missing from the level grid");
    if (!levels.contains(0.1) || !levels.contains(0.9))
        throw DataError("config: tailed metrics need levels 0.1 and 0.9");
    if (!levels.contains(0.5))
        throw DataError("config: mase needs the 0.5 level");
}

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<ModelSpec> models;
    std::int64_t context_len = 512;
    std::int64_t horizon = 64;
    std::int64_t stride = 1;
    QuantileLevels levels;
    ConfidenceLevels confidences;
    double msis_s = 0.8;
    std::uint64_t seed = 42;
    std::string out_dir;
    int threads = 0;  // 0 = hardware concurrency
    bool write_forecast_files = false;

    void validate() const {
        if (horizon < 1 || stride < 1 || context_len < 1)
            throw DataError("config: horizon, stride and context_len must be positive");
        validate_level_closure(levels, confidences, msis_s);
        if (datasets.empty() || models.empty())
            throw DataError("config: need at least one dataset and one model");
        for (const auto& m : models) {
            if (!m.external && m.forecaster == ForecasterKind::linear_ar &&
                static_cast<std::int64_t>(m.order) > context_len)
                throw DataError("config: model '" + m.label +
                                "' order exceeds the context length");
        }
    }
};

// ---------------------------------------------------------------------------
// Deterministic parallel map
// ---------------------------------------------------------------------------

inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned t = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    t = std::min<unsigned>(t, static_cast<unsigned>(n));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Backtest
// ---------------------------------------------------------------------------

struct BacktestResult {
    std::vector<MetricRecord> records;
    std::vector<AggregateReport> aggregates;
    std::vector<std::string> rejects;
    std::int64_t crossing_repairs = 0;
    nlohmann::ordered_json provenance;  // protocol + fitted model parameters
    std::filesystem::path records_path, aggregates_path, report_txt_path, report_csv_path,
        rejects_path, provenance_path;
};

namespace detail {

struct LoadedDataset {
    DatasetSpec spec;
    std::vector<TimeSeries> series;
};

inline LoadedDataset load_dataset(const DatasetSpec& spec) {
    LoadedDataset out{spec, {}};
    if (spec.source == DatasetSpec::Source::csv) {
        out.series = load_series_csv(spec.path, spec.schema);
    } else {
        auto r = generate(spec.synth);
        if (!spec.name.empty()) r.series.id = spec.name;
        out.series.push_back(std::move(r.series));
    }
    return out;
}

inline Forecaster build_forecaster(const ModelSpec& m, const TimeSeries& series,
                                   std::int64_t train_end, std::int64_t native_horizon,
                                   const QuantileLevels& levels) {
    switch (m.forecaster) {
        case ForecasterKind::oracle_iid:
            return Forecaster::oracle_iid(m.mu, m.sigma, native_horizon);
        case ForecasterKind::oracle_ar1:
            return Forecaster::oracle_ar1(m.alpha, m.sigma, native_horizon);
        default: {
            TimeSeries train;
            train.id = series.id;
            train.values.assign(series.values.begin(),
                                series.values.begin() + static_cast<std::ptrdiff_t>(train_end));
            return Forecaster::fit(m.forecaster, train, m.order, native_horizon, levels);
        }
    }
}

inline QuantileForecast forecast_window(const ModelSpec& m, const Forecaster& fitted,
                                        const TimeSeries& series, const ForecastWindow& w,
                                        const ExperimentConfig& cfg,
                                        const std::string& dataset_name) {
    const auto context = window_context(series, w);
    const std::int64_t patch = m.patch > 0 ? std::min(m.patch, cfg.horizon) : cfg.horizon;

    const Forecaster* f = &fitted;
    std::optional<Forecaster> refitted;
    if (m.refit_per_window && m.forecaster == ForecasterKind::linear_ar) {
        refitted = build_forecaster(m, series, w.origin + 1, patch, cfg.levels);
        f = &*refitted;
    }

    if (m.strategy == Strategy::exact) {
        RolloutConfig rc;
        rc.strategy = Strategy::exact;
        rc.patch = patch;
        rc.total_horizon = cfg.horizon;
        rc.levels = cfg.levels;
        return rollout_exact(*f, context, rc, w).forecast;
    }
    if (cfg.horizon <= patch)
        return quantiles_of(f->predict(context, cfg.horizon), cfg.levels, w);

    RolloutConfig rc;
    rc.strategy = m.strategy;
    rc.patch = patch;
    rc.total_horizon = cfg.horizon;
    rc.point_rule = m.point_rule;
    rc.n_trajectories = m.n_trajectories;
    rc.levels = cfg.levels;
    rc.max_context = m.max_context;
    rc.seed = derive_seed(cfg.seed, dataset_name + "/" + m.label + "/" + w.series_id,
                          static_cast<std::uint64_t>(w.origin));
    return rollout(*f, context, rc, w).forecast;
}

inline std::string reject_line(const std::string& dataset, const std::string& model,
                               const std::string& series, std::int64_t origin,
                               const std::string& reason) {
    return dataset + "," + model + "," + series + "," + std::to_string(origin) + "," + reason;
}

} // namespace detail

// Scores an externally produced forecast file against truth series. Records
// that cannot be resolved (unknown series, out-of-range windows, missing
// levels) are rejected with a reason; the run continues.
inline std::vector<MetricRecord> score_external(const std::filesystem::path& forecast_file,
                                                std::span<const TimeSeries> truth,
                                                const ExperimentConfig& cfg,
                                                const std::string& dataset_name,
                                                const std::string& model_label,
                                                std::vector<std::string>* rejects = nullptr,
                                                std::int64_t* crossing_repairs = nullptr) {
    const auto forecasts = read_forecasts(forecast_file);
    std::vector<MetricRecord> records;
    for (const auto& fc : forecasts) {
        const TimeSeries* series = nullptr;
        for (const auto& s : truth)
            if (s.id == fc.window.series_id) series = &s;
        auto reject = [&](const std::string& reason) {
            if (rejects)
                rejects->push_back(detail::reject_line(dataset_name, model_label,
                                                       fc.window.series_id, fc.window.origin,
                                                       reason));
        };
        if (!series) {
            reject("unknown series");
            continue;
        }
        if (fc.window.origin < 0 ||
            fc.window.origin + fc.window.horizon > series->length() - 1) {
            reject("window beyond series end");
            continue;
        }
        bool levels_ok = true;
        for (std::size_t j = 0; j < cfg.levels.size(); ++j)
            levels_ok = levels_ok && fc.levels.contains(cfg.levels[j]);
        if (!levels_ok) {
            reject("level grid missing required levels");
            continue;
        }
        if (fc.crossing_repaired && crossing_repairs) ++*crossing_repairs;
        const auto targets = std::span<const double>(series->values)
                                 .subspan(static_cast<std::size_t>(fc.window.origin + 1),
                                          static_cast<std::size_t>(fc.window.horizon));
        records.push_back(score_window(dataset_name, model_label, fc, targets, cfg.levels,
                                       cfg.confidences, cfg.msis_s));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace detail {

inline bool lower_is_better(const std::string& metric) {
    return metric == "mase" || metric == "pce" || metric == "wql" || metric == "msis" ||
           metric == "tpce";
}
inline bool zero_is_better(const std::string& metric) {
    return metric == "cce" || metric == "tcce";
}

inline std::string fmt_cell(const MetricStat& st) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << st.mean << " ± " << st.sem;
    return os.str();
}

} // namespace detail

// Plain-text table per metric block (datasets as rows, models as columns)
// plus a tidy CSV. The best value per row is flagged with '*': smallest for
// mase/pce/wql, closest to zero for cce; siw carries no flag.
inline void emit_report(std::span<const AggregateReport> raw_aggregates,
                        const std::filesystem::path& txt_path,
                        const std::filesystem::path& csv_path) {
    std::vector<AggregateReport> aggregates(raw_aggregates.begin(), raw_aggregates.end());
    for (auto& a : aggregates) {
        if (a.dataset.empty()) a.dataset = "(all)";  // collapsed group
        if (a.model.empty()) a.model = "(all)";
    }
    std::vector<std::string> datasets, models;
    for (const auto& a : aggregates) {
        if (std::find(datasets.begin(), datasets.end(), a.dataset) == datasets.end())
            datasets.push_back(a.dataset);
        if (std::find(models.begin(), models.end(), a.model) == models.end())
            models.push_back(a.model);
    }
    auto find = [&](const std::string& ds, const std::string& m) -> const AggregateReport* {
        for (const auto& a : aggregates)
            if (a.dataset == ds && a.model == m) return &a;
        return nullptr;
    };
    auto best_model = [&](const std::string& metric, const std::string& ds) -> std::string {
        std::string best;
        double best_val = 0.0;
        for (const auto& m : models) {
            const auto* a = find(ds, m);
            if (!a) continue;
            auto it = a->metrics.find(metric);
            if (it == a->metrics.end() || it->second.n_series == 0) continue;
            double v = it->second.mean;
            if (detail::zero_is_better(metric)) v = std::abs(v);
            else if (!detail::lower_is_better(metric)) continue;  // siw: no flag
            if (best.empty() || v < best_val) {
                best = m;
                best_val = v;
            }
        }
        return best;
    };

    static const std::vector<std::string> blocks{"mase", "pce", "cce", "siw", "wql"};

    std::ofstream txt(txt_path);
    if (!txt) throw DataError("cannot write " + txt_path.string());
    std::size_t name_w = 8;
    for (const auto& d : datasets) name_w = std::max(name_w, d.size());
    std::vector<std::size_t> col_w(models.size());
    for (std::size_t c = 0; c < models.size(); ++c)
        col_w[c] = std::max<std::size_t>(models[c].size(), 18);

    for (const auto& metric : blocks) {
        txt << "== " << metric << " ==\n";
        txt << std::left << std::setw(static_cast<int>(name_w + 2)) << "dataset";
        for (std::size_t c = 0; c < models.size(); ++c)
            txt << std::left << std::setw(static_cast<int>(col_w[c] + 2)) << models[c];
        txt << '\n';
        for (const auto& ds : datasets) {
            txt << std::left << std::setw(static_cast<int>(name_w + 2)) << ds;
            const std::string best = best_model(metric, ds);
            for (std::size_t c = 0; c < models.size(); ++c) {
                const auto* a = find(ds, models[c]);
                std::string cell = "-";
                if (a) {
                    auto it = a->metrics.find(metric);
                    if (it != a->metrics.end() && it->second.n_series > 0) {
                        cell = detail::fmt_cell(it->second);
                        if (models[c] == best) cell = "*" + cell;
                    }
                }
                txt << std::left << std::setw(static_cast<int>(col_w[c] + 2)) << cell;
            }
            txt << '\n';
        }
        txt << '\n';
    }

    std::ofstream csv(csv_path);
    if (!csv) throw DataError("cannot write " + csv_path.string());
    csv << "dataset,model,metric,mean,sem,n_series,excluded_windows,excluded_series,best\n";
    for (const auto& a : aggregates) {
        for (const auto& name : metric_names()) {
            auto it = a.metrics.find(name);
            if (it == a.metrics.end()) continue;
            const auto& st = it->second;
            csv << a.dataset << ',' << a.model << ',' << name << ',';
            if (st.n_series > 0)
                csv << format_double(st.mean) << ',' << format_double(st.sem);
            else
                csv << ',';
            csv << ',' << st.n_series << ',' << st.excluded_windows << ',' << st.excluded_series
                << ',' << (best_model(name, a.dataset) == a.model ? 1 : 0) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// run_backtest
// ---------------------------------------------------------------------------

// Runs every (dataset, model) pair over rolling-origin windows, scores all
// metrics, aggregates, and writes records/aggregates/report files when an
// output directory is configured. Fully deterministic given the seed,
// whatever the worker count.
inline BacktestResult run_backtest(const ExperimentConfig& cfg) {
    cfg.validate();
    BacktestResult result;

    std::vector<detail::LoadedDataset> data;
    data.reserve(cfg.datasets.size());
    for (const auto& spec : cfg.datasets) data.push_back(detail::load_dataset(spec));

    result.provenance["protocol"] = {
        {"context_len", cfg.context_len}, {"horizon", cfg.horizon}, {"stride", cfg.stride},
        {"levels", cfg.levels.levels()},  {"confidences", cfg.confidences.levels()},
        {"msis_s", cfg.msis_s},           {"seed", cfg.seed}};
    auto& prov_models = result.provenance["models"];
    prov_models = nlohmann::ordered_json::object();

    std::int64_t crossing = 0;
    for (const auto& ds : data) {
        const std::string ds_name = ds.spec.name.empty() ? ds.series.front().id : ds.spec.name;
        for (const auto& model : cfg.models) {
            if (model.external) {
                auto recs = score_external(model.forecast_path, ds.series, cfg, ds_name,
                                           model.label, &result.rejects, &crossing);
                for (auto& r : recs) result.records.push_back(std::move(r));
                continue;
            }
            for (const auto& series : ds.series) {
                const std::int64_t split = ds.spec.split_index();
                const std::int64_t patch =
                    model.patch > 0 ? std::min(model.patch, cfg.horizon) : cfg.horizon;
                Forecaster fitted =
                    detail::build_forecaster(model, series, split, patch, cfg.levels);
                {
                    auto fj = fitted.to_json();
                    fj["strategy"] = to_string(model.strategy);
                    if (model.strategy == Strategy::trajectory)
                        fj["n_traj"] = model.n_trajectories;
                    prov_models[model.label][ds_name][series.id] = std::move(fj);
                }
                const auto windows =
                    rolling_windows(series, split, cfg.context_len, cfg.horizon, cfg.stride);

                std::vector<std::optional<MetricRecord>> slots(windows.size());
                std::vector<std::string> window_rejects(windows.size());
                std::vector<std::vector<QuantileForecast>> forecast_slots;
                if (cfg.write_forecast_files)
                    forecast_slots.assign(windows.size(), {});
                parallel_for(windows.size(), cfg.threads, [&](std::size_t i) {
                    try {
                        auto fc = detail::forecast_window(model, fitted, series, windows[i],
                                                          cfg, ds_name);
                        const auto targets = window_targets(series, windows[i]);
                        slots[i] = score_window(ds_name, model.label, fc, targets, cfg.levels,
                                                cfg.confidences, cfg.msis_s);
                        if (cfg.write_forecast_files)
                            forecast_slots[i].push_back(std::move(fc));
                    } catch (const DataError& e) {
                        window_rejects[i] = detail::reject_line(
                            ds_name, model.label, windows[i].series_id, windows[i].origin,
                            e.what());
                    }
                });
                for (std::size_t i = 0; i < slots.size(); ++i) {
                    if (slots[i]) {
                        if (slots[i]->crossing_repaired) ++crossing;
                        result.records.push_back(std::move(*slots[i]));
                    } else if (!window_rejects[i].empty()) {
                        result.rejects.push_back(window_rejects[i]);
                    }
                }
                if (cfg.write_forecast_files && !cfg.out_dir.empty()) {
                    std::vector<QuantileForecast> all;
                    for (auto& fs : forecast_slots)
                        for (auto& f : fs) all.push_back(std::move(f));
                    const auto dir = std::filesystem::path(cfg.out_dir);
                    std::filesystem::create_directories(dir);
                    write_forecasts(dir / ("forecasts_" + ds_name + "_" + model.label + "_" +
                                           series.id + ".jsonl"),
                                    all);
                }
            }
        }
    }
    result.crossing_repairs = crossing;
    result.aggregates = aggregate(result.records, cfg.levels, cfg.confidences);

    if (!cfg.out_dir.empty()) {
        const std::filesystem::path dir(cfg.out_dir);
        std::filesystem::create_directories(dir);
        result.records_path = dir / "records.csv";
        result.aggregates_path = dir / "aggregates.csv";
        result.report_txt_path = dir / "report.txt";
        result.report_csv_path = dir / "report.csv";
        write_records_csv(result.records_path, result.records, cfg.levels, cfg.confidences);
        write_aggregates_csv(result.aggregates_path, result.aggregates);
        emit_report(result.aggregates, result.report_txt_path, result.report_csv_path);
        result.provenance_path = dir / "provenance.json";
        std::ofstream pf(result.provenance_path);
        pf << result.provenance.dump(2) << '\n';
        if (!result.rejects.empty()) {
            result.rejects_path = dir / "rejects.csv";
            std::ofstream rf(result.rejects_path);
            rf << "dataset,model,series_id,origin,reason\n";
            for (const auto& line : result.rejects) rf << line << '\n';
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Config file: key = value lines under [section] headers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<double> parse_level_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        bool ok = false;
        const double v = parse_double(trim(item), ok);
        if (!ok) throw DataError("bad numeric list entry '" + item + "'");
        out.push_back(v);
    }
    return out;
}

struct ConfigSection {
    std::string name;
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }
    double get_num(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        bool ok = false;
        const double v = parse_double(it->second, ok);
        if (!ok) throw DataError("config: bad number for '" + key + "'");
        return v;
    }
    bool get_bool(const std::string& key, bool fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw DataError("config: bad boolean for '" + key + "'");
    }
};

inline std::vector<ConfigSection> parse_sections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path.string());
    std::vector<ConfigSection> sections;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            sections.push_back(ConfigSection{trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config: expected 'key = value', got '" + line + "'");
        if (sections.empty()) throw DataError("config: key before any [section]");
        sections.back().kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return sections;
}

} // namespace detail

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    ExperimentConfig cfg;
    for (const auto& sec : detail::parse_sections(path)) {
        if (sec.name == "protocol") {
            cfg.context_len = static_cast<std::int64_t>(sec.get_num("context_len", 512));
            cfg.horizon = static_cast<std::int64_t>(sec.get_num("horizon", 64));
            cfg.stride = static_cast<std::int64_t>(sec.get_num("stride", 1));
            cfg.msis_s = sec.get_num("msis_s", 0.8);
            cfg.seed = static_cast<std::uint64_t>(sec.get_num("seed", 42));
            cfg.threads = static_cast<int>(sec.get_num("threads", 0));
            cfg.out_dir = sec.get("out", "");
            cfg.write_forecast_files = sec.get_bool("write_forecasts", false);
            if (sec.has("levels"))
                cfg.levels = QuantileLevels(detail::parse_level_list(sec.get("levels")));
            if (sec.has("confidences"))
                cfg.confidences =
                    ConfidenceLevels(detail::parse_level_list(sec.get("confidences")));
        } else if (sec.name.rfind("dataset.", 0) == 0) {
            DatasetSpec ds;
            ds.name = sec.name.substr(8);
            const std::string kind = sec.get("kind", "synth");
            if (kind == "csv") {
                ds.source = DatasetSpec::Source::csv;
                ds.path = sec.get("path");
                if (ds.path.empty()) throw DataError("config: csv dataset needs a path");
                ds.split = static_cast<std::int64_t>(sec.get_num("split", -1));
                if (ds.split < 1) throw DataError("config: csv dataset needs a split index");
                ds.schema.id_col = sec.get("id_col", "id");
                ds.schema.value_col = sec.get("value_col", "value");
                ds.schema.timestamp_col = sec.get("timestamp_col", "");
            } else if (kind == "synth") {
                ds.source = DatasetSpec::Source::synth;
                ds.synth.kind = synth_kind_from_string(sec.get("synth", "ar1"));
                ds.synth.id = ds.name;
                ds.synth.length = static_cast<std::int64_t>(sec.get_num("length", 4367));
                ds.synth.split = static_cast<std::int64_t>(sec.get_num("split", 1440));
                ds.synth.alpha = sec.get_num("alpha", 0.9);
                ds.synth.nu = sec.get_num("nu", 3.0);
                ds.synth.period = sec.get_num("period", 24.0);
                ds.synth.amplitude = sec.get_num("amplitude", 1.0);
                ds.synth.noise_sd = sec.get_num("noise_sd", 1.0);
                ds.synth.feature_dim = static_cast<std::int64_t>(sec.get_num("feature_dim", 4));
                ds.synth.noise = sec.get("noise", "gauss");
                ds.synth.seed = static_cast<std::uint64_t>(sec.get_num("seed", 0));
            } else {
                throw DataError("config: dataset kind must be csv or synth");
            }
            cfg.datasets.push_back(std::move(ds));
        } else if (sec.name.rfind("model.", 0) == 0) {
            ModelSpec m;
            m.label = sec.name.substr(6);
            const std::string fk = sec.get("forecaster", "linear_ar");
            if (fk == "external") {
                m.external = true;
                m.forecast_path = sec.get("path");
                if (m.forecast_path.empty())
                    throw DataError("config: external model needs a path");
            } else {
                if (fk == "oracle_iid") m.forecaster = ForecasterKind::oracle_iid;
                else if (fk == "oracle_ar1") m.forecaster = ForecasterKind::oracle_ar1;
                else if (fk == "linear_ar") m.forecaster = ForecasterKind::linear_ar;
                else if (fk == "persistence") m.forecaster = ForecasterKind::persistence;
                else if (fk == "climatology") m.forecaster = ForecasterKind::climatology;
                else throw DataError("config: unknown forecaster '" + fk + "'");
                m.order = static_cast<int>(sec.get_num("order", 1));
                m.alpha = sec.get_num("alpha", 0.9);
                m.sigma = sec.get_num("sigma", 0.1);
                m.mu = sec.get_num("mu", 0.0);
                m.refit_per_window = sec.get_bool("refit_per_window", false);
                if (sec.has("strategy")) m.strategy = strategy_from_string(sec.get("strategy"));
                m.patch = static_cast<std::int64_t>(sec.get_num("patch", 0));
                m.point_rule =
                    sec.get("point_rule", "median") == "mean" ? PointRule::mean : PointRule::median;
                m.n_trajectories = static_cast<int>(sec.get_num("n_traj", 100));
                m.max_context = static_cast<std::int64_t>(sec.get_num("max_context", 0));
            }
            cfg.models.push_back(std::move(m));
        } else {
            throw DataError("config: unknown section [" + sec.name + "]");
        }
    }
    return cfg;
}

} // namespace tscal
