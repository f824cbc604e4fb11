// tscal: calibration evaluation for probabilistic time-series forecasts.
//
// Subcommands: synth, backtest, score, report, diag pacf.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal numeric failure.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "tscal/harness.hpp"

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("TSCAL_OUT_DIR");
    return env && *env ? env : ".";
}

int run_synth(const tscal::SynthSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    auto result = tscal::generate(spec);
    fs::create_directories(out_dir);
    const fs::path series_path = fs::path(out_dir) / (result.series.id + ".csv");
    tscal::write_series_csv(series_path,
                            std::span<const tscal::TimeSeries>(&result.series, 1));
    std::cout << "wrote " << series_path.string() << " (" << result.series.values.size()
              << " values, split " << spec.split << ")\n";
    if (!result.features.empty()) {
        const fs::path feat_path = fs::path(out_dir) / (result.series.id + "_features.csv");
        tscal::write_features_csv(feat_path, result.features);
        std::cout << "wrote " << feat_path.string() << " (" << result.features.front().size()
                  << " features per row)\n";
    }
    return 0;
}

int run_backtest_cmd(const tscal::ExperimentConfig& cfg) {
    auto result = tscal::run_backtest(cfg);
    std::cout << "scored " << result.records.size() << " windows across "
              << result.aggregates.size() << " (dataset, model) pairs\n";
    if (result.crossing_repairs > 0)
        std::cout << "repaired crossing rows in " << result.crossing_repairs << " forecasts\n";
    if (!result.rejects.empty())
        std::cout << result.rejects.size() << " records rejected (see rejects.csv)\n";
    if (!result.records_path.empty()) {
        std::cout << "records:    " << result.records_path.string() << '\n'
                  << "aggregates: " << result.aggregates_path.string() << '\n'
                  << "report:     " << result.report_txt_path.string() << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"calibration evaluation for probabilistic time-series forecasts"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_kind = "ar1", synth_id, synth_noise = "gauss";
    std::string synth_out = default_out_dir();
    tscal::SynthSpec spec;
    synth->add_option("--kind", synth_kind,
                      "iid_gauss | ar1 | iid_student_t | seasonal | latent_regression");
    synth->add_option("--id", synth_id, "series id (defaults to the kind)");
    synth->add_option("--length", spec.length, "series length");
    synth->add_option("--split", spec.split, "train/test split index");
    synth->add_option("--alpha", spec.alpha, "ar1 coefficient");
    synth->add_option("--nu", spec.nu, "student-t degrees of freedom");
    synth->add_option("--period", spec.period, "seasonal period");
    synth->add_option("--amplitude", spec.amplitude, "seasonal amplitude");
    synth->add_option("--noise-sd", spec.noise_sd, "noise scale");
    synth->add_option("--features", spec.feature_dim, "latent feature dimension");
    synth->add_option("--noise", synth_noise, "latent noise family: gauss | student_t");
    synth->add_option("--seed", spec.seed, "generator seed");
    synth->add_option("--out", synth_out, "output directory");

    // ---- backtest ----
    auto* backtest = app.add_subcommand("backtest", "run a configured backtest");
    std::string bt_config;
    backtest->add_option("--config", bt_config, "experiment config file")->required();
    std::uint64_t bt_seed = 0;
    std::int64_t bt_horizon = 0, bt_stride = 0, bt_patch = 0;
    int bt_ntraj = 0, bt_threads = -1;
    std::string bt_levels, bt_out, bt_strategy;
    auto* o_seed = backtest->add_option("--seed", bt_seed, "override the config seed");
    auto* o_horizon = backtest->add_option("--horizon", bt_horizon, "override the horizon");
    auto* o_stride = backtest->add_option("--stride", bt_stride, "override the stride");
    auto* o_levels = backtest->add_option("--levels", bt_levels, "override the level grid (csv list)");
    auto* o_out = backtest->add_option("--out", bt_out, "override the output directory");
    auto* o_strategy =
        backtest->add_option("--strategy", bt_strategy, "override every model's rollout strategy");
    auto* o_patch = backtest->add_option("--patch", bt_patch, "override every model's patch length");
    auto* o_ntraj = backtest->add_option("--n-traj", bt_ntraj, "override trajectory counts");
    auto* o_threads = backtest->add_option("--threads", bt_threads, "worker threads (0 = hardware)");

    // ---- score ----
    auto* score = app.add_subcommand("score", "score an external forecast file against truth");
    std::string sc_forecasts, sc_data, sc_label = "external", sc_dataset, sc_levels;
    std::string sc_out = default_out_dir();
    std::string sc_id_col = "id", sc_value_col = "value", sc_ts_col;
    score->add_option("--forecasts", sc_forecasts, "forecast .jsonl file")->required();
    score->add_option("--data", sc_data, "truth series csv")->required();
    score->add_option("--label", sc_label, "model label for the records");
    score->add_option("--dataset", sc_dataset, "dataset name (defaults to the csv stem)");
    score->add_option("--levels", sc_levels, "level grid to score at (csv list)");
    score->add_option("--out", sc_out, "output directory");
    score->add_option("--id-col", sc_id_col, "id column name");
    score->add_option("--value-col", sc_value_col, "value column name");
    score->add_option("--timestamp-col", sc_ts_col, "timestamp column name");

    // ---- report ----
    auto* report = app.add_subcommand("report", "aggregate a records csv into report tables");
    std::string rp_records;
    std::string rp_out = default_out_dir();
    bool rp_by_dataset = true, rp_by_model = true;
    report->add_option("--records", rp_records, "records.csv from a backtest")->required();
    report->add_option("--out", rp_out, "output directory");
    report->add_flag("!--no-group-dataset", rp_by_dataset, "collapse datasets into one group");
    report->add_flag("!--no-group-model", rp_by_model, "collapse models into one group");

    // ---- diag pacf ----
    auto* diag = app.add_subcommand("diag", "series diagnostics");
    diag->require_subcommand(1);
    auto* pacf_cmd = diag->add_subcommand("pacf", "partial autocorrelations per series");
    std::string dg_data, dg_id, dg_out;
    int dg_maxlag = 20;
    std::string dg_id_col = "id", dg_value_col = "value";
    pacf_cmd->add_option("--data", dg_data, "series csv")->required();
    pacf_cmd->add_option("--id", dg_id, "restrict to one series id");
    pacf_cmd->add_option("--max-lag", dg_maxlag, "largest lag");
    pacf_cmd->add_option("--out", dg_out, "output directory (default: print to stdout)");
    pacf_cmd->add_option("--id-col", dg_id_col, "id column name");
    pacf_cmd->add_option("--value-col", dg_value_col, "value column name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            spec.kind = tscal::synth_kind_from_string(synth_kind);
            spec.id = synth_id;
            spec.noise = synth_noise;
            return run_synth(spec, synth_out);
        }
        if (backtest->parsed()) {
            auto cfg = tscal::load_config(bt_config);
            if (*o_seed) cfg.seed = bt_seed;
            if (*o_horizon) cfg.horizon = bt_horizon;
            if (*o_stride) cfg.stride = bt_stride;
            if (*o_out) cfg.out_dir = bt_out;
            if (*o_threads) cfg.threads = bt_threads;
            if (*o_levels)
                cfg.levels = tscal::QuantileLevels(tscal::detail::parse_level_list(bt_levels));
            for (auto& m : cfg.models) {
                if (*o_strategy) m.strategy = tscal::strategy_from_string(bt_strategy);
                if (*o_patch) m.patch = bt_patch;
                if (*o_ntraj) m.n_trajectories = bt_ntraj;
            }
            if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();
            return run_backtest_cmd(cfg);
        }
        if (score->parsed()) {
            tscal::ExperimentConfig cfg;
            if (!sc_levels.empty())
                cfg.levels = tscal::QuantileLevels(tscal::detail::parse_level_list(sc_levels));
            tscal::validate_level_closure(cfg.levels, cfg.confidences, cfg.msis_s);
            tscal::CsvSchema schema{sc_id_col, sc_value_col, sc_ts_col};
            const auto truth = tscal::load_series_csv(sc_data, schema);
            const std::string ds_name =
                sc_dataset.empty() ? std::filesystem::path(sc_data).stem().string() : sc_dataset;
            std::vector<std::string> rejects;
            std::int64_t crossings = 0;
            auto records = tscal::score_external(sc_forecasts, truth, cfg, ds_name, sc_label,
                                                 &rejects, &crossings);
            std::filesystem::create_directories(sc_out);
            const auto dir = std::filesystem::path(sc_out);
            tscal::write_records_csv(dir / "records.csv", records, cfg.levels, cfg.confidences);
            auto aggregates = tscal::aggregate(records, cfg.levels, cfg.confidences);
            tscal::write_aggregates_csv(dir / "aggregates.csv", aggregates);
            tscal::emit_report(aggregates, dir / "report.txt", dir / "report.csv");
            if (!rejects.empty()) {
                std::ofstream rf(dir / "rejects.csv");
                rf << "dataset,model,series_id,origin,reason\n";
                for (const auto& line : rejects) rf << line << '\n';
            }
            std::cout << "scored " << records.size() << " records";
            if (crossings > 0) std::cout << ", repaired crossings in " << crossings;
            if (!rejects.empty()) std::cout << ", rejected " << rejects.size();
            std::cout << "; wrote " << (dir / "records.csv").string() << '\n';
            return 0;
        }
        if (report->parsed()) {
            auto file = tscal::read_records_csv(rp_records);
            auto aggregates = tscal::aggregate(file.records, file.levels, file.confidences,
                                               rp_by_dataset, rp_by_model);
            std::filesystem::create_directories(rp_out);
            const auto dir = std::filesystem::path(rp_out);
            tscal::write_aggregates_csv(dir / "aggregates.csv", aggregates);
            tscal::emit_report(aggregates, dir / "report.txt", dir / "report.csv");
            std::cout << "aggregated " << file.records.size() << " records into "
                      << aggregates.size() << " groups; wrote " << (dir / "report.txt").string()
                      << '\n';
            return 0;
        }
        if (pacf_cmd->parsed()) {
            tscal::CsvSchema schema{dg_id_col, dg_value_col, ""};
            auto series = tscal::load_series_csv(dg_data, schema);
            std::ostringstream body;
            body << "series_id,lag,pacf\n";
            bool found = dg_id.empty();
            for (const auto& s : series) {
                if (!dg_id.empty() && s.id != dg_id) continue;
                found = true;
                auto p = tscal::pacf(s.values, dg_maxlag);
                for (std::size_t k = 0; k < p.size(); ++k)
                    body << s.id << ',' << (k + 1) << ',' << tscal::format_double(p[k]) << '\n';
            }
            if (!found) throw tscal::DataError("series id '" + dg_id + "' not found");
            if (dg_out.empty()) {
                std::cout << body.str();
            } else {
                std::filesystem::create_directories(dg_out);
                const auto path = std::filesystem::path(dg_out) / "pacf.csv";
                std::ofstream out(path);
                out << body.str();
                std::cout << "wrote " << path.string() << '\n';
            }
            return 0;
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const tscal::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const tscal::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
