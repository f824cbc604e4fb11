// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and runtime limits are pinned in code.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracle_metrics.hpp"
#include "tscal/harness.hpp"
#include "tscal/heads.hpp"

using namespace tscal;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& detail) {
    if (!cond) throw Failure(detail);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

fs::path scratch(const std::string& sub) {
    auto dir = fs::temp_directory_path() / "tscal_acceptance" / sub;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// the noisy first-order linear process dataset used by criteria 3, 5 and 11
DatasetSpec ar1_dataset() {
    DatasetSpec ds;
    ds.name = "ar1";
    ds.source = DatasetSpec::Source::synth;
    ds.synth.kind = SynthKind::ar1;
    ds.synth.length = 4367;
    ds.synth.split = 1440;
    ds.synth.alpha = 0.9;
    ds.synth.seed = 4;
    return ds;
}

// Criterion 6 dataset: ar1 with slower mixing. At alpha = 0.9 the patch
// length 16 exceeds the process mixing time (~5 steps), so cross-patch
// uncertainty propagation is worth almost nothing and branching ties with
// the naive rollout; alpha = 0.98 (mixing ~ 25 steps) exercises the regime
// the strategy comparison is about.
DatasetSpec ar1_slow_dataset() {
    DatasetSpec ds;
    ds.name = "ar1slow";
    ds.source = DatasetSpec::Source::synth;
    ds.synth.kind = SynthKind::ar1;
    ds.synth.length = 4367;
    ds.synth.split = 1440;
    ds.synth.alpha = 0.98;
    ds.synth.seed = 2;
    return ds;
}

ModelSpec oracle_model(const std::string& label, Strategy strategy, std::int64_t patch,
                       int n_traj = 100) {
    ModelSpec m;
    m.label = label;
    m.forecaster = ForecasterKind::oracle_ar1;
    m.alpha = 0.9;
    m.sigma = 0.1;  // innovation scale of y_t = a y_{t-1} + (1-a) eps
    m.strategy = strategy;
    m.patch = patch;
    m.n_trajectories = n_traj;
    return m;
}

const AggregateReport& find_agg(const BacktestResult& r, const std::string& model) {
    for (const auto& a : r.aggregates)
        if (a.model == model) return a;
    throw Failure("aggregate for model '" + model + "' missing");
}

// ---------------------------------------------------------------------------
// 1. metric oracle equivalence
// ---------------------------------------------------------------------------

std::string criterion_1() {
    RngStream rng(101, "acceptance/oracle");
    QuantileLevels q;
    ConfidenceLevels s;
    const auto ql = q.levels();
    const auto sl = s.levels();
    double worst = 0.0;
    auto rel_gap = [](double a, double b) {
        return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
    };
    int instances = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t H = 2 + rng.next_u64() % 15;
        const bool ties = rep % 4 == 0;
        std::vector<double> y(H);
        for (auto& v : y)
            v = ties ? std::floor(8.0 * rng.next_uniform()) : 8.0 * (rng.next_uniform() - 0.3);
        std::vector<std::vector<double>> rows(H, std::vector<double>(q.size()));
        for (auto& row : rows) {
            for (auto& v : row)
                v = ties ? std::floor(8.0 * rng.next_uniform())
                         : 8.0 * (rng.next_uniform() - 0.3);
            std::sort(row.begin(), row.end());
        }
        auto f = QuantileForecast::make(ForecastWindow{"a", 0, 1, static_cast<std::int64_t>(H)},
                                        q, rows);
        std::vector<double> med(H);
        for (std::size_t t = 0; t < H; ++t) med[t] = rows[t][4];

        worst = std::max(worst, rel_gap(pce(f, y, q), oracle::pce(rows, y, ql)));
        worst = std::max(worst, rel_gap(cce(f, y, s), oracle::cce(rows, y, ql, sl)));
        auto [tp, tc] = tailed(f, y);
        worst = std::max(worst, rel_gap(tp, oracle::tpce(rows, y, ql)));
        worst = std::max(worst, rel_gap(tc, oracle::tcce(rows, y, ql)));
        auto compare = [&](auto&& impl, auto&& ora) {
            std::optional<double> a, b;
            try {
                a = impl();
            } catch (const UndefinedMetricError&) {
            }
            try {
                b = ora();
            } catch (const std::runtime_error&) {
            }
            expect(a.has_value() == b.has_value(), "undefined-metric disagreement");
            if (a) worst = std::max(worst, rel_gap(*a, *b));
        };
        compare([&] { return siw(f, y, s); }, [&] { return oracle::siw(rows, y, ql, sl); });
        compare([&] { return mase(med, y); }, [&] { return oracle::mase(med, y); });
        compare([&] { return wql(f, y, q); }, [&] { return oracle::wql(rows, y, ql); });
        compare([&] { return msis(f, y, 0.8); }, [&] { return oracle::msis(rows, y, ql, 0.8); });
        ++instances;
    }
    expect(instances == 1000, "expected 1000 instances");
    expect(worst <= 1e-12, "worst relative error " + fmt(worst) + " > 1e-12");
    return "1000 instances, worst relative error " + fmt(worst);
}

// ---------------------------------------------------------------------------
// 2. pce bounds
// ---------------------------------------------------------------------------

std::string criterion_2() {
    QuantileLevels q;
    std::vector<double> y(10);
    for (int t = 0; t < 10; ++t) y[static_cast<std::size_t>(t)] = t + 1.0;

    std::vector<double> below(9);
    for (int j = 0; j < 9; ++j) below[static_cast<std::size_t>(j)] = -100.0 + j;
    auto f_below = QuantileForecast::make(ForecastWindow{"b", 0, 1, 10}, q,
                                          std::vector<std::vector<double>>(10, below));
    const double p_below = pce(f_below, y, q);
    expect(p_below == 0.5, "all-below pce " + fmt(p_below) + " != 0.5 exactly");

    std::vector<double> matching(9);
    for (int j = 0; j < 9; ++j) matching[static_cast<std::size_t>(j)] = 10.0 * q[static_cast<std::size_t>(j)] + 0.5;
    auto f_match = QuantileForecast::make(ForecastWindow{"m", 0, 1, 10}, q,
                                          std::vector<std::vector<double>>(10, matching));
    const double p_match = pce(f_match, y, q);
    expect(p_match == 0.0, "fraction-matching pce " + fmt(p_match) + " != 0 exactly");
    return "all-below pce = 0.5 and fraction-matching pce = 0, both exact";
}

// ---------------------------------------------------------------------------
// 3. oracle calibration on the ar1 dataset
// ---------------------------------------------------------------------------

std::string criterion_3() {
    ExperimentConfig cfg;
    cfg.datasets.push_back(ar1_dataset());
    cfg.models.push_back(oracle_model("oracle", Strategy::exact, 0));
    cfg.context_len = 512;
    cfg.horizon = 64;
    cfg.stride = 1;
    cfg.seed = 2025;
    auto result = run_backtest(cfg);
    expect(result.records.size() == 4367 - 1440 - 64 + 1, "unexpected window count");
    const auto& agg = find_agg(result, "oracle");
    const double p = agg.metrics.at("pce").mean;
    const double c = agg.metrics.at("cce").mean;
    expect(p <= 0.02, "dataset pce " + fmt(p) + " > 0.02");
    expect(std::abs(c) <= 0.02, "dataset |cce| " + fmt(std::abs(c)) + " > 0.02");
    return "pce " + fmt(p) + ", cce " + fmt(c) + " over " +
           std::to_string(result.records.size()) + " windows";
}

// ---------------------------------------------------------------------------
// 4. trajectory convergence to the exact multi-step law
// ---------------------------------------------------------------------------

std::string criterion_4() {
    const double alpha = 0.9, sigma = 0.1;
    auto f = Forecaster::oracle_ar1(alpha, sigma, 1);
    std::vector<double> ctx{0.5};
    RolloutConfig rc;
    rc.strategy = Strategy::trajectory;
    rc.patch = 1;
    rc.total_horizon = 32;
    rc.n_trajectories = 10000;
    rc.seed = 407;
    auto tr = rollout_trajectory(f, ctx, rc, ForecastWindow{"t", 0, 1, 32});
    RolloutConfig ec = rc;
    ec.strategy = Strategy::exact;
    auto ex = rollout_exact(f, ctx, ec, ForecastWindow{"t", 0, 1, 32});
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < 32; ++t) {
        const double sd_h =
            sigma * std::sqrt((1 - std::pow(alpha, 2.0 * (t + 1))) / (1 - alpha * alpha));
        for (std::size_t j = 0; j < 9; ++j) {
            const double gap =
                std::abs(tr.forecast.values[t][j] - ex.forecast.values[t][j]) / sd_h;
            worst_ratio = std::max(worst_ratio, gap);
        }
    }
    expect(worst_ratio <= 0.05,
           "worst |gap|/sd " + fmt(worst_ratio) + " > 0.05 (n=10000, h<=32)");
    return "n=10000, h<=32: worst |gap|/sd " + fmt(worst_ratio);
}

// ---------------------------------------------------------------------------
// 5. naive rollout overconfidence
// ---------------------------------------------------------------------------

std::string criterion_5() {
    ExperimentConfig cfg;
    cfg.datasets.push_back(ar1_dataset());
    cfg.models.push_back(oracle_model("exact", Strategy::exact, 0));
    cfg.models.push_back(oracle_model("naive1", Strategy::naive, 1));
    cfg.context_len = 512;
    cfg.horizon = 256;
    cfg.stride = 8;
    cfg.seed = 2025;
    auto result = run_backtest(cfg);
    const double cce_naive = find_agg(result, "naive1").metrics.at("cce").mean;
    const double pce_naive = find_agg(result, "naive1").metrics.at("pce").mean;
    const double pce_exact = find_agg(result, "exact").metrics.at("pce").mean;
    expect(cce_naive > 0.1, "naive cce " + fmt(cce_naive) + " <= 0.1");
    expect(pce_naive > 3.0 * pce_exact,
           "naive pce " + fmt(pce_naive) + " <= 3 x exact pce " + fmt(pce_exact));
    return "naive cce " + fmt(cce_naive) + ", naive pce " + fmt(pce_naive) + " vs exact " +
           fmt(pce_exact);
}

// ---------------------------------------------------------------------------
// 6. strategy and horizon ordering
// ---------------------------------------------------------------------------

std::string criterion_6() {
    ExperimentConfig cfg;
    cfg.datasets.push_back(ar1_slow_dataset());
    const double a = cfg.datasets[0].synth.alpha;
    const double innov = (1.0 - a) * cfg.datasets[0].synth.noise_sd;
    auto model = [&](const std::string& label, Strategy s, std::int64_t patch) {
        ModelSpec m = oracle_model(label, s, patch);
        m.alpha = a;
        m.sigma = innov;
        return m;
    };
    cfg.models.push_back(model("naive16", Strategy::naive, 16));
    cfg.models.push_back(model("branch16", Strategy::branching, 16));
    cfg.models.push_back(model("traj16", Strategy::trajectory, 16));
    cfg.models.push_back(model("branch64", Strategy::branching, 64));
    cfg.models.push_back(model("traj64", Strategy::trajectory, 64));
    cfg.context_len = 512;
    cfg.horizon = 256;
    cfg.stride = 8;
    cfg.seed = 2025;
    auto result = run_backtest(cfg);
    const double naive16 = find_agg(result, "naive16").metrics.at("pce").mean;
    const double branch16 = find_agg(result, "branch16").metrics.at("pce").mean;
    const double traj16 = find_agg(result, "traj16").metrics.at("pce").mean;
    const double branch64 = find_agg(result, "branch64").metrics.at("pce").mean;
    const double traj64 = find_agg(result, "traj64").metrics.at("pce").mean;
    // point-feedback and per-quantile contexts both under-disperse: overconfident
    const double cce_naive = find_agg(result, "naive16").metrics.at("cce").mean;
    const double cce_branch = find_agg(result, "branch16").metrics.at("cce").mean;
    expect(cce_naive > 0.0, "naive16 cce " + fmt(cce_naive) + " not positive");
    expect(cce_branch > 0.0, "branch16 cce " + fmt(cce_branch) + " not positive");
    expect(traj16 < branch16,
           "pce(traj16) " + fmt(traj16) + " !< pce(branch16) " + fmt(branch16));
    expect(branch16 < naive16,
           "pce(branch16) " + fmt(branch16) + " !< pce(naive16) " + fmt(naive16));
    expect(naive16 - traj16 >= 0.005,
           "naive-vs-trajectory gap " + fmt(naive16 - traj16) + " < 0.005");
    expect(branch64 <= branch16,
           "pce(branch64) " + fmt(branch64) + " > pce(branch16) " + fmt(branch16));
    expect(traj64 <= traj16, "pce(traj64) " + fmt(traj64) + " > pce(traj16) " + fmt(traj16));
    return "pce: traj16 " + fmt(traj16) + " < branch16 " + fmt(branch16) + " < naive16 " +
           fmt(naive16) + "; p64<=p16: branch " + fmt(branch64) + ", traj " + fmt(traj64);
}

// ---------------------------------------------------------------------------
// 7. prediction-head comparison on t3 latent-regression targets
// ---------------------------------------------------------------------------

struct HeadScores {
    double pce = 0, cce = 0;
};

HeadScores eval_head(const Head& head, const FeatureMatrix& X, std::span<const double> y,
                     const QuantileLevels& q, const ConfidenceLevels& s) {
    std::vector<std::vector<double>> rows;
    rows.reserve(X.size());
    for (const auto& x : X) {
        if (head.kind == HeadKind::quantile) {
            rows.push_back(head.predict_quantiles(x).first);
        } else {
            auto d = head.predict_distribution(x);
            std::vector<double> row(q.size());
            for (std::size_t j = 0; j < q.size(); ++j) row[j] = icdf(d, q[j]);
            rows.push_back(std::move(row));
        }
    }
    auto f = QuantileForecast::make(
        ForecastWindow{"heads", 0, 1, static_cast<std::int64_t>(rows.size())}, q,
        std::move(rows));
    return {pce(f, y, q), cce(f, y, s)};
}

std::string criterion_7() {
    // coverage oracle: central 80% interval of the variance-matched gaussian
    // under the t3 law, by Simpson integration of the t3 density
    const double z = normal_icdf(0.9) * std::sqrt(3.0);
    const auto t3_pdf = [](double x) {
        return std::tgamma(2.0) / (std::sqrt(3.0 * std::numbers::pi) * std::tgamma(1.5)) *
               std::pow(1.0 + x * x / 3.0, -2.0);
    };
    const int n_grid = 20000;
    double simpson = t3_pdf(-z) + t3_pdf(z);
    for (int i = 1; i < n_grid; ++i) {
        const double x = -z + 2.0 * z * i / n_grid;
        simpson += t3_pdf(x) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    simpson *= (2.0 * z / n_grid) / 3.0;
    expect(simpson >= 0.86 && simpson <= 0.90,
           "gaussian central-coverage oracle " + fmt(simpson) + " outside [0.86, 0.90]");

    SynthSpec spec;
    spec.kind = SynthKind::latent_regression;
    spec.length = 7000;
    spec.split = 4000;
    spec.feature_dim = 4;
    spec.noise = "student_t";
    spec.nu = 3.0;
    spec.seed = 78;
    auto data = generate(spec);
    const auto n_train = static_cast<std::size_t>(spec.split);
    FeatureMatrix X_train(data.features.begin(),
                          data.features.begin() + static_cast<std::ptrdiff_t>(n_train));
    FeatureMatrix X_test(data.features.begin() + static_cast<std::ptrdiff_t>(n_train),
                         data.features.end());
    std::vector<double> y_train(data.series.values.begin(),
                                data.series.values.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<double> y_test(data.series.values.begin() + static_cast<std::ptrdiff_t>(n_train),
                               data.series.values.end());

    QuantileLevels q;
    ConfidenceLevels s;
    HeadTrainConfig cfg;
    cfg.seed = 7;
    std::map<std::string, HeadScores> scores;
    for (auto [kind, name] : {std::pair{HeadKind::quantile, "quantile"},
                              {HeadKind::gaussian, "gaussian"},
                              {HeadKind::student_t, "student_t"},
                              {HeadKind::mixture, "mixture"}}) {
        auto head = train_head(kind, X_train, y_train, cfg);
        scores[name] = eval_head(head, X_test, y_test, q, s);
    }
    const auto& g = scores["gaussian"];
    const auto& t = scores["student_t"];
    expect(g.cce < 0.0, "gaussian cce " + fmt(g.cce) + " not negative");
    expect(t.cce < 0.02, "student_t cce " + fmt(t.cce) + " >= 0.02");
    expect(t.cce - g.cce >= 0.03,
           "student_t cce " + fmt(t.cce) + " - gaussian cce " + fmt(g.cce) + " < 0.03");
    expect(g.pce > t.pce,
           "gaussian pce " + fmt(g.pce) + " !> student_t pce " + fmt(t.pce));
    for (auto a : {"quantile", "student_t", "mixture"})
        for (auto b : {"quantile", "student_t", "mixture"})
            expect(std::abs(scores[a].pce - scores[b].pce) <= 0.02,
                   std::string(a) + " pce " + fmt(scores[a].pce) + " vs " + b + " pce " +
                       fmt(scores[b].pce) + " differ by > 0.02");
    return "coverage oracle " + fmt(simpson) + "; cce: gaussian " + fmt(g.cce) + ", student_t " +
           fmt(t.cce) + "; pce: gaussian " + fmt(g.pce) + ", student_t " + fmt(t.pce) +
           ", quantile " + fmt(scores["quantile"].pce) + ", mixture " +
           fmt(scores["mixture"].pce);
}

// ---------------------------------------------------------------------------
// 8. gradient checks
// ---------------------------------------------------------------------------

std::string criterion_8() {
    RngStream rng(808, "acceptance/gradcheck");
    QuantileLevels q;
    double worst = 0.0;
    int configs = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const HeadKind kind = static_cast<HeadKind>(rep % 4);
        const int F = 1 + static_cast<int>(rng.next_u64() % 5);
        Head h;
        h.kind = kind;
        h.feature_dim = F;
        h.levels = q;
        h.output_dim = kind == HeadKind::quantile ? 9
                       : kind == HeadKind::mixture ? 12
                                                   : 2;
        h.nu = nu_grid()[rng.next_u64() % nu_grid().size()];
        h.lognormal_enabled = rep % 2 == 0;
        h.W.resize(static_cast<std::size_t>(h.output_dim * F));
        h.b.resize(static_cast<std::size_t>(h.output_dim));
        for (auto& v : h.W) v = 0.6 * (rng.next_uniform() - 0.5);
        for (auto& v : h.b) v = 1.2 * rng.next_uniform() - 0.2;
        if (kind == HeadKind::quantile) std::sort(h.b.begin(), h.b.end());

        const std::size_t n = 4 + rng.next_u64() % 24;
        FeatureMatrix X(n, std::vector<double>(static_cast<std::size_t>(F)));
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : X[i]) v = 2.0 * rng.next_uniform() - 1.0;
            y[i] = 3.0 * (rng.next_uniform() - 0.3);
        }
        const double err = gradient_check(h, X, y);
        worst = std::max(worst, err);
        expect(err < 1e-4, "gradient check " + fmt(err) + " >= 1e-4 at configuration " +
                               std::to_string(rep));
        ++configs;
    }
    expect(configs == 100, "expected 100 configurations");
    return "100 configurations, worst relative error " + fmt(worst);
}

// ---------------------------------------------------------------------------
// 9. invocation-count contract
// ---------------------------------------------------------------------------

std::string criterion_9() {
    auto f = Forecaster::oracle_ar1(0.9, 0.1, 1);
    std::vector<double> ctx{0.3};
    const std::int64_t H = 32;
    RolloutConfig rc;
    rc.patch = 1;
    rc.total_horizon = H;
    rc.seed = 99;

    rc.strategy = Strategy::naive;
    auto naive = rollout_naive(f, ctx, rc, ForecastWindow{"n", 0, 1, H});
    expect(naive.invocations == H, "naive invocations != H");
    for (auto c : naive.calls_per_step)
        expect(c == 1, "naive calls per step != 1");

    rc.strategy = Strategy::branching;
    auto br = rollout_branching(f, ctx, rc, ForecastWindow{"b", 0, 1, H});
    expect(br.invocations == 1 + (H - 1) * 9, "branching invocations != 1 + (H-1)|Q|");
    expect(br.calls_per_step[0] == 1, "branching first step != 1 call");
    for (std::size_t t = 1; t < static_cast<std::size_t>(H); ++t)
        expect(br.calls_per_step[t] == 9, "branching rolled-out step != |Q| calls");

    rc.strategy = Strategy::trajectory;
    rc.n_trajectories = 7;
    auto tr = rollout_trajectory(f, ctx, rc, ForecastWindow{"t", 0, 1, H});
    expect(tr.invocations == 7 * H, "trajectory invocations != n * H");
    for (auto c : tr.calls_per_step)
        expect(c == 7, "trajectory calls per step != n");

    return "per rolled-out step: naive 1, branching |Q|=9, trajectory n=7 (exact)";
}

// ---------------------------------------------------------------------------
// 10. determinism across worker counts
// ---------------------------------------------------------------------------

std::string criterion_10() {
    auto dir1 = scratch("det1");
    auto dir2 = scratch("det2");
    ExperimentConfig cfg;
    cfg.datasets.push_back(ar1_dataset());
    cfg.datasets[0].synth.length = 2400;
    cfg.datasets[0].synth.split = 1200;
    cfg.models.push_back(oracle_model("traj", Strategy::trajectory, 8, 50));
    cfg.models.push_back(oracle_model("exact", Strategy::exact, 0));
    cfg.context_len = 128;
    cfg.horizon = 64;
    cfg.stride = 16;
    cfg.seed = 31337;
    cfg.out_dir = dir1.string();
    cfg.threads = 1;
    run_backtest(cfg);
    cfg.out_dir = dir2.string();
    cfg.threads = 4;
    run_backtest(cfg);
    const auto a = slurp(dir1 / "records.csv");
    const auto b = slurp(dir2 / "records.csv");
    expect(!a.empty() && a == b, "records differ between 1-thread and 4-thread runs");
    return "records.csv byte-identical across 1 and 4 workers (" +
           std::to_string(a.size()) + " bytes)";
}

// ---------------------------------------------------------------------------
// 11. pacf diagnostic on the ar1 series
// ---------------------------------------------------------------------------

std::string criterion_11() {
    auto ds = ar1_dataset();
    auto r = generate(ds.synth);
    const auto p = pacf(r.series.values, 20);
    expect(std::abs(p[0] - 0.9) <= 0.03,
           "pacf[1] " + fmt(p[0]) + " outside 0.9 +- 0.03");
    const double band = 2.0 / std::sqrt(4367.0);
    int inside = 0;
    for (std::size_t k = 1; k < 20; ++k)
        if (std::abs(p[k]) < band) ++inside;
    expect(inside >= 17, "only " + std::to_string(inside) + "/19 lags inside the band");
    return "pacf[1] " + fmt(p[0]) + ", " + std::to_string(inside) + "/19 higher lags in band " +
           fmt(band);
}

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // 0 = none
    std::function<std::string()> fn;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "metric oracle equivalence (1e-12, 1000 instances)", 5.0, criterion_1},
        {2, "pce bounds attained exactly", 0.0, criterion_2},
        {3, "oracle calibration on ar1 (pce, |cce| <= 0.02)", 60.0, criterion_3},
        {4, "trajectory convergence to the exact law", 120.0, criterion_4},
        {5, "naive rollout overconfidence", 0.0, criterion_5},
        {6, "strategy and horizon ordering", 0.0, criterion_6},
        {7, "prediction-head comparison on t3 targets", 0.0, criterion_7},
        {8, "head gradient checks (1e-4, 100 configurations)", 0.0, criterion_8},
        {9, "invocation-count contract", 0.0, criterion_9},
        {10, "determinism across worker counts", 0.0, criterion_10},
        {11, "pacf diagnostic on ar1", 0.0, criterion_11},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.fn();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && c.time_limit_s > 0.0 && elapsed > c.time_limit_s) {
            ok = false;
            detail = "runtime " + fmt(elapsed) + "s exceeds " + fmt(c.time_limit_s) + "s";
        }
        std::printf("[%s] %2d. %s: %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    detail.c_str(), elapsed);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
