#include <catch2/catch_amalgamated.hpp>

#include "tscal/synthgen.hpp"

using namespace tscal;

namespace {

// independent sample autocorrelation at one lag
double sample_acf(std::span<const double> y, int lag) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        den += (y[t] - mean) * (y[t] - mean);
        if (t + static_cast<std::size_t>(lag) < y.size())
            num += (y[t] - mean) * (y[t + static_cast<std::size_t>(lag)] - mean);
    }
    return num / den;
}

} // namespace

TEST_CASE("ar1 generator hits the configured autocorrelation") {
    SynthSpec spec;
    spec.kind = SynthKind::ar1;
    spec.seed = 7;
    auto r = generate(spec);
    REQUIRE(r.series.values.size() == 4367);
    CHECK(sample_acf(r.series.values, 1) == Catch::Approx(0.9).margin(0.03));

    // stationary variance (1-a)^2/(1-a^2) within 10%
    double mean = 0.0, ss = 0.0;
    for (double v : r.series.values) mean += v;
    mean /= 4367.0;
    for (double v : r.series.values) ss += (v - mean) * (v - mean);
    const double var = ss / 4367.0;
    const double expected = 0.01 / 0.19;
    CHECK(var == Catch::Approx(expected).epsilon(0.10));
}

TEST_CASE("ar1 with alpha 0 reduces to iid noise") {
    SynthSpec spec;
    spec.kind = SynthKind::ar1;
    spec.alpha = 0.0;
    spec.length = 4000;
    spec.seed = 8;
    auto r = generate(spec);
    CHECK(std::abs(sample_acf(r.series.values, 1)) <= 2.0 / std::sqrt(4000.0));
}

TEST_CASE("generators are deterministic in the seed") {
    SynthSpec spec;
    spec.kind = SynthKind::ar1;
    spec.seed = 9;
    auto a = generate(spec);
    auto b = generate(spec);
    CHECK(a.series.values == b.series.values);
    spec.seed = 10;
    auto c = generate(spec);
    CHECK(a.series.values != c.series.values);
}

TEST_CASE("iid student t noise is standardized") {
    SynthSpec spec;
    spec.kind = SynthKind::iid_student_t;
    spec.nu = 5.0;  // finite fourth moment keeps the variance estimate stable
    spec.length = 40000;
    spec.seed = 11;
    auto r = generate(spec);
    double ss = 0.0;
    for (double v : r.series.values) ss += v * v;
    CHECK(ss / static_cast<double>(r.series.values.size()) == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("seasonal generator carries the sinusoid") {
    SynthSpec spec;
    spec.kind = SynthKind::seasonal;
    spec.period = 24;
    spec.amplitude = 2.0;
    spec.noise_sd = 0.5;
    spec.length = 2400;
    spec.seed = 12;
    auto r = generate(spec);
    // projection onto the seasonal sin basis recovers the amplitude
    const double w = 2.0 * std::numbers::pi / 24.0;
    double proj = 0.0;
    for (std::size_t t = 0; t < r.series.values.size(); ++t)
        proj += r.series.values[t] * std::sin(w * static_cast<double>(t));
    proj *= 2.0 / static_cast<double>(r.series.values.size());
    CHECK(proj == Catch::Approx(2.0).margin(0.1));
}

TEST_CASE("latent regression emits aligned features and linear targets") {
    SynthSpec spec;
    spec.kind = SynthKind::latent_regression;
    spec.length = 2000;
    spec.split = 1000;
    spec.feature_dim = 4;
    spec.noise = "student_t";
    spec.seed = 13;
    auto r = generate(spec);
    REQUIRE(r.features.size() == 2000);
    REQUIRE(r.features[0].size() == 4);
    REQUIRE(r.weights.size() == 4);
    for (const auto& row : r.features)
        for (double v : row) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    // residuals about the true line have roughly unit variance
    double ss = 0.0;
    for (std::size_t i = 0; i < r.features.size(); ++i) {
        double m = r.bias;
        for (std::size_t j = 0; j < 4; ++j) m += r.weights[j] * r.features[i][j];
        const double e = r.series.values[i] - m;
        ss += e * e;
    }
    CHECK(ss / 2000.0 == Catch::Approx(1.0).margin(0.25));

    SynthSpec bad = spec;
    bad.noise = "cauchy";
    CHECK_THROWS_AS(generate(bad), DataError);
}

TEST_CASE("pacf of an ar1 sample cuts off after lag 1") {
    SynthSpec spec;
    spec.kind = SynthKind::ar1;
    spec.seed = 14;
    auto r = generate(spec);
    auto p = pacf(r.series.values, 20);
    const double band = 2.0 / std::sqrt(4367.0);
    CHECK(p[0] == Catch::Approx(0.9).margin(0.03));
    int inside = 0;
    for (std::size_t k = 1; k < 20; ++k)
        if (std::abs(p[k]) < band) ++inside;
    CHECK(inside >= 17);  // 90% of lags 2..20
    for (double v : p) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("pacf of white noise stays inside the band") {
    SynthSpec spec;
    spec.kind = SynthKind::iid_gauss;
    spec.length = 4000;
    spec.seed = 15;
    auto r = generate(spec);
    auto p = pacf(r.series.values, 20);
    const double band = 2.0 / std::sqrt(4000.0);
    int inside = 0;
    for (double v : p)
        if (std::abs(v) < band) ++inside;
    CHECK(inside >= 19);  // 95% of 20 lags
}

TEST_CASE("pacf lag 1 equals the sample autocorrelation exactly") {
    SynthSpec spec;
    spec.kind = SynthKind::ar1;
    spec.length = 500;
    spec.split = 250;
    spec.seed = 16;
    auto r = generate(spec);
    auto p = pacf(r.series.values, 3);
    CHECK(p[0] == Catch::Approx(sample_acf(r.series.values, 1)).margin(1e-12));
}

TEST_CASE("pacf matches the hand Durbin-Levinson recursion on an AR(2) sample") {
    // simulate y_t = 0.5 y_{t-1} + 0.3 y_{t-2} + eps
    RngStream rng(17, "synth-test/ar2");
    const std::size_t n = 6000;
    std::vector<double> y(n, 0.0);
    for (std::size_t t = 2; t < n; ++t)
        y[t] = 0.5 * y[t - 1] + 0.3 * y[t - 2] + sample_normal(rng);
    auto p = pacf(y, 4);

    const double r1 = sample_acf(y, 1);
    const double r2 = sample_acf(y, 2);
    const double phi22 = (r2 - r1 * r1) / (1.0 - r1 * r1);
    CHECK(p[1] == Catch::Approx(phi22).margin(1e-12));
    const double band = 2.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(p[1]) > band);   // second lag is real structure
    CHECK(std::abs(p[2]) < band);   // third is not
}

TEST_CASE("pacf input validation") {
    std::vector<double> constant(100, 1.0);
    CHECK_THROWS_AS(pacf(constant, 5), DataError);
    std::vector<double> short_series{1.0, 2.0, 1.0, 2.0, 1.5, 2.5};
    CHECK_THROWS_AS(pacf(short_series, 3), DataError);  // max_lag >= length/4
}

TEST_CASE("synth spec validation") {
    SynthSpec spec;
    spec.split = 0;
    CHECK_THROWS_AS(generate(spec), DataError);
    spec = SynthSpec{};
    spec.alpha = 1.0;
    CHECK_THROWS_AS(generate(spec), DataError);
    spec = SynthSpec{};
    spec.nu = 2.0;
    CHECK_THROWS_AS(generate(spec), DataError);
}
