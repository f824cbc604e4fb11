#pragma once

#include "tscal/core.hpp"
#include "tscal/dist.hpp"
#include "tscal/rng.hpp"

namespace tscal {

enum class SynthKind { iid_gauss, ar1, iid_student_t, seasonal, latent_regression };

inline const char* to_string(SynthKind k) {
    switch (k) {
        case SynthKind::iid_gauss: return "iid_gauss";
        case SynthKind::ar1: return "ar1";
        case SynthKind::iid_student_t: return "iid_student_t";
        case SynthKind::seasonal: return "seasonal";
        case SynthKind::latent_regression: return "latent_regression";
    }
    return "?";
}

inline SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "iid_gauss") return SynthKind::iid_gauss;
    if (s == "ar1") return SynthKind::ar1;
    if (s == "iid_student_t") return SynthKind::iid_student_t;
    if (s == "seasonal") return SynthKind::seasonal;
    if (s == "latent_regression") return SynthKind::latent_regression;
    throw DataError("unknown synthetic kind '" + s + "'");
}

struct SynthSpec {
    SynthKind kind = SynthKind::ar1;
    std::string id;  // defaults to the kind name
    std::int64_t length = 4367;
    std::int64_t split = 1440;
    double alpha = 0.9;                // ar1
    double nu = 3.0;                   // t noise, standardized to unit variance
    double period = 24.0;              // seasonal
    double amplitude = 1.0;            // seasonal
    double noise_sd = 1.0;
    std::int64_t feature_dim = 4;      // latent_regression
    std::string noise = "gauss";       // latent_regression: gauss | student_t
    std::uint64_t seed = 0;

    void validate() const {
        if (length < 2) throw DataError("synth length must be >= 2");
        if (!(split > 0 && split < length)) throw DataError("synth split must be in (0, length)");
        if (!(std::abs(alpha) < 1.0)) throw DataError("synth alpha must satisfy |alpha| < 1");
        if (!(nu > 2.0)) throw DataError("synth nu must be > 2");
        if (!(period > 0.0)) throw DataError("synth period must be positive");
        if (feature_dim < 1) throw DataError("synth feature_dim must be >= 1");
        if (noise != "gauss" && noise != "student_t")
            throw DataError("synth noise must be 'gauss' or 'student_t'");
    }
};

struct SynthResult {
    TimeSeries series;
    std::vector<std::vector<double>> features;  // latent_regression only
    std::vector<double> weights;                // ground truth, latent_regression only
    double bias = 0.0;
};

inline SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    const std::string id = spec.id.empty() ? to_string(spec.kind) : spec.id;
    RngStream noise_stream(spec.seed, "synth/" + id);
    const auto n = static_cast<std::size_t>(spec.length);

    // unit-variance innovation draw for the configured family
    const double t_scale = std::sqrt((spec.nu - 2.0) / spec.nu);
    auto draw_t = [&](RngStream& s) {
        boost::math::students_t_distribution<double> t(spec.nu);
        return t_scale * boost::math::quantile(t, s.next_uniform());
    };

    SynthResult out;
    out.series.id = id;
    out.series.values.resize(n);
    auto& y = out.series.values;

    switch (spec.kind) {
        case SynthKind::iid_gauss:
            for (auto& v : y) v = spec.noise_sd * sample_normal(noise_stream);
            break;
        case SynthKind::iid_student_t:
            for (auto& v : y) v = spec.noise_sd * draw_t(noise_stream);
            break;
        case SynthKind::ar1: {
            // y_t = alpha*y_{t-1} + (1-alpha)*eps, started from the stationary law
            const double innov = (1.0 - spec.alpha) * spec.noise_sd;
            const double stat_sd = innov / std::sqrt(1.0 - spec.alpha * spec.alpha);
            y[0] = stat_sd * sample_normal(noise_stream);
            for (std::size_t t = 1; t < n; ++t)
                y[t] = spec.alpha * y[t - 1] + innov * sample_normal(noise_stream);
            break;
        }
        case SynthKind::seasonal: {
            const double w = 2.0 * std::numbers::pi / spec.period;
            for (std::size_t t = 0; t < n; ++t)
                y[t] = spec.amplitude * std::sin(w * static_cast<double>(t)) +
                       spec.noise_sd * sample_normal(noise_stream);
            break;
        }
        case SynthKind::latent_regression: {
            RngStream feat(spec.seed, "synth/" + id + "/features");
            RngStream coef(spec.seed, "synth/" + id + "/weights");
            const auto F = static_cast<std::size_t>(spec.feature_dim);
            out.weights.resize(F);
            for (auto& w : out.weights) w = 2.0 * coef.next_uniform() - 1.0;
            out.bias = 2.0 * coef.next_uniform() - 1.0;
            out.features.assign(n, std::vector<double>(F));
            for (std::size_t i = 0; i < n; ++i) {
                double m = out.bias;
                for (std::size_t j = 0; j < F; ++j) {
                    out.features[i][j] = 2.0 * feat.next_uniform() - 1.0;
                    m += out.weights[j] * out.features[i][j];
                }
                const double eps = spec.noise == "gauss" ? sample_normal(noise_stream)
                                                         : draw_t(noise_stream);
                y[i] = m + spec.noise_sd * eps;
            }
            break;
        }
    }
    out.series.validate();
    return out;
}

// Partial autocorrelations at lags 1..max_lag via the Durbin-Levinson
// recursion on sample autocovariances.
inline std::vector<double> pacf(std::span<const double> series, int max_lag) {
    const auto n = static_cast<std::int64_t>(series.size());
    if (max_lag < 1) throw DataError("pacf: max_lag must be >= 1");
    if (static_cast<std::int64_t>(max_lag) >= n / 4)
        throw DataError("pacf: max_lag must be below length/4");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> c(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::int64_t t = 0; t + k < n; ++t)
            s += (series[static_cast<std::size_t>(t)] - mean) *
                 (series[static_cast<std::size_t>(t + k)] - mean);
        c[static_cast<std::size_t>(k)] = s / static_cast<double>(n);
    }
    if (!(c[0] > 0.0)) throw DataError("pacf: zero-variance series");
    std::vector<double> r(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) r[k] = c[k] / c[0];

    std::vector<double> out(static_cast<std::size_t>(max_lag));
    std::vector<double> phi_prev, phi;
    for (int k = 1; k <= max_lag; ++k) {
        double num = r[static_cast<std::size_t>(k)];
        double den = 1.0;
        for (int j = 1; j < k; ++j) {
            num -= phi_prev[static_cast<std::size_t>(j - 1)] * r[static_cast<std::size_t>(k - j)];
            den -= phi_prev[static_cast<std::size_t>(j - 1)] * r[static_cast<std::size_t>(j)];
        }
        const double phi_kk = num / den;
        phi.assign(static_cast<std::size_t>(k), 0.0);
        for (int j = 1; j < k; ++j)
            phi[static_cast<std::size_t>(j - 1)] =
                phi_prev[static_cast<std::size_t>(j - 1)] -
                phi_kk * phi_prev[static_cast<std::size_t>(k - 1 - j)];
        phi[static_cast<std::size_t>(k - 1)] = phi_kk;
        out[static_cast<std::size_t>(k - 1)] = phi_kk;
        phi_prev = phi;
    }
    return out;
}

} // namespace tscal
