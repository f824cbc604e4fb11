#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <variant>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "tscal/core.hpp"
#include "tscal/rng.hpp"

namespace tscal {

inline constexpr double kScaleFloor = 1e-9;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Degrees-of-freedom grid used wherever a Student-t nu is estimated.
inline const std::vector<double>& nu_grid() {
    static const std::vector<double> grid{2.1, 2.5, 3, 4, 5, 7, 10, 15, 20, 30};
    return grid;
}

// ---------------------------------------------------------------------------
// Standard normal CDF / inverse CDF
// ---------------------------------------------------------------------------

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.5 * std::numbers::sqrt2); }

// Rational approximation (Acklam) refined by one Halley step on the CDF;
// accurate to a few ulp across (0,1).
inline double normal_icdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DataError("normal_icdf: p outside (0,1)");
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

enum class TailRule { extend, clamp };

struct PredictiveDistribution;

struct Gaussian {
    double mu, sigma;
};
struct StudentT {
    double mu, sigma, nu;
};
struct Laplace {
    double mu, b;
};
struct LogNormal {
    double mu_log, sigma_log;  // support y > 0
};
// Quantile-grid law: linear CDF interpolation between (knot, level) pairs,
// tails continuing the outermost interior segment slope (or clamped).
struct PiecewiseLinear {
    std::vector<double> levels;
    std::vector<double> knots;
    TailRule tail = TailRule::extend;
};
struct Mixture {
    std::vector<double> weights;
    std::vector<PredictiveDistribution> components;
};

struct PredictiveDistribution {
    std::variant<Gaussian, StudentT, Laplace, LogNormal, Mixture, PiecewiseLinear> fam;
};

inline PredictiveDistribution make_gaussian(double mu, double sigma) {
    return {Gaussian{mu, std::max(sigma, kScaleFloor)}};
}
inline PredictiveDistribution make_student_t(double mu, double sigma, double nu) {
    if (!(nu > 1.0)) throw DataError("student_t requires nu > 1");
    return {StudentT{mu, std::max(sigma, kScaleFloor), nu}};
}
inline PredictiveDistribution make_laplace(double mu, double b) {
    return {Laplace{mu, std::max(b, kScaleFloor)}};
}
inline PredictiveDistribution make_log_normal(double mu_log, double sigma_log) {
    return {LogNormal{mu_log, std::max(sigma_log, kScaleFloor)}};
}

inline PredictiveDistribution make_mixture(std::vector<double> weights,
                                           std::vector<PredictiveDistribution> components) {
    if (weights.size() != components.size() || weights.empty())
        throw DataError("mixture weights/components mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw DataError("mixture weight negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        if (sum <= 0.0) throw DataError("mixture weights sum to zero");
        for (double& w : weights) w /= sum;
    }
    return {Mixture{std::move(weights), std::move(components)}};
}

inline PredictiveDistribution piecewise_from_quantiles(const QuantileLevels& levels,
                                                       std::vector<double> values,
                                                       TailRule tail = TailRule::extend) {
    if (values.size() != levels.size())
        throw DataError("piecewise_from_quantiles: value count does not match levels");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DataError("piecewise knot not finite");
        if (i > 0 && values[i] < values[i - 1])
            throw DataError("piecewise_from_quantiles: crossing values");
    }
    return {PiecewiseLinear{levels.levels(), std::move(values), tail}};
}

// ---------------------------------------------------------------------------
// Piecewise-linear internals
// ---------------------------------------------------------------------------

namespace detail {

// Knot list extended to probabilities 0 and 1 per the tail rule, as
// (value, prob) pairs of the CDF polyline.
struct PwlPoints {
    std::vector<double> v, p;
};

inline PwlPoints pwl_points(const PiecewiseLinear& d) {
    const auto& q = d.levels;
    const auto& k = d.knots;
    const std::size_t n = k.size();
    double slope_lo = 0.0, slope_hi = 0.0;
    if (n >= 2) {
        slope_lo = (k[1] - k[0]) / (q[1] - q[0]);
        slope_hi = (k[n - 1] - k[n - 2]) / (q[n - 1] - q[n - 2]);
    }
    if (d.tail == TailRule::clamp) slope_lo = slope_hi = 0.0;
    PwlPoints pts;
    pts.v.reserve(n + 2);
    pts.p.reserve(n + 2);
    pts.v.push_back(k.front() - q.front() * slope_lo);
    pts.p.push_back(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        pts.v.push_back(k[i]);
        pts.p.push_back(q[i]);
    }
    pts.v.push_back(k.back() + (1.0 - q.back()) * slope_hi);
    pts.p.push_back(1.0);
    return pts;
}

inline double pwl_icdf(const PiecewiseLinear& d, double p) {
    const auto pts = pwl_points(d);
    // find segment by probability
    std::size_t i = 0;
    while (i + 2 < pts.p.size() && p > pts.p[i + 1]) ++i;
    const double dp = pts.p[i + 1] - pts.p[i];
    if (dp <= 0.0) return pts.v[i];
    const double frac = (p - pts.p[i]) / dp;
    return pts.v[i] + frac * (pts.v[i + 1] - pts.v[i]);
}

inline double pwl_cdf(const PiecewiseLinear& d, double y) {
    const auto pts = pwl_points(d);
    if (y < pts.v.front()) return 0.0;
    if (y >= pts.v.back()) return 1.0;
    // last point with value <= y, so atoms (flat value runs) resolve to the
    // top of the probability jump
    std::size_t i = 0;
    for (std::size_t j = 0; j < pts.v.size(); ++j)
        if (pts.v[j] <= y) i = j;
    if (i + 1 >= pts.v.size()) return 1.0;
    const double dv = pts.v[i + 1] - pts.v[i];
    if (dv <= 0.0) return pts.p[i];
    return pts.p[i] + (y - pts.v[i]) / dv * (pts.p[i + 1] - pts.p[i]);
}

inline double pwl_mean(const PiecewiseLinear& d) {
    const auto pts = pwl_points(d);
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < pts.v.size(); ++i)
        m += (pts.p[i + 1] - pts.p[i]) * 0.5 * (pts.v[i] + pts.v[i + 1]);
    return m;
}

inline double pwl_log_density(const PiecewiseLinear& d, double y) {
    const auto pts = pwl_points(d);
    if (y < pts.v.front() || y > pts.v.back()) return kNegInf;
    std::size_t i = 0;
    for (std::size_t j = 0; j + 1 < pts.v.size(); ++j)
        if (pts.v[j] <= y) i = j;
    const double dv = pts.v[i + 1] - pts.v[i];
    const double dp = pts.p[i + 1] - pts.p[i];
    if (dv <= 0.0)
        return std::numeric_limits<double>::infinity();  // atom
    return std::log(dp / dv);
}

inline double logsumexp(std::span<const double> xs) {
    double m = kNegInf;
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Density / CDF / inverse CDF / sampling / mean
// ---------------------------------------------------------------------------

inline double log_density(const PredictiveDistribution& d, double y);
inline double cdf(const PredictiveDistribution& d, double y);
inline double icdf(const PredictiveDistribution& d, double p);

namespace detail {

inline double student_t_log_density(double z, double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
           0.5 * std::log(nu * std::numbers::pi) -
           0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

inline double mixture_icdf(const Mixture& m, double p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : m.components) {
        lo = std::min(lo, icdf(c, p));
        hi = std::max(hi, icdf(c, p));
    }
    if (lo == hi) return lo;
    PredictiveDistribution whole{m};
    // generalized inverse via bisection on the monotone CDF
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(whole, mid) >= p) hi = mid;
        else lo = mid;
        if (hi - lo <= 1e-13 * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

inline double log_density(const PredictiveDistribution& d, double y) {
    if (!std::isfinite(y)) throw NumericError("log_density: non-finite y");
    return std::visit(
        [y](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                const double z = (y - f.mu) / f.sigma;
                return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(f.sigma) -
                       0.5 * z * z;
            } else if constexpr (std::is_same_v<T, StudentT>) {
                const double z = (y - f.mu) / f.sigma;
                return detail::student_t_log_density(z, f.nu) - std::log(f.sigma);
            } else if constexpr (std::is_same_v<T, Laplace>) {
                return -std::log(2.0 * f.b) - std::abs(y - f.mu) / f.b;
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                if (!(y > 0.0)) return kNegInf;
                const double z = (std::log(y) - f.mu_log) / f.sigma_log;
                return -std::log(y) - std::log(f.sigma_log) -
                       0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
            } else if constexpr (std::is_same_v<T, Mixture>) {
                std::vector<double> terms(f.components.size());
                for (std::size_t k = 0; k < f.components.size(); ++k)
                    terms[k] = f.weights[k] > 0.0
                                   ? std::log(f.weights[k]) + log_density(f.components[k], y)
                                   : kNegInf;
                return detail::logsumexp(terms);
            } else {
                return detail::pwl_log_density(f, y);
            }
        },
        d.fam);
}

inline double cdf(const PredictiveDistribution& d, double y) {
    if (!std::isfinite(y)) throw NumericError("cdf: non-finite y");
    return std::visit(
        [y](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return normal_cdf((y - f.mu) / f.sigma);
            } else if constexpr (std::is_same_v<T, StudentT>) {
                boost::math::students_t_distribution<double> t(f.nu);
                return boost::math::cdf(t, (y - f.mu) / f.sigma);
            } else if constexpr (std::is_same_v<T, Laplace>) {
                const double z = (y - f.mu) / f.b;
                return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                if (!(y > 0.0)) return 0.0;
                return normal_cdf((std::log(y) - f.mu_log) / f.sigma_log);
            } else if constexpr (std::is_same_v<T, Mixture>) {
                double s = 0.0;
                for (std::size_t k = 0; k < f.components.size(); ++k)
                    s += f.weights[k] * cdf(f.components[k], y);
                return s;
            } else {
                return detail::pwl_cdf(f, y);
            }
        },
        d.fam);
}

inline double icdf(const PredictiveDistribution& d, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DataError("icdf: p outside (0,1)");
    return std::visit(
        [p](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return f.mu + f.sigma * normal_icdf(p);
            } else if constexpr (std::is_same_v<T, StudentT>) {
                boost::math::students_t_distribution<double> t(f.nu);
                return f.mu + f.sigma * boost::math::quantile(t, p);
            } else if constexpr (std::is_same_v<T, Laplace>) {
                return p < 0.5 ? f.mu + f.b * std::log(2.0 * p)
                               : f.mu - f.b * std::log(2.0 * (1.0 - p));
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return std::exp(f.mu_log + f.sigma_log * normal_icdf(p));
            } else if constexpr (std::is_same_v<T, Mixture>) {
                return detail::mixture_icdf(f, p);
            } else {
                return detail::pwl_icdf(f, p);
            }
        },
        d.fam);
}

inline double dist_mean(const PredictiveDistribution& d) {
    return std::visit(
        [](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Gaussian>) return f.mu;
            else if constexpr (std::is_same_v<T, StudentT>) return f.mu;
            else if constexpr (std::is_same_v<T, Laplace>) return f.mu;
            else if constexpr (std::is_same_v<T, LogNormal>)
                return std::exp(f.mu_log + 0.5 * f.sigma_log * f.sigma_log);
            else if constexpr (std::is_same_v<T, Mixture>) {
                double m = 0.0;
                for (std::size_t k = 0; k < f.components.size(); ++k)
                    m += f.weights[k] * dist_mean(f.components[k]);
                return m;
            } else return detail::pwl_mean(f);
        },
        d.fam);
}

// Inverse-transform sampling: one uniform draw from the stream per sample.
inline double sample(const PredictiveDistribution& d, RngStream& rng) {
    return icdf(d, rng.next_uniform());
}

inline double sample_normal(RngStream& rng) { return normal_icdf(rng.next_uniform()); }

// ---------------------------------------------------------------------------
// Unconditional maximum-likelihood fitting
// ---------------------------------------------------------------------------

enum class Family { gaussian, student_t, laplace, log_normal, mixture };

struct FitConfig {
    int max_iter = 200;
    double rel_tol = 1e-8;
    // per-iteration mixture log-likelihood, when requested
    std::vector<double>* loglik_trace = nullptr;
};

namespace detail {

inline double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline PredictiveDistribution fit_gaussian(std::span<const double> x) {
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return make_gaussian(m, std::sqrt(ss / static_cast<double>(x.size())));
}

inline PredictiveDistribution fit_laplace(std::span<const double> x) {
    const double med = empirical_quantile(x, 0.5);
    double mad = 0.0;
    for (double v : x) mad += std::abs(v - med);
    return make_laplace(med, mad / static_cast<double>(x.size()));
}

inline PredictiveDistribution fit_log_normal(std::span<const double> x) {
    std::vector<double> logs;
    logs.reserve(x.size());
    for (double v : x) {
        if (!(v > 0.0)) throw DataError("log_normal fit requires positive data");
        logs.push_back(std::log(v));
    }
    const auto g = fit_gaussian(logs);
    const auto& gg = std::get<Gaussian>(g.fam);
    return make_log_normal(gg.mu, gg.sigma);
}

// Weighted location/scale updates for fixed nu (case weights r_i >= 0).
inline void student_t_irls(std::span<const double> x, std::span<const double> r, double nu,
                           double& mu, double& sigma, int iters) {
    const double rsum = std::accumulate(r.begin(), r.end(), 0.0);
    for (int it = 0; it < iters; ++it) {
        double wsum = 0.0, wx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = (x[i] - mu) / sigma;
            const double w = r[i] * (nu + 1.0) / (nu + z * z);
            wsum += w;
            wx += w * x[i];
        }
        if (wsum <= 0.0) return;
        const double mu_new = wx / wsum;
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = (x[i] - mu_new) / sigma;
            const double w = r[i] * (nu + 1.0) / (nu + z * z);
            ss += w * (x[i] - mu_new) * (x[i] - mu_new);
        }
        const double sigma_new = std::max(std::sqrt(ss / rsum), kScaleFloor);
        const bool converged =
            std::abs(mu_new - mu) < 1e-12 * std::max(1.0, std::abs(mu)) &&
            std::abs(sigma_new - sigma) < 1e-12 * sigma;
        mu = mu_new;
        sigma = sigma_new;
        if (converged) break;
    }
}

inline double student_t_loglik(std::span<const double> x, double mu, double sigma, double nu) {
    double ll = 0.0;
    for (double v : x)
        ll += student_t_log_density((v - mu) / sigma, nu) - std::log(sigma);
    return ll;
}

inline PredictiveDistribution fit_student_t(std::span<const double> x) {
    std::vector<double> ones(x.size(), 1.0);
    double best_ll = kNegInf, best_mu = 0, best_sigma = 1, best_nu = nu_grid().front();
    for (double nu : nu_grid()) {
        double mu = empirical_quantile(x, 0.5);
        const auto g = fit_gaussian(x);
        double sigma = std::max(std::get<Gaussian>(g.fam).sigma, kScaleFloor);
        student_t_irls(x, ones, nu, mu, sigma, 100);
        const double ll = student_t_loglik(x, mu, sigma, nu);
        if (ll > best_ll) {
            best_ll = ll;
            best_mu = mu;
            best_sigma = sigma;
            best_nu = nu;
        }
    }
    return make_student_t(best_mu, best_sigma, best_nu);
}

inline double weighted_median(std::span<const double> x, std::span<const double> r) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    const double half = 0.5 * std::accumulate(r.begin(), r.end(), 0.0);
    double acc = 0.0;
    for (std::size_t j : idx) {
        acc += r[j];
        if (acc >= half) return x[j];
    }
    return x[idx.back()];
}

PredictiveDistribution fit_mixture(std::span<const double> x, const FitConfig& cfg);

} // namespace detail

inline PredictiveDistribution fit_mle(Family family, std::span<const double> data,
                                      const FitConfig& cfg = {}) {
    for (double v : data)
        if (!std::isfinite(v)) throw DataError("fit_mle: non-finite datum");
    const std::size_t min_n = family == Family::mixture ? 8 : 2;
    if (data.size() < min_n)
        throw DataError("fit_mle: need at least " + std::to_string(min_n) + " observations");
    switch (family) {
        case Family::gaussian: return detail::fit_gaussian(data);
        case Family::laplace: return detail::fit_laplace(data);
        case Family::log_normal: return detail::fit_log_normal(data);
        case Family::student_t: return detail::fit_student_t(data);
        case Family::mixture: return detail::fit_mixture(data, cfg);
    }
    throw NumericError("fit_mle: unknown family");
}

namespace detail {

// EM over {Gaussian, Student-t, Laplace, LogNormal}; the log-normal weight is
// forced to 0 when any datum is <= 0.
inline PredictiveDistribution fit_mixture(std::span<const double> x, const FitConfig& cfg) {
    const std::size_t n = x.size();
    bool all_positive = true;
    for (double v : x) all_positive = all_positive && v > 0.0;

    std::vector<PredictiveDistribution> comps;
    comps.push_back(fit_gaussian(x));
    {
        const auto& g = std::get<Gaussian>(comps[0].fam);
        comps.push_back(make_student_t(g.mu, g.sigma, 5.0));
    }
    comps.push_back(fit_laplace(x));
    comps.push_back(all_positive ? fit_log_normal(x) : make_log_normal(0.0, 1.0));
    const std::size_t K = comps.size();
    const std::size_t active = all_positive ? K : K - 1;
    std::vector<double> w(K, 1.0 / static_cast<double>(active));
    if (!all_positive) w.back() = 0.0;

    std::vector<std::vector<double>> resp(K, std::vector<double>(n, 0.0));
    std::vector<double> terms(K);
    double prev_ll = kNegInf;
    for (int it = 0; it < cfg.max_iter; ++it) {
        // E-step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < K; ++k)
                terms[k] = w[k] > 0.0 ? std::log(w[k]) + log_density(comps[k], x[i]) : kNegInf;
            const double lse = logsumexp(terms);
            ll += lse;
            for (std::size_t k = 0; k < K; ++k)
                resp[k][i] = std::isfinite(terms[k]) ? std::exp(terms[k] - lse) : 0.0;
        }
        if (cfg.loglik_trace) cfg.loglik_trace->push_back(ll);
        if (it > 0 && ll - prev_ll < cfg.rel_tol * std::abs(prev_ll)) break;
        prev_ll = ll;

        // M-step
        double wsum_total = 0.0;
        std::vector<double> rsum(K);
        for (std::size_t k = 0; k < K; ++k) {
            rsum[k] = std::accumulate(resp[k].begin(), resp[k].end(), 0.0);
            wsum_total += rsum[k];
        }
        for (std::size_t k = 0; k < K; ++k) {
            w[k] = rsum[k] / wsum_total;
            if (rsum[k] < 1e-10) continue;  // frozen component
            auto& r = resp[k];
            if (auto* g = std::get_if<Gaussian>(&comps[k].fam)) {
                double mu = 0.0;
                for (std::size_t i = 0; i < n; ++i) mu += r[i] * x[i];
                mu /= rsum[k];
                double ss = 0.0;
                for (std::size_t i = 0; i < n; ++i) ss += r[i] * (x[i] - mu) * (x[i] - mu);
                g->mu = mu;
                g->sigma = std::max(std::sqrt(ss / rsum[k]), kScaleFloor);
            } else if (auto* t = std::get_if<StudentT>(&comps[k].fam)) {
                student_t_irls(x, r, t->nu, t->mu, t->sigma, 5);
                double best_nu = t->nu, best = kNegInf;
                for (double nu : nu_grid()) {
                    double wl = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        wl += r[i] * (student_t_log_density((x[i] - t->mu) / t->sigma, nu) -
                                      std::log(t->sigma));
                    if (wl > best) {
                        best = wl;
                        best_nu = nu;
                    }
                }
                t->nu = best_nu;
            } else if (auto* l = std::get_if<Laplace>(&comps[k].fam)) {
                const double mu = weighted_median(x, r);
                double mad = 0.0;
                for (std::size_t i = 0; i < n; ++i) mad += r[i] * std::abs(x[i] - mu);
                l->mu = mu;
                l->b = std::max(mad / rsum[k], kScaleFloor);
            } else if (auto* ln = std::get_if<LogNormal>(&comps[k].fam)) {
                double mu = 0.0;
                for (std::size_t i = 0; i < n; ++i) mu += r[i] * std::log(x[i]);
                mu /= rsum[k];
                double ss = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = std::log(x[i]) - mu;
                    ss += r[i] * d * d;
                }
                ln->mu_log = mu;
                ln->sigma_log = std::max(std::sqrt(ss / rsum[k]), kScaleFloor);
            }
        }
        // renormalize
        double wsum = std::accumulate(w.begin(), w.end(), 0.0);
        for (double& wk : w) wk /= wsum;
    }
    return make_mixture(std::move(w), std::move(comps));
}

} // namespace detail

// ---------------------------------------------------------------------------
// JSON (provenance logs)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json dist_to_json(const PredictiveDistribution& d) {
    using nlohmann::ordered_json;
    return std::visit(
        [](const auto& f) -> ordered_json {
            using T = std::decay_t<decltype(f)>;
            ordered_json j;
            if constexpr (std::is_same_v<T, Gaussian>) {
                j["family"] = "gaussian";
                j["params"] = {{"mu", f.mu}, {"sigma", f.sigma}};
            } else if constexpr (std::is_same_v<T, StudentT>) {
                j["family"] = "student_t";
                j["params"] = {{"mu", f.mu}, {"sigma", f.sigma}, {"nu", f.nu}};
            } else if constexpr (std::is_same_v<T, Laplace>) {
                j["family"] = "laplace";
                j["params"] = {{"mu", f.mu}, {"b", f.b}};
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                j["family"] = "log_normal";
                j["params"] = {{"mu_log", f.mu_log}, {"sigma_log", f.sigma_log}};
            } else if constexpr (std::is_same_v<T, Mixture>) {
                j["family"] = "mixture";
                j["weights"] = f.weights;
                auto arr = ordered_json::array();
                for (const auto& c : f.components) arr.push_back(dist_to_json(c));
                j["components"] = arr;
            } else {
                j["family"] = "piecewise_linear";
                j["levels"] = f.levels;
                j["knots"] = f.knots;
                j["tail"] = f.tail == TailRule::extend ? "extend" : "clamp";
            }
            return j;
        },
        d.fam);
}

inline PredictiveDistribution dist_from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "gaussian")
        return make_gaussian(j.at("params").at("mu"), j.at("params").at("sigma"));
    if (family == "student_t")
        return make_student_t(j.at("params").at("mu"), j.at("params").at("sigma"),
                              j.at("params").at("nu"));
    if (family == "laplace")
        return make_laplace(j.at("params").at("mu"), j.at("params").at("b"));
    if (family == "log_normal")
        return make_log_normal(j.at("params").at("mu_log"), j.at("params").at("sigma_log"));
    if (family == "mixture") {
        std::vector<PredictiveDistribution> comps;
        for (const auto& c : j.at("components")) comps.push_back(dist_from_json(c));
        return make_mixture(j.at("weights").get<std::vector<double>>(), std::move(comps));
    }
    if (family == "piecewise_linear") {
        const auto tail =
            j.at("tail").get<std::string>() == "clamp" ? TailRule::clamp : TailRule::extend;
        return piecewise_from_quantiles(QuantileLevels(j.at("levels").get<std::vector<double>>()),
                                        j.at("knots").get<std::vector<double>>(), tail);
    }
    throw DataError("unknown distribution family '" + family + "'");
}

} // namespace tscal
