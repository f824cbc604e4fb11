#pragma once

#include <functional>

#include "tscal/core.hpp"
#include "tscal/dist.hpp"
#include "tscal/rng.hpp"

namespace tscal {

enum class HeadKind { quantile, gaussian, student_t, mixture };

inline const char* to_string(HeadKind k) {
    switch (k) {
        case HeadKind::quantile: return "quantile";
        case HeadKind::gaussian: return "gaussian";
        case HeadKind::student_t: return "student_t";
        case HeadKind::mixture: return "mixture";
    }
    return "?";
}

inline HeadKind head_kind_from_string(const std::string& s) {
    if (s == "quantile") return HeadKind::quantile;
    if (s == "gaussian") return HeadKind::gaussian;
    if (s == "student_t") return HeadKind::student_t;
    if (s == "mixture") return HeadKind::mixture;
    throw DataError("unknown head kind '" + s + "'");
}

struct HeadTrainConfig {
    double learning_rate = 0.1;
    int max_iter = 5000;
    double rel_tol = 1e-8;     // relative improvement across a checkpoint gap
    std::uint64_t seed = 0;
    int minibatch = 0;         // 0 = full batch with step halving
    QuantileLevels levels;     // quantile head output grid
    double nu = 0.0;           // 0 = select on the nu grid by validation NLL
    double val_fraction = 0.2;
    int selection_iter = 0;    // budget per nu candidate; 0 = max_iter / 4

    void validate() const {
        if (!(learning_rate > 0.0)) throw DataError("learning_rate must be positive");
        if (max_iter < 1) throw DataError("iteration budget must be positive");
        if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DataError("tolerance must be in (0,1)");
        if (minibatch < 0) throw DataError("minibatch size must be positive");
        if (!(val_fraction > 0.0 && val_fraction < 1.0))
            throw DataError("val_fraction must be in (0,1)");
    }
};

using FeatureMatrix = std::vector<std::vector<double>>;

namespace detail {

inline double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double softplus_inv(double y) {
    y = std::max(y, 1e-6);
    if (y > 30.0) return y;
    return std::log(std::expm1(y));
}

// mixture head raw-output layout
enum MixIdx {
    kGaussMu = 0, kGaussS, kTMu, kTS, kLapMu, kLapB, kLnMu, kLnS,
    kLogit0, kMixOutputs = kLogit0 + 4
};

} // namespace detail

// Affine projection from a latent feature vector to a predictive law:
// identity links for locations and quantile values, softplus for scales,
// a simplex map for mixture weights, and a grid-selected nu.
struct Head {
    HeadKind kind = HeadKind::gaussian;
    int feature_dim = 0;
    int output_dim = 0;
    std::vector<double> W;  // output_dim x feature_dim, row-major
    std::vector<double> b;  // output_dim
    QuantileLevels levels;  // quantile head only
    double nu = 5.0;        // student_t / mixture t component
    bool lognormal_enabled = true;
    std::vector<double> loss_trace;  // recorded every 50 iterations plus final
    double final_loss = 0.0;

    std::vector<double> raw_outputs(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != feature_dim)
            throw DataError("feature dimension mismatch");
        std::vector<double> raw(static_cast<std::size_t>(output_dim));
        for (int o = 0; o < output_dim; ++o) {
            double acc = b[static_cast<std::size_t>(o)];
            const double* row = W.data() + static_cast<std::size_t>(o) * x.size();
            for (std::size_t f = 0; f < x.size(); ++f) acc += row[f] * x[f];
            raw[static_cast<std::size_t>(o)] = acc;
        }
        return raw;
    }

    // Quantile head: predicted row, monotone-repaired with a flag.
    std::pair<std::vector<double>, bool> predict_quantiles(std::span<const double> x) const {
        if (kind != HeadKind::quantile)
            throw DataError("predict_quantiles requires a quantile head");
        auto row = raw_outputs(x);
        const bool repaired = !std::is_sorted(row.begin(), row.end());
        if (repaired) std::sort(row.begin(), row.end());
        return {std::move(row), repaired};
    }

    PredictiveDistribution predict_distribution(std::span<const double> x) const {
        const auto raw = raw_outputs(x);
        using namespace detail;
        switch (kind) {
            case HeadKind::quantile: {
                auto row = raw;
                std::sort(row.begin(), row.end());
                return piecewise_from_quantiles(levels, std::move(row));
            }
            case HeadKind::gaussian: return make_gaussian(raw[0], softplus(raw[1]));
            case HeadKind::student_t: return make_student_t(raw[0], softplus(raw[1]), nu);
            case HeadKind::mixture: {
                std::vector<PredictiveDistribution> comps;
                comps.push_back(make_gaussian(raw[kGaussMu], softplus(raw[kGaussS])));
                comps.push_back(make_student_t(raw[kTMu], softplus(raw[kTS]), nu));
                comps.push_back(make_laplace(raw[kLapMu], softplus(raw[kLapB])));
                comps.push_back(make_log_normal(raw[kLnMu], softplus(raw[kLnS])));
                std::vector<double> w(4, 0.0);
                double zmax = -std::numeric_limits<double>::infinity();
                for (int k = 0; k < 4; ++k)
                    if (lognormal_enabled || k < 3)
                        zmax = std::max(zmax, raw[static_cast<std::size_t>(kLogit0 + k)]);
                double zsum = 0.0;
                for (int k = 0; k < 4; ++k) {
                    if (!lognormal_enabled && k == 3) continue;
                    w[static_cast<std::size_t>(k)] =
                        std::exp(raw[static_cast<std::size_t>(kLogit0 + k)] - zmax);
                    zsum += w[static_cast<std::size_t>(k)];
                }
                for (auto& v : w) v /= zsum;
                return make_mixture(std::move(w), std::move(comps));
            }
        }
        throw NumericError("predict: unknown head kind");
    }
};

namespace detail {

inline int head_output_dim(HeadKind kind, const QuantileLevels& levels) {
    switch (kind) {
        case HeadKind::quantile: return static_cast<int>(levels.size());
        case HeadKind::gaussian:
        case HeadKind::student_t: return 2;
        case HeadKind::mixture: return kMixOutputs;
    }
    return 0;
}

// Per-sample loss and gradient w.r.t. the raw outputs. `term_mask`, when
// non-null, disables individual loss terms (gradient checks exclude
// non-differentiable kinks there).
struct SampleEval {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d raw
};

using TermMask = std::function<bool(std::size_t sample, std::size_t term)>;

inline void eval_sample(const Head& head, std::span<const double> raw, double y,
                        std::size_t sample_index, const TermMask* term_mask,
                        SampleEval& out) {
    out.loss = 0.0;
    out.grad.assign(raw.size(), 0.0);
    switch (head.kind) {
        case HeadKind::quantile: {
            for (std::size_t j = 0; j < raw.size(); ++j) {
                if (term_mask && !(*term_mask)(sample_index, j)) continue;
                const double q = head.levels[j];
                if (raw[j] >= y) {
                    out.loss += 2.0 * (1.0 - q) * (raw[j] - y);
                    out.grad[j] = 2.0 * (1.0 - q);
                } else {
                    out.loss += 2.0 * q * (y - raw[j]);
                    out.grad[j] = -2.0 * q;
                }
            }
            return;
        }
        case HeadKind::gaussian: {
            const double mu = raw[0];
            const double s = softplus(raw[1]);
            const double z = (y - mu) / s;
            out.loss = 0.5 * std::log(2.0 * std::numbers::pi) + std::log(s) + 0.5 * z * z;
            out.grad[0] = -z / s;
            out.grad[1] = (1.0 / s - z * z / s) * sigmoid(raw[1]);
            return;
        }
        case HeadKind::student_t: {
            const double nu = head.nu;
            const double mu = raw[0];
            const double s = softplus(raw[1]);
            const double z = (y - mu) / s;
            out.loss = std::log(s) - student_t_log_density(z, nu);
            out.grad[0] = -(nu + 1.0) * z / ((nu + z * z) * s);
            out.grad[1] =
                (1.0 / s) * (1.0 - (nu + 1.0) * z * z / (nu + z * z)) * sigmoid(raw[1]);
            return;
        }
        case HeadKind::mixture: {
            if (term_mask && !(*term_mask)(sample_index, 0)) return;
            const int K = head.lognormal_enabled ? 4 : 3;
            double lp[4], dmu[4], dscale_raw[4];
            // gaussian
            {
                const double s = softplus(raw[kGaussS]);
                const double z = (y - raw[kGaussMu]) / s;
                lp[0] = -0.5 * std::log(2.0 * std::numbers::pi) - std::log(s) - 0.5 * z * z;
                dmu[0] = z / s;
                dscale_raw[0] = (-1.0 / s + z * z / s) * sigmoid(raw[kGaussS]);
            }
            // student t
            {
                const double s = softplus(raw[kTS]);
                const double z = (y - raw[kTMu]) / s;
                lp[1] = student_t_log_density(z, head.nu) - std::log(s);
                dmu[1] = (head.nu + 1.0) * z / ((head.nu + z * z) * s);
                dscale_raw[1] = (-1.0 / s + (head.nu + 1.0) * z * z / ((head.nu + z * z) * s)) *
                                sigmoid(raw[kTS]);
            }
            // laplace
            {
                const double bb = softplus(raw[kLapB]);
                const double d = y - raw[kLapMu];
                lp[2] = -std::log(2.0 * bb) - std::abs(d) / bb;
                dmu[2] = (d >= 0.0 ? 1.0 : -1.0) / bb;
                dscale_raw[2] = (-1.0 / bb + std::abs(d) / (bb * bb)) * sigmoid(raw[kLapB]);
            }
            // log-normal (support y > 0)
            if (K == 4) {
                const double s = softplus(raw[kLnS]);
                if (y > 0.0) {
                    const double z = (std::log(y) - raw[kLnMu]) / s;
                    lp[3] = -std::log(y) - std::log(s) -
                            0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
                    dmu[3] = z / s;
                    dscale_raw[3] = (-1.0 / s + z * z / s) * sigmoid(raw[kLnS]);
                } else {
                    lp[3] = kNegInf;
                    dmu[3] = dscale_raw[3] = 0.0;
                }
            }
            // softmax weights over the active logits
            double w[4] = {0, 0, 0, 0};
            double zmax = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k)
                zmax = std::max(zmax, raw[static_cast<std::size_t>(kLogit0 + k)]);
            double zsum = 0.0;
            for (int k = 0; k < K; ++k) {
                w[k] = std::exp(raw[static_cast<std::size_t>(kLogit0 + k)] - zmax);
                zsum += w[k];
            }
            for (int k = 0; k < K; ++k) w[k] /= zsum;

            double terms[4];
            double lse = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                terms[k] = w[k] > 0.0 && std::isfinite(lp[k]) ? std::log(w[k]) + lp[k] : kNegInf;
                lse = std::max(lse, terms[k]);
            }
            double esum = 0.0;
            for (int k = 0; k < K; ++k) esum += std::isfinite(terms[k]) ? std::exp(terms[k] - lse) : 0.0;
            const double log_p = lse + std::log(esum);
            out.loss = -log_p;
            double r[4] = {0, 0, 0, 0};
            for (int k = 0; k < K; ++k)
                r[k] = std::isfinite(terms[k]) ? std::exp(terms[k] - log_p) : 0.0;

            const int param_idx[4][2] = {{kGaussMu, kGaussS}, {kTMu, kTS},
                                         {kLapMu, kLapB},     {kLnMu, kLnS}};
            for (int k = 0; k < K; ++k) {
                out.grad[static_cast<std::size_t>(param_idx[k][0])] = -r[k] * dmu[k];
                out.grad[static_cast<std::size_t>(param_idx[k][1])] = -r[k] * dscale_raw[k];
                out.grad[static_cast<std::size_t>(kLogit0 + k)] = w[k] - r[k];
            }
            return;
        }
    }
    throw NumericError("eval: unknown head kind");
}

struct BatchEval {
    double loss = 0.0;
    std::vector<double> grad_W;
    std::vector<double> grad_b;
};

inline BatchEval eval_batch(const Head& head, const FeatureMatrix& X,
                            std::span<const double> y, std::span<const std::size_t> subset,
                            const TermMask* term_mask = nullptr) {
    BatchEval out;
    out.grad_W.assign(head.W.size(), 0.0);
    out.grad_b.assign(head.b.size(), 0.0);
    SampleEval se;
    for (std::size_t i : subset) {
        const auto raw = head.raw_outputs(X[i]);
        eval_sample(head, raw, y[i], i, term_mask, se);
        out.loss += se.loss;
        for (int o = 0; o < head.output_dim; ++o) {
            const double g = se.grad[static_cast<std::size_t>(o)];
            if (g == 0.0) continue;
            out.grad_b[static_cast<std::size_t>(o)] += g;
            double* row = out.grad_W.data() +
                          static_cast<std::size_t>(o) * static_cast<std::size_t>(head.feature_dim);
            for (int f = 0; f < head.feature_dim; ++f) row[static_cast<std::size_t>(f)] += g * X[i][static_cast<std::size_t>(f)];
        }
    }
    const double n = static_cast<double>(subset.size());
    out.loss /= n;
    for (auto& v : out.grad_W) v /= n;
    for (auto& v : out.grad_b) v /= n;
    return out;
}

inline Head init_head(HeadKind kind, const FeatureMatrix& X, std::span<const double> y,
                      const HeadTrainConfig& cfg, double nu) {
    Head h;
    h.kind = kind;
    h.feature_dim = static_cast<int>(X.front().size());
    h.levels = cfg.levels;
    h.output_dim = head_output_dim(kind, cfg.levels);
    h.nu = nu;
    h.W.assign(static_cast<std::size_t>(h.output_dim * h.feature_dim), 0.0);
    h.b.assign(static_cast<std::size_t>(h.output_dim), 0.0);

    const double mean = mean_of(y);
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::max(std::sqrt(ss / static_cast<double>(y.size())), 1e-3);

    switch (kind) {
        case HeadKind::quantile: {
            const auto qs = empirical_quantiles(y, cfg.levels);
            for (std::size_t j = 0; j < qs.size(); ++j) h.b[j] = qs[j];
            break;
        }
        case HeadKind::gaussian:
        case HeadKind::student_t:
            h.b[0] = mean;
            h.b[1] = softplus_inv(sd);
            break;
        case HeadKind::mixture: {
            bool all_positive = true;
            for (double v : y) all_positive = all_positive && v > 0.0;
            h.lognormal_enabled = all_positive;
            const double med = empirical_quantile(y, 0.5);
            double mad = 0.0;
            for (double v : y) mad += std::abs(v - med);
            mad = std::max(mad / static_cast<double>(y.size()), 1e-3);
            h.b[kGaussMu] = mean;
            h.b[kGaussS] = softplus_inv(sd);
            h.b[kTMu] = mean;
            h.b[kTS] = softplus_inv(sd);
            h.b[kLapMu] = med;
            h.b[kLapB] = softplus_inv(mad);
            if (all_positive) {
                std::vector<double> logs;
                logs.reserve(y.size());
                for (double v : y) logs.push_back(std::log(v));
                const double lmean = mean_of(logs);
                double lss = 0.0;
                for (double v : logs) lss += (v - lmean) * (v - lmean);
                h.b[kLnMu] = lmean;
                h.b[kLnS] = softplus_inv(
                    std::max(std::sqrt(lss / static_cast<double>(logs.size())), 1e-3));
            }
            break;
        }
    }
    return h;
}

// Full-batch gradient descent with step halving on loss increase; the
// recorded loss trace is non-increasing by construction.
inline void train_full_batch(Head& head, const FeatureMatrix& X, std::span<const double> y,
                             const HeadTrainConfig& cfg, int max_iter) {
    std::vector<std::size_t> all(X.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto cur = eval_batch(head, X, y, all);
    if (!std::isfinite(cur.loss))
        throw NumericError("head training diverged at iteration 0");
    double lr = cfg.learning_rate;
    head.loss_trace.clear();
    head.loss_trace.push_back(cur.loss);
    double last_checkpoint = cur.loss;
    for (int it = 1; it <= max_iter; ++it) {
        for (double g : cur.grad_b)
            if (!std::isfinite(g))
                throw NumericError("head training diverged at iteration " + std::to_string(it));
        Head trial = head;
        bool accepted = false;
        while (lr >= 1e-14) {
            for (std::size_t i = 0; i < head.W.size(); ++i)
                trial.W[i] = head.W[i] - lr * cur.grad_W[i];
            for (std::size_t i = 0; i < head.b.size(); ++i)
                trial.b[i] = head.b[i] - lr * cur.grad_b[i];
            auto next = eval_batch(trial, X, y, all);
            if (std::isfinite(next.loss) && next.loss <= cur.loss) {
                head.W = trial.W;
                head.b = trial.b;
                cur = std::move(next);
                accepted = true;
                lr = std::min(lr * 1.5, cfg.learning_rate);  // recover after halving
                break;
            }
            lr *= 0.5;
        }
        if (!accepted) break;  // step size exhausted at a kink
        if (it % 50 == 0) {
            head.loss_trace.push_back(cur.loss);
            const double improvement = last_checkpoint - cur.loss;
            if (improvement < cfg.rel_tol * std::max(1.0, std::abs(last_checkpoint))) break;
            last_checkpoint = cur.loss;
        }
    }
    head.loss_trace.push_back(cur.loss);
    head.final_loss = cur.loss;
}

// Deterministic minibatch descent (fixed step, seeded shuffle).
inline void train_minibatch(Head& head, const FeatureMatrix& X, std::span<const double> y,
                            const HeadTrainConfig& cfg, int max_iter) {
    const std::size_t n = X.size();
    const auto bsz = static_cast<std::size_t>(cfg.minibatch);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle(cfg.seed, "head/shuffle");
    std::size_t pos = n;  // force a shuffle on first use
    head.loss_trace.clear();
    for (int it = 1; it <= max_iter; ++it) {
        if (pos + bsz > n) {
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(order[i], order[shuffle.next_u64() % (i + 1)]);
            pos = 0;
        }
        std::span<const std::size_t> batch(order.data() + pos, std::min(bsz, n - pos));
        pos += bsz;
        auto ev = eval_batch(head, X, y, batch);
        if (!std::isfinite(ev.loss))
            throw NumericError("head training diverged at iteration " + std::to_string(it));
        for (std::size_t i = 0; i < head.W.size(); ++i) head.W[i] -= cfg.learning_rate * ev.grad_W[i];
        for (std::size_t i = 0; i < head.b.size(); ++i) head.b[i] -= cfg.learning_rate * ev.grad_b[i];
        if (it % 50 == 0) head.loss_trace.push_back(ev.loss);
    }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    head.final_loss = eval_batch(head, X, y, all).loss;
    head.loss_trace.push_back(head.final_loss);
}

inline Head train_head_fixed_nu(HeadKind kind, const FeatureMatrix& X,
                                std::span<const double> y, const HeadTrainConfig& cfg,
                                double nu, int max_iter) {
    Head head = init_head(kind, X, y, cfg, nu);
    if (cfg.minibatch > 0 && static_cast<std::size_t>(cfg.minibatch) < X.size())
        train_minibatch(head, X, y, cfg, max_iter);
    else
        train_full_batch(head, X, y, cfg, max_iter);
    return head;
}

inline double mean_nll(const Head& head, const FeatureMatrix& X, std::span<const double> y,
                       std::span<const std::size_t> subset) {
    return eval_batch(head, X, y, subset).loss;
}

} // namespace detail

// Trains a head by gradient descent on the mean negative log-likelihood
// (distribution kinds) or the mean pinball loss over the level grid
// (quantile kind). For kinds with a nu parameter and cfg.nu == 0, nu is
// selected on the grid by validation NLL (smallest candidates first) and the
// winner is retrained on the full data.
inline Head train_head(HeadKind kind, const FeatureMatrix& features,
                       std::span<const double> targets, const HeadTrainConfig& cfg) {
    cfg.validate();
    if (features.empty() || features.size() != targets.size())
        throw DataError("train_head: features/targets size mismatch");
    for (const auto& row : features) {
        if (row.size() != features.front().size())
            throw DataError("train_head: ragged feature matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw DataError("train_head: non-finite feature");
    }
    for (double v : targets)
        if (!std::isfinite(v)) throw DataError("train_head: non-finite target");
    const int out_dim = detail::head_output_dim(kind, cfg.levels);
    if (static_cast<int>(features.size()) < 10 * out_dim)
        throw DataError("train_head: need at least 10 observations per output");

    const bool needs_nu = kind == HeadKind::student_t || kind == HeadKind::mixture;
    if (!needs_nu || cfg.nu > 0.0)
        return detail::train_head_fixed_nu(kind, features, targets, cfg,
                                           cfg.nu > 0.0 ? cfg.nu : 5.0, cfg.max_iter);

    // nu selection: contiguous train/validation split, reduced budget per
    // candidate, full retrain at the winner
    const auto n = features.size();
    const auto n_train = static_cast<std::size_t>(
        std::max<double>(1.0, std::floor(static_cast<double>(n) * (1.0 - cfg.val_fraction))));
    FeatureMatrix X_train(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<double> y_train(targets.begin(), targets.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> val_idx(n - n_train);
    std::iota(val_idx.begin(), val_idx.end(), n_train);
    std::vector<double> y_all(targets.begin(), targets.end());

    const int budget = cfg.selection_iter > 0 ? cfg.selection_iter : std::max(1, cfg.max_iter / 4);
    double best_nu = nu_grid().front();
    double best_nll = std::numeric_limits<double>::infinity();
    for (double nu : nu_grid()) {
        auto candidate = detail::train_head_fixed_nu(kind, X_train, y_train, cfg, nu, budget);
        const double nll = detail::mean_nll(candidate, features, y_all, val_idx);
        if (nll < best_nll) {
            best_nll = nll;
            best_nu = nu;
        }
    }
    return detail::train_head_fixed_nu(kind, features, targets, cfg, best_nu, cfg.max_iter);
}

// Worst relative disagreement between the analytic parameter gradient and a
// central finite difference (step 1e-5). Loss terms within 10*step of a
// pinball or laplace kink are excluded on both sides of the comparison.
inline double gradient_check(const Head& head, const FeatureMatrix& features,
                             std::span<const double> targets) {
    if (features.empty() || features.size() != targets.size())
        throw DataError("gradient_check: features/targets size mismatch");
    const double step = 1e-5;

    detail::TermMask mask = [&](std::size_t i, std::size_t term) {
        const auto raw = head.raw_outputs(features[i]);
        if (head.kind == HeadKind::quantile)
            return std::abs(raw[term] - targets[i]) > 10.0 * step;
        if (head.kind == HeadKind::mixture)
            return std::abs(targets[i] - raw[detail::kLapMu]) > 10.0 * step;
        return true;
    };

    std::vector<std::size_t> all(features.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto analytic = detail::eval_batch(head, features, targets, all, &mask);

    auto loss_at = [&](const Head& h) {
        return detail::eval_batch(h, features, targets, all, &mask).loss;
    };
    double worst = 0.0;
    Head probe = head;
    auto check_param = [&](double& slot, double analytic_grad) {
        const double saved = slot;
        slot = saved + step;
        const double up = loss_at(probe);
        slot = saved - step;
        const double down = loss_at(probe);
        slot = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double rel = std::abs(analytic_grad - numeric) /
                           std::max({1.0, std::abs(analytic_grad), std::abs(numeric)});
        worst = std::max(worst, rel);
    };
    for (std::size_t i = 0; i < probe.W.size(); ++i) check_param(probe.W[i], analytic.grad_W[i]);
    for (std::size_t i = 0; i < probe.b.size(); ++i) check_param(probe.b[i], analytic.grad_b[i]);
    return worst;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json head_to_json(const Head& h) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(h.kind);
    j["feature_dim"] = h.feature_dim;
    j["output_dim"] = h.output_dim;
    j["weights"] = h.W;
    j["bias"] = h.b;
    std::vector<std::string> links;
    switch (h.kind) {
        case HeadKind::quantile:
            links.assign(h.levels.size(), "identity");
            j["levels"] = h.levels.levels();
            break;
        case HeadKind::gaussian:
        case HeadKind::student_t:
            links = {"identity", "softplus"};
            break;
        case HeadKind::mixture:
            links = {"identity", "softplus", "identity", "softplus", "identity",
                     "softplus", "identity", "softplus", "simplex",  "simplex",
                     "simplex",  "simplex"};
            break;
    }
    j["links"] = links;
    if (h.kind == HeadKind::student_t || h.kind == HeadKind::mixture) j["nu"] = h.nu;
    if (h.kind == HeadKind::mixture) j["lognormal_enabled"] = h.lognormal_enabled;
    j["loss_trace"] = h.loss_trace;
    j["final_loss"] = h.final_loss;
    return j;
}

inline Head head_from_json(const nlohmann::json& j) {
    Head h;
    h.kind = head_kind_from_string(j.at("kind").get<std::string>());
    h.feature_dim = j.at("feature_dim").get<int>();
    h.output_dim = j.at("output_dim").get<int>();
    h.W = j.at("weights").get<std::vector<double>>();
    h.b = j.at("bias").get<std::vector<double>>();
    if (j.contains("levels"))
        h.levels = QuantileLevels(j.at("levels").get<std::vector<double>>());
    if (j.contains("nu")) h.nu = j.at("nu").get<double>();
    if (j.contains("lognormal_enabled")) h.lognormal_enabled = j.at("lognormal_enabled").get<bool>();
    if (j.contains("loss_trace")) h.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    if (j.contains("final_loss")) h.final_loss = j.at("final_loss").get<double>();
    if (h.W.size() != static_cast<std::size_t>(h.output_dim * h.feature_dim) ||
        h.b.size() != static_cast<std::size_t>(h.output_dim))
        throw DataError("head json: shape mismatch");
    return h;
}

} // namespace tscal
