#pragma once

// One-hidden-layer perceptron for one-step waveform prediction (10x2x1 by
// default), trained with full-batch Levenberg-Marquardt, plus the multistart
// scheme that seeds one candidate from the previous frame's weights.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "nadpcm/detail/linalg.hpp"
#include "nadpcm/detail/rng.hpp"
#include "nadpcm/errors.hpp"

namespace nadpcm {

enum class Activation : std::uint8_t { tanh_fn = 0, sigmoid_fn = 1 };

struct MlpWeights {
    int n_in = 10;
    int n_hidden = 2;
    std::vector<double> w1;  // n_hidden x n_in, row-major
    std::vector<double> b1;  // n_hidden
    std::vector<double> w2;  // n_hidden
    double b2 = 0.0;

    static MlpWeights zero(int n_in = 10, int n_hidden = 2) {
        MlpWeights w;
        w.n_in = n_in;
        w.n_hidden = n_hidden;
        w.w1.assign(static_cast<std::size_t>(n_hidden) * n_in, 0.0);
        w.b1.assign(static_cast<std::size_t>(n_hidden), 0.0);
        w.w2.assign(static_cast<std::size_t>(n_hidden), 0.0);
        return w;
    }

    int param_count() const { return n_hidden * (n_in + 2) + 1; }

    // Flat view order: w1 row-major, b1, w2, b2.
    std::vector<double> pack() const {
        std::vector<double> theta;
        theta.reserve(static_cast<std::size_t>(param_count()));
        theta.insert(theta.end(), w1.begin(), w1.end());
        theta.insert(theta.end(), b1.begin(), b1.end());
        theta.insert(theta.end(), w2.begin(), w2.end());
        theta.push_back(b2);
        return theta;
    }

    static MlpWeights unpack(std::span<const double> theta, int n_in = 10, int n_hidden = 2) {
        MlpWeights w = zero(n_in, n_hidden);
        if (theta.size() != static_cast<std::size_t>(w.param_count()))
            throw ConfigError("MlpWeights::unpack: wrong parameter count");
        std::size_t k = 0;
        for (auto& v : w.w1) v = theta[k++];
        for (auto& v : w.b1) v = theta[k++];
        for (auto& v : w.w2) v = theta[k++];
        w.b2 = theta[k];
        return w;
    }

    bool finite() const {
        for (double v : w1) if (!std::isfinite(v)) return false;
        for (double v : b1) if (!std::isfinite(v)) return false;
        for (double v : w2) if (!std::isfinite(v)) return false;
        return std::isfinite(b2);
    }
};

// Sliding one-step prediction patterns: input k is window[k..k+dim), target k
// is window[k+dim].
struct TrainingSet {
    int input_dim = 10;
    std::vector<double> inputs;   // N x input_dim, row-major
    std::vector<double> targets;  // N

    std::size_t size() const { return targets.size(); }
    std::span<const double> input(std::size_t k) const {
        return {inputs.data() + k * static_cast<std::size_t>(input_dim),
                static_cast<std::size_t>(input_dim)};
    }
};

inline TrainingSet make_training_set(std::span<const double> window, int input_dim = 10) {
    if (input_dim < 1) throw ConfigError("make_training_set: input_dim must be >= 1");
    if (window.size() < static_cast<std::size_t>(input_dim) + 1)
        throw ConfigError("make_training_set: window too short for one pattern");
    TrainingSet set;
    set.input_dim = input_dim;
    const std::size_t n = window.size() - static_cast<std::size_t>(input_dim);
    set.inputs.reserve(n * static_cast<std::size_t>(input_dim));
    set.targets.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        set.inputs.insert(set.inputs.end(), window.begin() + static_cast<std::ptrdiff_t>(k),
                          window.begin() + static_cast<std::ptrdiff_t>(k + input_dim));
        set.targets.push_back(window[k + static_cast<std::size_t>(input_dim)]);
    }
    return set;
}

namespace detail {
inline double activate(double z, Activation act) {
    return act == Activation::tanh_fn ? std::tanh(z) : 1.0 / (1.0 + std::exp(-z));
}
inline double activate_deriv(double h, Activation act) {
    return act == Activation::tanh_fn ? 1.0 - h * h : h * (1.0 - h);
}
}  // namespace detail

inline double mlp_forward(const MlpWeights& w, std::span<const double> input,
                          Activation act = Activation::tanh_fn) {
    double y = w.b2;
    for (int j = 0; j < w.n_hidden; ++j) {
        double z = w.b1[static_cast<std::size_t>(j)];
        const double* row = &w.w1[static_cast<std::size_t>(j) * w.n_in];
        for (int i = 0; i < w.n_in; ++i) z += row[i] * input[static_cast<std::size_t>(i)];
        y += w.w2[static_cast<std::size_t>(j)] * detail::activate(z, act);
    }
    return y;
}

// Sum of squared one-step prediction errors over a set (the open-loop score
// used to rank multistart candidates).
inline double mlp_sse(const MlpWeights& w, const TrainingSet& data,
                      Activation act = Activation::tanh_fn) {
    double sse = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const double e = data.targets[k] - mlp_forward(w, data.input(k), act);
        sse += e * e;
    }
    return sse;
}

// Row k holds the derivative of the network output at input k with respect
// to the flat parameter vector (w1 row-major, b1, w2, b2).
inline detail::Mat mlp_jacobian(const MlpWeights& w, const TrainingSet& data,
                                Activation act = Activation::tanh_fn) {
    if (data.size() == 0) throw ConfigError("mlp_jacobian: empty training set");
    const int p = w.param_count();
    detail::Mat jac(data.size(), static_cast<std::size_t>(p));
    const std::size_t off_b1 = static_cast<std::size_t>(w.n_hidden) * w.n_in;
    const std::size_t off_w2 = off_b1 + static_cast<std::size_t>(w.n_hidden);
    const std::size_t off_b2 = off_w2 + static_cast<std::size_t>(w.n_hidden);

    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto x = data.input(k);
        double* row = &jac.data[k * static_cast<std::size_t>(p)];
        for (int j = 0; j < w.n_hidden; ++j) {
            double z = w.b1[static_cast<std::size_t>(j)];
            const double* wrow = &w.w1[static_cast<std::size_t>(j) * w.n_in];
            for (int i = 0; i < w.n_in; ++i) z += wrow[i] * x[static_cast<std::size_t>(i)];
            const double h = detail::activate(z, act);
            const double back = w.w2[static_cast<std::size_t>(j)] * detail::activate_deriv(h, act);
            for (int i = 0; i < w.n_in; ++i)
                row[static_cast<std::size_t>(j) * w.n_in + i] = back * x[static_cast<std::size_t>(i)];
            row[off_b1 + static_cast<std::size_t>(j)] = back;
            row[off_w2 + static_cast<std::size_t>(j)] = h;
        }
        row[off_b2] = 1.0;
    }
    return jac;
}

struct TrainConfig {
    int epochs = 6;
    double lm_lambda_init = 1e-2;
    double lm_lambda_up = 10.0;
    double lm_lambda_down = 0.1;
    double lambda_max = 1e10;
    std::uint32_t rng_seed = 1;  // used by callers that draw initial weights
};

struct TrainOutcome {
    MlpWeights weights;
    double final_sse = 0.0;
};

// Full-batch Levenberg-Marquardt. One epoch = one accepted or exhausted
// damped Gauss-Newton step: solve (J'J + lambda I) d = J'e, accept only on a
// strict SSE decrease. Returned SSE never exceeds the initial SSE.
inline TrainOutcome lm_train(const MlpWeights& init, const TrainingSet& data, const TrainConfig& cfg,
                             Activation act = Activation::tanh_fn) {
    if (data.size() == 0) throw ConfigError("lm_train: empty training set");
    if (!(cfg.lm_lambda_down < 1.0 && 1.0 < cfg.lm_lambda_up))
        throw ConfigError("lm_train: need lm_lambda_down < 1 < lm_lambda_up");
    if (!(cfg.lm_lambda_init > 0.0) || !(cfg.lambda_max > 0.0))
        throw ConfigError("lm_train: lambda values must be positive");
    if (!init.finite()) throw NumericalError("lm_train: non-finite initial weights");

    MlpWeights weights = init;
    double sse = mlp_sse(weights, data, act);
    if (!std::isfinite(sse)) throw NumericalError("lm_train: non-finite initial SSE");
    double lambda = cfg.lm_lambda_init;
    const std::size_t n = data.size();
    const int p = weights.param_count();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (sse == 0.0) break;  // strict decrease is impossible

        detail::Mat jac = mlp_jacobian(weights, data, act);
        std::vector<double> residual(n);
        for (std::size_t k = 0; k < n; ++k)
            residual[k] = data.targets[k] - mlp_forward(weights, data.input(k), act);
        for (double v : jac.data)
            if (!std::isfinite(v)) throw NumericalError("lm_train: non-finite jacobian");

        const detail::Mat hessian = gram(jac);
        const std::vector<double> gradient = mul_at(jac, residual);

        bool accepted = false;
        while (lambda <= cfg.lambda_max) {
            detail::Mat damped = hessian;
            for (int i = 0; i < p; ++i) damped(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) += lambda;
            std::vector<double> step = gradient;
            if (!cholesky_solve(damped, step))
                throw NumericalError("lm_train: singular damped normal equations");

            std::vector<double> theta = weights.pack();
            for (int i = 0; i < p; ++i) theta[static_cast<std::size_t>(i)] += step[static_cast<std::size_t>(i)];
            const MlpWeights trial = MlpWeights::unpack(theta, weights.n_in, weights.n_hidden);
            const double trial_sse = trial.finite() ? mlp_sse(trial, data, act)
                                                    : std::numeric_limits<double>::infinity();

            if (trial_sse < sse) {
                weights = trial;
                sse = trial_sse;
                lambda *= cfg.lm_lambda_down;
                accepted = true;
                break;
            }
            lambda *= cfg.lm_lambda_up;
        }
        if (!accepted) break;  // lambda exhausted; later epochs would repeat this
    }
    return {weights, sse};
}

struct MultistartConfig {
    int n_random = 3;       // three random starts; the previous-frame weights
    int epochs_random = 6;  // take the fourth candidate slot
    int epochs_prev = 3;
    double init_range = 0.2;  // uniform [-range, range] per parameter
    int n_hidden = 2;
    std::uint32_t rng_seed = 1;
    TrainConfig lm{};  // epochs field is overridden per candidate
    Activation activation = Activation::tanh_fn;
};

struct MultistartResult {
    MlpWeights weights;
    bool selected_prev = false;
    int selected_index = -1;   // 0..n_random-1 random, n_random = previous
    double eval_sse = 0.0;
    double train_sse = 0.0;
    std::vector<double> candidate_eval_sse;  // NaN marks a failed candidate
};

using MlpEvaluator = std::function<double(const MlpWeights&)>;

// Trains n_random seeded random initializations plus (when present) the
// previous-frame weights, scores every survivor on eval_window, and returns
// the best. Ties go to the previous-weights candidate, then the lowest
// index. Candidate i's initialization depends only on (rng_seed, i), so a
// run restricted to fewer candidates trains the same networks.
inline MultistartResult multistart_train(const std::optional<MlpWeights>& prev_weights,
                                         const TrainingSet& data, const TrainingSet& eval_window,
                                         const MultistartConfig& cfg,
                                         const MlpEvaluator* evaluator = nullptr) {
    if (cfg.n_random < 0) throw ConfigError("multistart_train: n_random must be >= 0");
    if (cfg.n_random == 0 && !prev_weights)
        throw ConfigError("multistart_train: need n_random >= 1 or previous weights");
    if (data.size() == 0) throw ConfigError("multistart_train: empty training set");

    const int n_candidates = cfg.n_random + (prev_weights ? 1 : 0);
    const int prev_index = cfg.n_random;
    std::vector<double> scores(static_cast<std::size_t>(n_candidates),
                               std::numeric_limits<double>::quiet_NaN());
    std::vector<MlpWeights> trained(static_cast<std::size_t>(n_candidates));
    std::vector<double> train_sse(static_cast<std::size_t>(n_candidates), 0.0);

    auto run_candidate = [&](int index, const MlpWeights& init, int epochs) {
        TrainConfig lm_cfg = cfg.lm;
        lm_cfg.epochs = epochs;
        try {
            TrainOutcome out = lm_train(init, data, lm_cfg, cfg.activation);
            const double score = evaluator ? (*evaluator)(out.weights)
                                           : mlp_sse(out.weights, eval_window, cfg.activation);
            if (!std::isfinite(score)) return;
            trained[static_cast<std::size_t>(index)] = std::move(out.weights);
            train_sse[static_cast<std::size_t>(index)] = out.final_sse;
            scores[static_cast<std::size_t>(index)] = score;
        } catch (const NumericalError&) {
            // failed candidate: excluded from selection
        }
    };

    for (int i = 0; i < cfg.n_random; ++i) {
        detail::Rng rng(cfg.rng_seed, static_cast<std::uint32_t>(i));
        MlpWeights init = MlpWeights::zero(data.input_dim, cfg.n_hidden);
        std::vector<double> theta(static_cast<std::size_t>(init.param_count()));
        for (auto& v : theta) v = rng.uniform(-cfg.init_range, cfg.init_range);
        init = MlpWeights::unpack(theta, data.input_dim, cfg.n_hidden);
        run_candidate(i, init, cfg.epochs_random);
    }
    if (prev_weights) run_candidate(prev_index, *prev_weights, cfg.epochs_prev);

    // previous-weights candidate first so ties resolve in its favour
    int best = -1;
    if (prev_weights && std::isfinite(scores[static_cast<std::size_t>(prev_index)])) best = prev_index;
    for (int i = 0; i < cfg.n_random; ++i) {
        const double s = scores[static_cast<std::size_t>(i)];
        if (!std::isfinite(s)) continue;
        if (best < 0 || s < scores[static_cast<std::size_t>(best)]) best = i;
    }
    if (best < 0) throw NumericalError("multistart_train: all candidates failed");

    MultistartResult res;
    res.weights = trained[static_cast<std::size_t>(best)];
    res.selected_prev = (prev_weights && best == prev_index);
    res.selected_index = best;
    res.eval_sse = scores[static_cast<std::size_t>(best)];
    res.train_sse = train_sse[static_cast<std::size_t>(best)];
    res.candidate_eval_sse = std::move(scores);
    return res;
}

}  // namespace nadpcm
