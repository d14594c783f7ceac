#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>

#include "nadpcm/detail/rng.hpp"
#include "nadpcm/mlp.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace nadpcm;

namespace {

MlpWeights random_weights(std::uint32_t seed, double range = 0.8, int n_in = 10, int n_hidden = 2) {
    detail::Rng rng(seed);
    MlpWeights w = MlpWeights::zero(n_in, n_hidden);
    std::vector<double> theta(static_cast<std::size_t>(w.param_count()));
    for (auto& v : theta) v = rng.uniform(-range, range);
    return MlpWeights::unpack(theta, n_in, n_hidden);
}

TrainingSet random_set(std::uint32_t seed, std::size_t n, int dim = 10) {
    detail::Rng rng(seed);
    TrainingSet set;
    set.input_dim = dim;
    for (std::size_t k = 0; k < n; ++k) {
        for (int i = 0; i < dim; ++i) set.inputs.push_back(rng.uniform(-1.0, 1.0));
        set.targets.push_back(rng.uniform(-1.0, 1.0));
    }
    return set;
}

// Targets produced by a frozen network over random inputs.
TrainingSet teacher_set(const MlpWeights& teacher, std::uint32_t seed, std::size_t n) {
    TrainingSet set = random_set(seed, n, teacher.n_in);
    for (std::size_t k = 0; k < n; ++k) set.targets[k] = mlp_forward(teacher, set.input(k));
    return set;
}

}  // namespace

TEST_CASE("mlp_forward hand examples") {
    CHECK(mlp_forward(MlpWeights::zero(), std::vector<double>(10, 0.3)) == 0.0);

    MlpWeights w = MlpWeights::zero();
    w.w2 = {3.0, -1.0};
    w.b2 = 0.5;
    CHECK(mlp_forward(w, std::vector<double>(10, 0.7)) == 0.5);

    MlpWeights v = MlpWeights::zero();
    v.w1[0] = 1.0;  // first hidden unit looks at input[0]
    v.w2 = {2.0, 0.0};
    std::vector<double> input(10, 0.0);
    input[0] = 0.3;
    CHECK_THAT(mlp_forward(v, input), Catch::Matchers::WithinAbs(2.0 * std::tanh(0.3), 1e-12));
}

TEST_CASE("pack/unpack round-trips bit-exactly") {
    const auto w = random_weights(21);
    const auto theta = w.pack();
    REQUIRE(theta.size() == 25);
    const auto back = MlpWeights::unpack(theta, w.n_in, w.n_hidden);
    CHECK(back.pack() == theta);
    CHECK(back.w1 == w.w1);
    CHECK(back.b1 == w.b1);
    CHECK(back.w2 == w.w2);
    CHECK(back.b2 == w.b2);
}

TEST_CASE("training set slides a ten-sample pattern") {
    const auto window = random_samples(31, 25, 0.9);
    const auto set = make_training_set(window, 10);
    REQUIRE(set.size() == 15);
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto in = set.input(k);
        for (int i = 0; i < 10; ++i) CHECK(in[static_cast<std::size_t>(i)] == window[k + static_cast<std::size_t>(i)]);
        CHECK(set.targets[k] == window[k + 10]);
    }
    CHECK_THROWS_AS(make_training_set(std::vector<double>(10, 0.0), 10), ConfigError);
}

TEST_CASE("jacobian structure at special points") {
    const auto set = random_set(41, 6);
    {
        const auto w = random_weights(42);
        const auto jac = mlp_jacobian(w, set);
        for (std::size_t k = 0; k < set.size(); ++k) CHECK(jac(k, 24) == 1.0);  // b2 column
    }
    {
        const auto zero = MlpWeights::zero();
        const auto jac = mlp_jacobian(zero, set);
        for (std::size_t k = 0; k < set.size(); ++k)
            for (std::size_t c = 0; c < 22; ++c) CHECK(jac(k, c) == 0.0);  // w1 and b1 columns
    }
}

TEST_CASE("jacobian matches central finite differences") {
    const double h = 1e-6;
    double worst = 0.0;
    for (std::uint32_t seed = 1; seed <= 10; ++seed) {
        const auto w = random_weights(seed * 7 + 1, 1.2);
        const auto set = random_set(seed * 7 + 2, 4);
        const auto jac = mlp_jacobian(w, set);
        for (std::size_t k = 0; k < set.size(); ++k) {
            const auto fd = oracles::fd_jacobian_row(w, set.input(k), h);
            for (std::size_t c = 0; c < fd.size(); ++c) {
                const double rel = std::abs(jac(k, c) - fd[c]) / std::max(std::abs(fd[c]), 1e-5);
                worst = std::max(worst, rel);
            }
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("sigmoid activation variant") {
    MlpWeights w = MlpWeights::zero();
    w.w1[0] = 0.8;
    w.b1[0] = -0.2;
    w.w2 = {1.5, 0.0};
    w.b2 = 0.25;
    std::vector<double> input(10, 0.0);
    input[0] = 0.4;
    const double z = 0.8 * 0.4 - 0.2;
    const double expected = 1.5 / (1.0 + std::exp(-z)) + 0.25;
    CHECK_THAT(mlp_forward(w, input, Activation::sigmoid_fn),
               Catch::Matchers::WithinAbs(expected, 1e-15));

    // jacobian stays consistent with finite differences under sigmoid too
    const auto set = random_set(141, 4);
    const auto v = random_weights(142, 1.0);
    const auto jac = mlp_jacobian(v, set, Activation::sigmoid_fn);
    for (std::size_t k = 0; k < set.size(); ++k) {
        auto theta = v.pack();
        for (std::size_t c = 0; c < theta.size(); ++c) {
            auto plus = theta, minus = theta;
            plus[c] += 1e-6;
            minus[c] -= 1e-6;
            const double fd = (mlp_forward(MlpWeights::unpack(plus), set.input(k), Activation::sigmoid_fn) -
                               mlp_forward(MlpWeights::unpack(minus), set.input(k), Activation::sigmoid_fn)) /
                              2e-6;
            CHECK_THAT(jac(k, c), Catch::Matchers::WithinAbs(fd, 1e-6));
        }
    }
}

TEST_CASE("lm_train with zero epochs returns the input") {
    const auto w = random_weights(55);
    const auto set = random_set(56, 20);
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto out = lm_train(w, set, cfg);
    CHECK(out.weights.pack() == w.pack());
    CHECK(out.final_sse == mlp_sse(w, set));
}

TEST_CASE("lm_train interpolates a single pattern") {
    TrainingSet set = random_set(61, 1);
    TrainConfig cfg;
    cfg.epochs = 6;
    const auto out = lm_train(random_weights(62, 0.2), set, cfg);
    CHECK(out.final_sse < 1e-6);
}

TEST_CASE("lm_train leaves an exact minimum untouched") {
    const auto teacher = random_weights(71, 0.7);
    const auto set = teacher_set(teacher, 72, 40);
    TrainConfig cfg;
    cfg.epochs = 6;
    const auto out = lm_train(teacher, set, cfg);
    CHECK(out.final_sse == 0.0);
    CHECK(out.weights.pack() == teacher.pack());
}

TEST_CASE("lm_train never increases the SSE") {
    for (std::uint32_t seed = 1; seed <= 8; ++seed) {
        const auto w = random_weights(seed * 13, 1.5);
        const auto set = random_set(seed * 13 + 5, 30);
        const double before = mlp_sse(w, set);
        TrainConfig cfg;
        cfg.epochs = 5;
        const auto out = lm_train(w, set, cfg);
        CHECK(out.final_sse <= before);
        CHECK_THAT(mlp_sse(out.weights, set), Catch::Matchers::WithinRel(out.final_sse, 1e-12));
    }
}

TEST_CASE("multistart with only the previous candidate") {
    const auto prev = random_weights(81, 0.3);
    const auto set = random_set(82, 25);
    MultistartConfig cfg;
    cfg.n_random = 0;
    cfg.epochs_prev = 3;
    const auto res = multistart_train(prev, set, set, cfg);
    CHECK(res.selected_prev);
    CHECK(res.selected_index == 0);
    // the one candidate is prev trained three epochs
    TrainConfig lm = cfg.lm;
    lm.epochs = 3;
    const auto direct = lm_train(prev, set, lm);
    CHECK(res.weights.pack() == direct.weights.pack());
}

TEST_CASE("multistart requires at least one candidate") {
    const auto set = random_set(83, 25);
    MultistartConfig cfg;
    cfg.n_random = 0;
    CHECK_THROWS_AS(multistart_train(std::nullopt, set, set, cfg), ConfigError);
}

TEST_CASE("multistart is deterministic for a fixed seed") {
    const auto prev = random_weights(91, 0.3);
    const auto set = random_set(92, 30);
    MultistartConfig cfg;
    cfg.rng_seed = 12345;
    const auto a = multistart_train(prev, set, set, cfg);
    const auto b = multistart_train(prev, set, set, cfg);
    CHECK(a.weights.pack() == b.weights.pack());
    CHECK(a.selected_index == b.selected_index);
    CHECK(a.eval_sse == b.eval_sse);
}

TEST_CASE("multistart keeps the generator when it is supplied as previous weights") {
    const auto teacher = random_weights(101, 0.6);
    const auto set = teacher_set(teacher, 102, 50);
    MultistartConfig cfg;
    cfg.rng_seed = 7;
    const auto res = multistart_train(teacher, set, set, cfg);
    CHECK(res.selected_prev);
    CHECK(res.eval_sse <= 1e-12);
    CHECK(res.weights.pack() == teacher.pack());
}

TEST_CASE("multistart selection rule and subset property") {
    const auto prev = random_weights(111, 0.4);
    const auto set = random_set(112, 40);
    MultistartConfig full;
    full.n_random = 3;
    full.rng_seed = 99;
    const auto best = multistart_train(prev, set, set, full);

    // winner beats every surviving candidate
    for (double sse : best.candidate_eval_sse)
        if (std::isfinite(sse)) CHECK(best.eval_sse <= sse);

    // restricting the candidate pool can only hurt, because candidate i's
    // initialization depends only on (seed, i)
    for (int n_random = 0; n_random <= 2; ++n_random) {
        MultistartConfig sub = full;
        sub.n_random = n_random;
        const auto worse = multistart_train(prev, set, set, sub);
        CHECK(best.eval_sse <= worse.eval_sse);
    }
    MultistartConfig no_prev = full;
    const auto without = multistart_train(std::nullopt, set, set, no_prev);
    CHECK(best.eval_sse <= without.eval_sse);
}
