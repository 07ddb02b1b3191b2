#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "loralab/optim.hpp"
#include "loralab/rng.hpp"

#include <cmath>

using namespace loralab;

namespace {

double rel_err(const Matrix& got, const Matrix& want) {
    const double denom = frobenius_norm(want);
    return frobenius_norm(got - want) / (denom > 0.0 ? denom : 1.0);
}

LoraLinear make_layer(Matrix a, Matrix b, double s = 1.0) {
    LoraLinear layer;
    layer.r = a.rows();
    layer.n = a.cols();
    layer.m = b.rows();
    layer.w0 = Matrix(layer.m, layer.n);
    layer.a = std::move(a);
    layer.b = std::move(b);
    layer.s = s;
    return layer;
}

GradientBundle bundle(Matrix g_a, Matrix g_b) {
    GradientBundle g;
    g.raw_grad_a = std::move(g_a);
    g.raw_grad_b = std::move(g_b);
    return g;
}

OptimizerConfig sign_config(double eta, double w = 0.0, double ratio = 1.0) {
    OptimizerConfig c;
    c.kind = OptimizerKind::SignSgd;
    c.eta = eta;
    c.weight_decay = w;
    c.lora_plus_ratio = ratio;
    return c;
}

OptimizerConfig adam_config(double eta, double w = 0.0) {
    OptimizerConfig c;
    c.kind = OptimizerKind::AdamW;
    c.eta = eta;
    c.weight_decay = w;
    return c;
}

}  // namespace

TEST_CASE("optimize_gradient: sign") {
    OptimizerState state = make_optimizer_state(sign_config(0.1), 1, 2, 1, 1);
    const Matrix out = optimize_gradient(state, Matrix(1, 2, {0.3, -0.2}), Param::A);
    CHECK(out == Matrix(1, 2, {1, -1}));
}

TEST_CASE("optimize_gradient: adam first step") {
    OptimizerState state = make_optimizer_state(adam_config(0.1), 1, 1, 1, 1);
    const Matrix out = optimize_gradient(state, Matrix(1, 1, {1}), Param::A);
    CHECK(state.moments_a->m(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(state.moments_a->v(0, 0) == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(out(0, 0) == doctest::Approx(1.0 / (1.0 + 1e-8)).epsilon(1e-7));

    OptimizerState zero_state = make_optimizer_state(adam_config(0.1), 2, 2, 1, 1);
    CHECK(optimize_gradient(zero_state, Matrix(2, 2), Param::A) == Matrix(2, 2));
}

TEST_CASE("adam moments follow the recurrences") {
    OptimizerState state = make_optimizer_state(adam_config(1e-3), 2, 2, 1, 1);
    SeededRng rng(123);
    double em[4] = {0, 0, 0, 0};
    double ev[4] = {0, 0, 0, 0};
    const double b1 = state.config.beta1, b2 = state.config.beta2, eps = state.config.epsilon;
    for (int t = 1; t <= 5; ++t) {
        const Matrix g = sample_gaussian(rng, 2, 2, 1.0);
        const Matrix out = optimize_gradient(state, g, Param::A);
        for (int i = 0; i < 4; ++i) {
            em[i] = b1 * em[i] + (1 - b1) * g.data()[i];
            ev[i] = b2 * ev[i] + (1 - b2) * g.data()[i] * g.data()[i];
            CHECK(std::fabs(state.moments_a->m.data()[i] - em[i]) <= 1e-12);
            CHECK(std::fabs(state.moments_a->v.data()[i] - ev[i]) <= 1e-12);
            CHECK(state.moments_a->v.data()[i] >= 0.0);
            const double m_hat = em[i] / (1 - std::pow(b1, t));
            const double v_hat = ev[i] / (1 - std::pow(b2, t));
            CHECK(std::fabs(out.data()[i] - m_hat / (std::sqrt(v_hat) + eps)) <= 1e-12);
        }
        state.step_t += 1;  // standalone use; steps normally advance this
    }
}

TEST_CASE("stable_condition") {
    // 2x4 of 0.5 has norm sqrt(2); 3x2 of 0.4 has norm sqrt(0.96)
    CHECK(stable_condition(Matrix::filled(2, 4, 0.5), Matrix::filled(3, 2, 0.4), 4, 3));
    CHECK(stable_condition(Matrix(1, 2, {0.1, 0.1}), Matrix(2, 2), 2, 2));
    // equality is not strict inequality
    CHECK_FALSE(stable_condition(Matrix(1, 1, {2}), Matrix(1, 1, {2}), 1, 1));
}

TEST_CASE("stable_lora_step: pure shrink decay") {
    LoraLinear layer = make_layer(Matrix(1, 1, {1}), Matrix(1, 1));
    OptimizerState state = make_optimizer_state(sign_config(0.1), 1, 1, 1, 1,
                                                StableLoraState{0.001, false, 0});
    const GradientBundle zero = bundle(Matrix(1, 1), Matrix(1, 1));
    for (int i = 0; i < 3; ++i) stable_lora_step(state, layer, zero);
    CHECK(layer.a(0, 0) == doctest::Approx(0.997002999).epsilon(1e-12));
    CHECK(state.stable_lora->shrink_steps_applied == 3);
    CHECK_FALSE(state.stable_lora->stable);
    CHECK(state.step_t == 3);
}

TEST_CASE("stable_lora_step: latched state behaves like a plain step") {
    SeededRng rng(5);
    const Matrix a0 = sample_gaussian(rng, 2, 3, 1.0);
    const Matrix b0 = sample_gaussian(rng, 4, 2, 1.0);
    const GradientBundle g = bundle(sample_gaussian(rng, 2, 3, 1.0),
                                    sample_gaussian(rng, 4, 2, 1.0));

    LoraLinear latched = make_layer(a0, b0);
    OptimizerState latched_state = make_optimizer_state(sign_config(0.05, 0.01), 2, 3, 4, 2,
                                                        StableLoraState{0.01, true, 7});
    stable_lora_step(latched_state, latched, g);

    LoraLinear plain = make_layer(a0, b0);
    OptimizerState plain_state = make_optimizer_state(sign_config(0.05, 0.01), 2, 3, 4, 2);
    plain_step(plain_state, plain, g);

    CHECK(latched.a == plain.a);
    CHECK(latched.b == plain.b);
    CHECK(latched_state.stable_lora->shrink_steps_applied == 7);
}

TEST_CASE("latch is permanent under adversarial norm changes") {
    // b large enough that the condition is false at step 1
    LoraLinear layer = make_layer(Matrix(1, 2, {0.1, 0.1}), Matrix::filled(2, 1, 5.0));
    OptimizerState state = make_optimizer_state(sign_config(0.01), 1, 2, 2, 1,
                                                StableLoraState{0.5, false, 0});
    const GradientBundle zero = bundle(Matrix(1, 2), Matrix(2, 1));

    StepReport first = stable_lora_step(state, layer, zero);
    CHECK_FALSE(first.shrank);
    CHECK(state.stable_lora->stable);

    // zero b externally: the raw condition would now ask for a shrink
    layer.b = Matrix(2, 1);
    CHECK(stable_condition(layer.a, layer.b, layer.n, layer.m));
    const Matrix a_before = layer.a;
    for (int i = 0; i < 10; ++i) {
        StepReport rep = stable_lora_step(state, layer, zero);
        CHECK_FALSE(rep.shrank);
    }
    CHECK(layer.a == a_before);
    CHECK(state.stable_lora->shrink_steps_applied == 0);
    CHECK(state.stable_lora->stable);
}

TEST_CASE("latch flips at most once over random trajectories") {
    SeededRng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        LoraLinear layer = make_layer(sample_gaussian(rng, 2, 4, 1.0),
                                      sample_gaussian(rng, 3, 2, 0.25));
        OptimizerState state = make_optimizer_state(sign_config(0.02, 0.0), 2, 4, 3, 2,
                                                    StableLoraState{0.05, false, 0});
        bool prev_stable = false;
        int transitions = 0;
        std::size_t shrinks_after_latch = 0;
        for (int t = 0; t < 40; ++t) {
            const GradientBundle g = bundle(sample_gaussian(rng, 2, 4, 1.0),
                                            sample_gaussian(rng, 3, 2, 1.0));
            const StepReport rep = stable_lora_step(state, layer, g);
            const bool now = state.stable_lora->stable;
            if (now != prev_stable) {
                CHECK(now);
                ++transitions;
            }
            if (prev_stable && rep.shrank) ++shrinks_after_latch;
            prev_stable = now;
        }
        CHECK(transitions <= 1);
        CHECK(shrinks_after_latch == 0);
    }
}

TEST_CASE("plain_step worked examples") {
    SUBCASE("sign then axpy") {
        LoraLinear layer = make_layer(Matrix(1, 2, {1, 1}), Matrix(1, 1));
        OptimizerState state = make_optimizer_state(sign_config(0.1), 1, 2, 1, 1);
        plain_step(state, layer, bundle(Matrix(1, 2, {0.3, -0.2}), Matrix(1, 1)));
        CHECK(rel_err(layer.a, Matrix(1, 2, {0.9, 1.1})) < 1e-15);
    }
    SUBCASE("pure weight decay") {
        LoraLinear layer = make_layer(Matrix(1, 1, {1}), Matrix(1, 1));
        OptimizerState state = make_optimizer_state(sign_config(0.1, 0.01), 1, 1, 1, 1);
        plain_step(state, layer, bundle(Matrix(1, 1), Matrix(1, 1)));
        CHECK(layer.a(0, 0) == 0.999);
    }
    SUBCASE("zero learning rate freezes everything") {
        SeededRng rng(3);
        const Matrix a0 = sample_gaussian(rng, 2, 2, 1.0);
        LoraLinear layer = make_layer(a0, Matrix(2, 2));
        OptimizerState state = make_optimizer_state(sign_config(0.0, 0.01), 2, 2, 2, 2);
        plain_step(state, layer, bundle(sample_gaussian(rng, 2, 2, 1.0), Matrix(2, 2)));
        CHECK(layer.a == a0);
    }
}

TEST_CASE("textbook update rule with ratio 1 and no shrink state") {
    SeededRng rng(19);
    const Matrix a0 = sample_gaussian(rng, 2, 3, 1.0);
    const Matrix g_raw(2, 3, {1, -1, 1, -1, 0.0, 1});  // sign(g_raw) == g_raw
    const double eta = 0.05, w = 0.02;

    LoraLinear layer = make_layer(a0, Matrix(2, 2));
    OptimizerState state = make_optimizer_state(sign_config(eta, w), 2, 3, 2, 2);
    plain_step(state, layer, bundle(g_raw, Matrix(2, 2)));

    Matrix expect = a0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
        expect.data()[i] = a0.data()[i] - eta * g_raw.data()[i] - eta * w * a0.data()[i];
    }
    CHECK(layer.a == expect);
}

TEST_CASE("lora+ ratio splits the learning rates") {
    const Matrix ones_a = Matrix::filled(1, 2, 1.0);
    const Matrix ones_b = Matrix::filled(2, 1, 1.0);
    LoraLinear layer = make_layer(ones_a, ones_b);
    OptimizerState state = make_optimizer_state(sign_config(0.1, 0.0, 4.0), 1, 2, 2, 1);
    plain_step(state, layer, bundle(Matrix::filled(1, 2, 1.0), Matrix::filled(2, 1, 1.0)));
    CHECK(layer.a(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(layer.b(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("step report carries the applied gradients and pre-update factors") {
    LoraLinear layer = make_layer(Matrix(1, 1, {2.0}), Matrix(1, 1, {0.0}));
    OptimizerState state = make_optimizer_state(sign_config(0.1), 1, 1, 1, 1,
                                                StableLoraState{0.5, false, 0});
    const StepReport rep = stable_lora_step(state, layer, bundle(Matrix(1, 1, {3.0}),
                                                                 Matrix(1, 1, {-3.0})));
    CHECK(rep.shrank);
    CHECK(rep.a_used(0, 0) == doctest::Approx(1.0).epsilon(1e-15));  // post-shrink
    CHECK(rep.g_a(0, 0) == 1.0);
    CHECK(rep.g_b(0, 0) == -1.0);
    CHECK(layer.a(0, 0) == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("missing shrink state is a configuration error") {
    LoraLinear layer = make_layer(Matrix(1, 1, {1}), Matrix(1, 1));
    OptimizerState state = make_optimizer_state(sign_config(0.1), 1, 1, 1, 1);
    CHECK_THROWS_AS(stable_lora_step(state, layer, bundle(Matrix(1, 1), Matrix(1, 1))),
                    ConfigError);
}

TEST_CASE("unrolled shrink oracle") {
    SUBCASE("zero gradients reduce to the geometric factor") {
        const std::vector<Matrix> grads(3, Matrix(1, 1));
        const Matrix out = unrolled_shrink_oracle(Matrix(1, 1, {1}), grads, 0.1, 0.001);
        CHECK(out(0, 0) == doctest::Approx(0.997002999).epsilon(1e-12));
    }
    SUBCASE("single unroll") {
        SeededRng rng(23);
        const Matrix a0 = sample_gaussian(rng, 2, 2, 1.0);
        const Matrix g = sample_gaussian(rng, 2, 2, 1.0);
        const Matrix out = unrolled_shrink_oracle(a0, {g}, 0.3, 0.25);
        Matrix expect = 0.75 * a0;
        axpy(expect, -0.3, g);
        CHECK(rel_err(out, expect) < 1e-15);
    }
    SUBCASE("empty gradient sequence is rejected") {
        CHECK_THROWS_AS(unrolled_shrink_oracle(Matrix(1, 1), {}, 0.1, 0.1),
                        std::invalid_argument);
    }
}

TEST_CASE("iterated shrink-update equals the closed form") {
    SeededRng rng(29);
    const double lambda = 0.002, eta = 1e-3;
    for (int rounds : {50, 200}) {
        const Matrix a0 = sample_gaussian(rng, 2, 3, 1.0);
        // sign gradients are +-1, so the sign optimizer is the identity on them
        std::vector<Matrix> grads;
        for (int t = 0; t < rounds; ++t) {
            grads.push_back(elementwise_sign(sample_gaussian(rng, 2, 3, 1.0)));
        }

        LoraLinear layer = make_layer(a0, Matrix(2, 2));  // b stays 0: always shrink
        OptimizerState state = make_optimizer_state(sign_config(eta, 0.0), 2, 3, 2, 2,
                                                    StableLoraState{lambda, false, 0});
        for (int t = 0; t < rounds; ++t) {
            const StepReport rep = stable_lora_step(state, layer, bundle(grads[t], Matrix(2, 2)));
            CHECK(rep.shrank);
        }
        const Matrix oracle = unrolled_shrink_oracle(a0, grads, eta, lambda);
        CHECK(rel_err(layer.a, oracle) < 1e-12);
    }
}

TEST_CASE("decay factor comparison") {
    const DecayFactors f = decay_factor_comparison(1e-4, 0.01, 0.001);
    CHECK(f.shrink_factor == 0.999);
    CHECK(f.weight_decay_factor == 0.999999);
    CHECK(f.shrink_factor < f.weight_decay_factor);  // shrink decays faster

    const DecayFactors no_decay = decay_factor_comparison(0.1, 0.0, 1e-9);
    CHECK(no_decay.weight_decay_factor == 1.0);
    CHECK(no_decay.shrink_factor == doctest::Approx(1.0).epsilon(1e-8));

    CHECK(decay_factor_comparison(0.1, 0.01, 0.5).weight_decay_factor == 0.999);

    CHECK_THROWS_AS(decay_factor_comparison(0.1, 0.01, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(decay_factor_comparison(0.0, 0.01, 0.5), std::invalid_argument);
}

TEST_CASE("adamw trajectories are bit-identical across runs") {
    auto run = [] {
        SeededRng rng(31);
        LoraLinear layer = make_layer(sample_gaussian(rng, 2, 4, 1.0),
                                      sample_gaussian(rng, 3, 2, 1.0));
        OptimizerState state = make_optimizer_state(adam_config(1e-3, 0.01), 2, 4, 3, 2,
                                                    StableLoraState{0.01, false, 0});
        for (int t = 0; t < 25; ++t) {
            const GradientBundle g = bundle(sample_gaussian(rng, 2, 4, 1.0),
                                            sample_gaussian(rng, 3, 2, 1.0));
            stable_lora_step(state, layer, g);
        }
        return std::pair{layer.a, layer.b};
    };
    const auto [a1, b1] = run();
    const auto [a2, b2] = run();
    CHECK(a1 == a2);
    CHECK(b1 == b2);
}

TEST_CASE("linear schedule multiplier") {
    OptimizerConfig c = sign_config(0.1);
    c.schedule = LrSchedule::Linear;
    c.warmup_steps = 4;
    c.total_steps = 12;
    CHECK(schedule_multiplier(c, 0) == doctest::Approx(0.25));
    CHECK(schedule_multiplier(c, 3) == doctest::Approx(1.0));
    CHECK(schedule_multiplier(c, 7) == doctest::Approx(0.625));
    CHECK(schedule_multiplier(c, 11) == doctest::Approx(0.125));
    c.schedule = LrSchedule::Constant;
    CHECK(schedule_multiplier(c, 0) == 1.0);
    CHECK(schedule_multiplier(c, 100) == 1.0);
}
