#include "loralab/optim.hpp"

#include "loralab/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace loralab {

OptimizerState make_optimizer_state(const OptimizerConfig& config, std::size_t rows_a,
                                    std::size_t cols_a, std::size_t rows_b, std::size_t cols_b,
                                    std::optional<StableLoraState> stable) {
    if (config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 || config.beta2 >= 1.0) {
        throw ConfigError("optimizer betas must lie in [0, 1)");
    }
    if (!(config.epsilon > 0.0)) {
        throw ConfigError("optimizer epsilon must be > 0");
    }
    if (!(config.lora_plus_ratio > 0.0)) {
        throw ConfigError("lora_plus_ratio must be > 0");
    }
    if (stable && !(stable->lambda > 0.0 && stable->lambda < 1.0)) {
        throw ConfigError("shrinkage ratio lambda must lie in (0, 1), got " +
                          std::to_string(stable->lambda));
    }
    OptimizerState state;
    state.config = config;
    if (config.kind == OptimizerKind::AdamW) {
        state.moments_a = AdamMoments{Matrix(rows_a, cols_a), Matrix(rows_a, cols_a)};
        state.moments_b = AdamMoments{Matrix(rows_b, cols_b), Matrix(rows_b, cols_b)};
    }
    state.stable_lora = std::move(stable);
    return state;
}

double schedule_multiplier(const OptimizerConfig& config, std::size_t t) {
    if (config.schedule == LrSchedule::Constant) return 1.0;
    if (config.warmup_steps > 0 && t < config.warmup_steps) {
        return static_cast<double>(t + 1) / static_cast<double>(config.warmup_steps);
    }
    if (config.total_steps > config.warmup_steps) {
        const double rest = static_cast<double>(config.total_steps - config.warmup_steps);
        const double done = static_cast<double>(t - config.warmup_steps);
        return done >= rest ? 0.0 : (rest - done) / rest;
    }
    return 1.0;
}

Matrix optimize_gradient(OptimizerState& state, const Matrix& raw, Param which) {
    if (state.config.kind == OptimizerKind::SignSgd) {
        return elementwise_sign(raw);
    }
    AdamMoments& mom = which == Param::A ? *state.moments_a : *state.moments_b;
    if (!raw.same_shape(mom.m)) {
        throw ShapeError("optimize_gradient: gradient " + raw.shape_str() +
                         " does not match tracked parameter " + mom.m.shape_str());
    }
    const OptimizerConfig& c = state.config;
    const double t = static_cast<double>(state.step_t + 1);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    Matrix out(raw.rows(), raw.cols());
    double* pm = mom.m.data();
    double* pv = mom.v.data();
    const double* g = raw.data();
    double* o = out.data();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        pm[i] = c.beta1 * pm[i] + (1.0 - c.beta1) * g[i];
        pv[i] = c.beta2 * pv[i] + (1.0 - c.beta2) * g[i] * g[i];
        const double m_hat = pm[i] / bc1;
        const double v_hat = pv[i] / bc2;
        o[i] = m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
    return out;
}

bool stable_condition(const Matrix& a, const Matrix& b, std::size_t n, std::size_t m) {
    return frobenius_norm(a) / static_cast<double>(n) >
           frobenius_norm(b) / static_cast<double>(m);
}

namespace {

void decayed_update(Matrix& param, const Matrix& grad, double eta, double decay) {
    if (!param.same_shape(grad)) {
        throw ShapeError("update: gradient " + grad.shape_str() + " does not match parameter " +
                         param.shape_str());
    }
    if (param.size() >= kernels::kParallelWorkThreshold) {
        kernels::decayed_update_parallel(param, grad, eta, decay);
    } else {
        kernels::decayed_update_serial(param, grad, eta, decay);
    }
}

StepReport apply_update(OptimizerState& state, LoraLinear& layer, const GradientBundle& grads,
                        bool shrank) {
    StepReport report;
    report.shrank = shrank;
    report.a_used = layer.a;
    report.b_used = layer.b;
    report.g_a = optimize_gradient(state, grads.raw_grad_a, Param::A);
    report.g_b = optimize_gradient(state, grads.raw_grad_b, Param::B);
    const double eta_a = state.config.eta * schedule_multiplier(state.config, state.step_t);
    const double eta_b = eta_a * state.config.lora_plus_ratio;
    decayed_update(layer.a, report.g_a, eta_a, state.config.weight_decay);
    decayed_update(layer.b, report.g_b, eta_b, state.config.weight_decay);
    state.step_t += 1;
    return report;
}

}  // namespace

StepReport stable_lora_step(OptimizerState& state, LoraLinear& layer,
                            const GradientBundle& grads) {
    if (!state.stable_lora) {
        throw ConfigError("stable_lora_step: optimizer state has no shrinkage state");
    }
    StableLoraState& sl = *state.stable_lora;
    bool shrank = false;
    if (!sl.stable) {
        if (stable_condition(layer.a, layer.b, layer.n, layer.m)) {
            layer.a *= 1.0 - sl.lambda;
            sl.shrink_steps_applied += 1;
            shrank = true;
        } else {
            sl.stable = true;  // permanent; the condition is never re-evaluated
        }
    }
    return apply_update(state, layer, grads, shrank);
}

StepReport plain_step(OptimizerState& state, LoraLinear& layer, const GradientBundle& grads) {
    return apply_update(state, layer, grads, false);
}

Matrix unrolled_shrink_oracle(const Matrix& a0, const std::vector<Matrix>& grads, double eta,
                              double lambda) {
    if (grads.empty()) {
        throw std::invalid_argument("unrolled_shrink_oracle: gradient sequence is empty");
    }
    for (const Matrix& g : grads) {
        if (!g.same_shape(a0)) {
            throw ShapeError("unrolled_shrink_oracle: gradient " + g.shape_str() +
                             " does not match a0 " + a0.shape_str());
        }
    }
    const std::size_t n_steps = grads.size();
    const double keep = 1.0 - lambda;
    Matrix out = std::pow(keep, static_cast<double>(n_steps)) * a0;
    axpy(out, -eta, grads[n_steps - 1]);
    for (std::size_t k = 1; k < n_steps; ++k) {
        axpy(out, -eta * std::pow(keep, static_cast<double>(k)), grads[n_steps - 1 - k]);
    }
    return out;
}

DecayFactors decay_factor_comparison(double eta, double w, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw std::invalid_argument("decay_factor_comparison: lambda must lie in (0, 1)");
    }
    if (w < 0.0 || !(eta > 0.0)) {
        throw std::invalid_argument("decay_factor_comparison: need w >= 0 and eta > 0");
    }
    return {1.0 - lambda, 1.0 - eta * w};
}

}  // namespace loralab
