#pragma once

#include "loralab/lora.hpp"
#include "loralab/matrix.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace loralab {

/// Raised for invalid optimizer wiring (e.g. shrinkage step without shrinkage state).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OptimizerKind { SignSgd, AdamW };

enum class LrSchedule { Constant, Linear };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::AdamW;
    double eta = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
    double lora_plus_ratio = 1.0;  // eta_b = ratio * eta_a; 1 recovers plain LoRA
    LrSchedule schedule = LrSchedule::Constant;  // Linear: warm up, then decay to 0
    std::size_t warmup_steps = 0;
    std::size_t total_steps = 0;  // Linear decay horizon; 0 = warmup only
};

struct AdamMoments {
    Matrix m;
    Matrix v;
};

/// Shrinkage state of Algorithm 1. `stable` is a one-way latch: once the
/// average-norm condition first fails, shrinking is disabled forever.
struct StableLoraState {
    double lambda = 0.001;  // in (0, 1)
    bool stable = false;
    std::size_t shrink_steps_applied = 0;
};

struct OptimizerState {
    OptimizerConfig config;
    std::optional<AdamMoments> moments_a;  // present iff kind == AdamW
    std::optional<AdamMoments> moments_b;
    std::size_t step_t = 0;  // completed update steps
    std::optional<StableLoraState> stable_lora;
};

/// Which tracked parameter a gradient belongs to.
enum class Param { A, B };

/// Everything a step used, for per-step measurement: the optimized gradients,
/// the parameter values they were applied to (post-shrink, pre-update), and
/// whether the shrink fired.
struct StepReport {
    Matrix g_a;
    Matrix g_b;
    Matrix a_used;
    Matrix b_used;
    bool shrank = false;
};

OptimizerState make_optimizer_state(const OptimizerConfig& config, std::size_t rows_a,
                                    std::size_t cols_a, std::size_t rows_b, std::size_t cols_b,
                                    std::optional<StableLoraState> stable = std::nullopt);

/// Learning-rate multiplier of the schedule at 0-based step t (1 for Constant).
double schedule_multiplier(const OptimizerConfig& config, std::size_t t);

/// SignSgd: entrywise sign. AdamW: bias-corrected m_hat / (sqrt(v_hat) + eps)
/// at step index step_t + 1; moments for the named parameter advance in place.
Matrix optimize_gradient(OptimizerState& state, const Matrix& raw, Param which);

/// True when ||a||_F / n > ||b||_F / m, i.e. the shrink is still needed.
bool stable_condition(const Matrix& a, const Matrix& b, std::size_t n, std::size_t m);

/// One full Algorithm-1 step: shrink-or-latch, optimize gradients, apply the
/// decoupled-decay update with the LoRA+ split, advance the step counter.
StepReport stable_lora_step(OptimizerState& state, LoraLinear& layer, const GradientBundle& grads);

/// The same update with the shrink phase skipped (AdamW / sign-SGD / LoRA+ baselines).
StepReport plain_step(OptimizerState& state, LoraLinear& layer, const GradientBundle& grads);

/// Closed form for N steps of shrink-then-update with gradients grads[0..N-1]:
///   (1-lambda)^N a0 - eta*grads[N-1] - eta * sum_{k=1}^{N-1} (1-lambda)^k grads[N-1-k]
/// Evaluated directly, independent of the step-by-step path.
Matrix unrolled_shrink_oracle(const Matrix& a0, const std::vector<Matrix>& grads, double eta,
                              double lambda);

struct DecayFactors {
    double shrink_factor;        // 1 - lambda, applied directly
    double weight_decay_factor;  // 1 - eta*w, scaled by the learning rate
};

DecayFactors decay_factor_comparison(double eta, double w, double lambda);

}  // namespace loralab
