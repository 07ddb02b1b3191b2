#pragma once

#include "loralab/lora.hpp"
#include "loralab/matrix.hpp"
#include "loralab/optim.hpp"
#include "loralab/rng.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace loralab {

/// A trial hit a non-finite value. Carries where it happened.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t width, std::uint64_t seed, std::size_t step)
        : std::runtime_error("divergence at width " + std::to_string(width) + ", seed " +
                             std::to_string(seed) + ", step " + std::to_string(step)),
          width(width),
          seed(seed),
          step(step) {}

    std::size_t width;
    std::uint64_t seed;
    std::size_t step;
};

/// Synthetic regression task: the target is the frozen base weight plus a
/// hidden low-rank perturbation, evaluated on a fixed Gaussian batch.
struct TaskSpec {
    std::size_t m = 256, n = 256, r = 8;
    std::size_t batch = 16;
    std::size_t target_rank = 4;
    std::uint64_t seed = 1;
};

struct Task {
    Matrix w0;         // m x n, shared with the student layer
    Matrix w_teacher;  // w0 + b_star * a_star
    std::size_t batch = 1;

    /// One regression batch: standard-normal z (n x batch) and y_star = w_teacher * z.
    std::pair<Matrix, Matrix> draw_batch(SeededRng& rng) const;
};

/// Draw order: w0, a_star (variance 1/n), b_star (variance 1/target_rank).
/// Batches come from draw_batch afterwards, one per training step.
Task make_task(const TaskSpec& spec, SeededRng& rng);

/// One training run. Learning rate and scale are recomputed from the width:
/// eta = eta_base * n^eta_exponent, s = s_base * n^s_exponent.
struct TrialConfig {
    TaskSpec task;
    InitScheme init;
    OptimizerConfig optimizer;  // eta field is overridden by the scaling below
    std::optional<StableLoraState> stable_lora;
    std::size_t steps = 200;
    double eta_base = 2e-4;
    double eta_exponent = 0.0;
    double s_base = 2.0;
    double s_exponent = 0.0;
};

double effective_eta(const TrialConfig& config);
double effective_s(const TrialConfig& config);

struct StepRecord {
    std::size_t step;  // 1-based
    double norm_a, norm_b;
    double rms_delta1, rms_delta2, rms_delta3, rms_delta_y;
    double rms_gaz;
    double loss;
    bool shrink_active;
};

struct TrajectoryLog {
    std::vector<StepRecord> records;
    double initial_norm_a = 0.0;
    double initial_norm_b = 0.0;
    /// Set when the trial hit a non-finite value; records stop just before it.
    std::optional<std::size_t> diverged_at;
};

/// forward -> loss -> backward -> (shrink+)update, once per step, recording the
/// per-step norms, delta components (from the optimized gradients and the
/// post-shrink pre-update parameters), g_a*z magnitude and loss.
TrajectoryLog run_trial(const TrialConfig& config);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares on (log x, log y). Needs >= 3 points, all positive,
/// and at least two distinct x values.
SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& points);

struct SweepRequest {
    TrialConfig base;
    std::vector<std::size_t> widths;        // >= 3 distinct; sets m = n = width
    std::vector<std::uint64_t> seeds;       // per-trial streams, mixed with the width
    std::vector<std::size_t> measure_steps; // each <= base.steps
};

struct SweepCell {
    std::string quantity;
    std::size_t measure_step;
    std::optional<SlopeFit> fit;  // empty when fewer than 3 nonzero points remain
    std::size_t n_points = 0;
    std::size_t n_excluded_zeros = 0;
    std::vector<std::pair<double, double>> points;  // (width, seed-median), zeros dropped
};

struct SweepResult {
    std::vector<SweepCell> cells;
};

/// Runs every (width, seed) trial in order, median-aggregates each recorded
/// quantity at each measure step, and fits log-log slopes against the width.
/// Exact-zero medians are excluded from fits and counted.
SweepResult width_sweep(const SweepRequest& request);

/// Exact factorization check for one instance: with single-column z,
/// sign(s*b^T*d_y*z^T)*z == (sum_i |z_i|) * sign(s*b^T*d_y) entrywise.
struct SignFactorizationCheck {
    double max_abs_err;
    double sum_abs_z_over_n;
};

SignFactorizationCheck sign_factorization_check(const Matrix& b, const Matrix& d_y,
                                                const Matrix& z, double s);

struct Assumption1Row {
    std::size_t n;
    double max_identity_err;
    double sum_abs_z_over_n;
};

struct Assumption1Report {
    std::vector<Assumption1Row> rows;
    double worst_identity_err = 0.0;
};

/// Random (b, d_y, z) instances per width; batch must be 1 (the factorization
/// does not hold for multi-column inputs).
Assumption1Report assumption1_check(const std::vector<std::size_t>& n_values, std::uint64_t seed,
                                    std::size_t batch = 1);

struct Fig2Result {
    TrajectoryLog adamw;
    TrajectoryLog stable;
};

/// Side-by-side norm dynamics: a plain-optimizer arm and a shrinkage arm on
/// the identical task and seed.
Fig2Result fig2_dynamics(const TrialConfig& config_adamw, const TrialConfig& config_stable);

double median(std::vector<double> values);

}  // namespace loralab
