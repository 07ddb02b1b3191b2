#include "loralab/probe.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace loralab {

std::pair<Matrix, Matrix> Task::draw_batch(SeededRng& rng) const {
    Matrix z = sample_gaussian(rng, w0.cols(), batch, 1.0);
    Matrix y_star = matmul(w_teacher, z);
    return {std::move(z), std::move(y_star)};
}

Task make_task(const TaskSpec& spec, SeededRng& rng) {
    if (spec.target_rank > std::min(spec.m, spec.n)) {
        throw std::invalid_argument("make_task: target_rank " + std::to_string(spec.target_rank) +
                                    " exceeds min(" + std::to_string(spec.m) + ", " +
                                    std::to_string(spec.n) + ")");
    }
    const double inv_n = 1.0 / static_cast<double>(spec.n);
    Task task;
    task.batch = spec.batch;
    task.w0 = sample_gaussian(rng, spec.m, spec.n, inv_n);
    const Matrix a_star = sample_gaussian(rng, spec.target_rank, spec.n, inv_n);
    const Matrix b_star =
        sample_gaussian(rng, spec.m, spec.target_rank, 1.0 / static_cast<double>(spec.target_rank));
    task.w_teacher = task.w0 + matmul(b_star, a_star);
    return task;
}

double effective_eta(const TrialConfig& config) {
    return config.eta_base * std::pow(static_cast<double>(config.task.n), config.eta_exponent);
}

double effective_s(const TrialConfig& config) {
    return config.s_base * std::pow(static_cast<double>(config.task.n), config.s_exponent);
}

TrajectoryLog run_trial(const TrialConfig& config) {
    SeededRng rng(config.task.seed);
    Task task = make_task(config.task, rng);
    LoraLinear layer = init_with_w0(task.w0, config.task.r, effective_s(config), config.init, rng);

    OptimizerConfig oc = config.optimizer;
    oc.eta = effective_eta(config);
    if (oc.schedule == LrSchedule::Linear && oc.total_steps == 0) {
        oc.total_steps = config.steps;
    }
    OptimizerState state = make_optimizer_state(oc, layer.r, layer.n, layer.m, layer.r,
                                                config.stable_lora);

    TrajectoryLog log;
    log.initial_norm_a = frobenius_norm(layer.a);
    log.initial_norm_b = frobenius_norm(layer.b);
    log.records.reserve(config.steps);

    for (std::size_t t = 0; t < config.steps; ++t) {
        const auto [z, y_star] = task.draw_batch(rng);
        const ForwardCache cache = forward(layer, z);
        auto [loss, d_y] = loss_and_grad(cache, y_star);
        auto [grads, signal] = backward(layer, cache, d_y);
        (void)signal;

        const double eta_a = oc.eta * schedule_multiplier(oc, t);
        const double eta_b = eta_a * oc.lora_plus_ratio;
        const StepReport report = config.stable_lora ? stable_lora_step(state, layer, grads)
                                                     : plain_step(state, layer, grads);

        const DeltaDecomposition deltas = delta_decompose(
            report.a_used, report.b_used, report.g_a, report.g_b, layer.s, eta_a, eta_b, z);
        const Matrix delta_y = deltas.delta1 + deltas.delta2 + deltas.delta3;
        const Matrix gaz = matmul(report.g_a, z);

        StepRecord rec;
        rec.step = t + 1;
        rec.norm_a = frobenius_norm(layer.a);
        rec.norm_b = frobenius_norm(layer.b);
        rec.rms_delta1 = rms(deltas.delta1);
        rec.rms_delta2 = rms(deltas.delta2);
        rec.rms_delta3 = rms(deltas.delta3);
        rec.rms_delta_y = rms(delta_y);
        rec.rms_gaz = rms(gaz);
        rec.loss = loss;
        rec.shrink_active = report.shrank;

        const bool finite = std::isfinite(rec.norm_a) && std::isfinite(rec.norm_b) &&
                            std::isfinite(rec.rms_delta_y) && std::isfinite(rec.rms_gaz) &&
                            std::isfinite(rec.loss) && all_finite(layer.a) && all_finite(layer.b);
        if (!finite) {
            log.diverged_at = t + 1;
            break;
        }
        log.records.push_back(rec);
    }
    return log;
}

SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) {
        throw std::invalid_argument("fit_loglog: need at least 3 points, got " +
                                    std::to_string(points.size()));
    }
    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) {
            throw std::invalid_argument("fit_loglog: all coordinates must be positive");
        }
        xs.push_back(std::log(x));
        ys.push_back(std::log(y));
    }
    const double count = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= count;
    mean_y /= count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("fit_loglog: all x values are equal (degenerate fit)");
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += resid * resid;
    }
    fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median: empty input");
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

double pick_quantity(const StepRecord& rec, std::size_t which) {
    switch (which) {
        case 0: return rec.rms_delta1;
        case 1: return rec.rms_delta2;
        case 2: return rec.rms_delta3;
        case 3: return rec.rms_delta_y;
        default: return rec.rms_gaz;
    }
}

constexpr const char* kQuantityNames[] = {"rms_delta1", "rms_delta2", "rms_delta3", "rms_delta_y",
                                          "rms_gaz"};

}  // namespace

SweepResult width_sweep(const SweepRequest& request) {
    std::vector<std::size_t> distinct = request.widths;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) {
        throw std::invalid_argument("width_sweep: need >= 3 distinct widths, got " +
                                    std::to_string(distinct.size()));
    }
    if (request.seeds.empty()) {
        throw std::invalid_argument("width_sweep: need at least one seed");
    }
    for (const std::size_t ms : request.measure_steps) {
        if (ms < 1 || ms > request.base.steps) {
            throw std::invalid_argument("width_sweep: measure step " + std::to_string(ms) +
                                        " outside [1, " + std::to_string(request.base.steps) +
                                        "]");
        }
    }

    // values[width_idx][seed_idx] -> log at that trial
    std::vector<std::vector<TrajectoryLog>> logs(distinct.size());
    for (std::size_t wi = 0; wi < distinct.size(); ++wi) {
        const std::size_t width = distinct[wi];
        for (const std::uint64_t seed : request.seeds) {
            TrialConfig trial = request.base;
            trial.task.m = width;
            trial.task.n = width;
            trial.task.seed = mix_seed(seed, width);
            TrajectoryLog log = run_trial(trial);
            if (log.diverged_at) {
                throw DivergenceError(width, seed, *log.diverged_at);
            }
            logs[wi].push_back(std::move(log));
        }
    }

    SweepResult result;
    for (std::size_t q = 0; q < 5; ++q) {
        for (const std::size_t ms : request.measure_steps) {
            SweepCell cell;
            cell.quantity = kQuantityNames[q];
            cell.measure_step = ms;
            for (std::size_t wi = 0; wi < distinct.size(); ++wi) {
                std::vector<double> per_seed;
                per_seed.reserve(logs[wi].size());
                for (const TrajectoryLog& log : logs[wi]) {
                    per_seed.push_back(pick_quantity(log.records[ms - 1], q));
                }
                const double value = median(std::move(per_seed));
                if (value == 0.0) {
                    cell.n_excluded_zeros += 1;
                } else {
                    cell.points.emplace_back(static_cast<double>(distinct[wi]), value);
                }
            }
            cell.n_points = cell.points.size();
            if (cell.n_points >= 3) {
                cell.fit = fit_loglog(cell.points);
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

SignFactorizationCheck sign_factorization_check(const Matrix& b, const Matrix& d_y,
                                                const Matrix& z, double s) {
    if (z.cols() != 1) {
        throw std::invalid_argument("sign_factorization_check: z must be a single column");
    }
    const Matrix signal = s * matmul(transpose(b), d_y);  // r x 1
    const Matrix raw_grad_a = matmul(signal, transpose(z));
    const Matrix g_a = elementwise_sign(raw_grad_a);
    const Matrix lhs = matmul(g_a, z);

    double sum_abs_z = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) sum_abs_z += std::fabs(z.data()[i]);
    const Matrix rhs = sum_abs_z * elementwise_sign(signal);

    SignFactorizationCheck check;
    check.max_abs_err = max_abs_diff(lhs, rhs);
    check.sum_abs_z_over_n = sum_abs_z / static_cast<double>(z.rows());
    return check;
}

Assumption1Report assumption1_check(const std::vector<std::size_t>& n_values, std::uint64_t seed,
                                    std::size_t batch) {
    if (batch != 1) {
        throw std::invalid_argument(
            "assumption1_check: the sign factorization of the A-gradient is exact only for "
            "single-column inputs; batch must be 1, got " +
            std::to_string(batch));
    }
    constexpr std::size_t kRank = 8;
    Assumption1Report report;
    for (const std::size_t n : n_values) {
        SeededRng rng(mix_seed(seed, n));
        const Matrix b = sample_gaussian(rng, n, kRank, 1.0 / static_cast<double>(kRank));
        const Matrix d_y = sample_gaussian(rng, n, 1, 1.0);
        const Matrix z = sample_gaussian(rng, n, 1, 1.0);
        const SignFactorizationCheck check = sign_factorization_check(b, d_y, z, 1.0);
        report.rows.push_back({n, check.max_abs_err, check.sum_abs_z_over_n});
        report.worst_identity_err = std::max(report.worst_identity_err, check.max_abs_err);
    }
    return report;
}

Fig2Result fig2_dynamics(const TrialConfig& config_adamw, const TrialConfig& config_stable) {
    const TaskSpec& ta = config_adamw.task;
    const TaskSpec& ts = config_stable.task;
    const bool same_task = ta.m == ts.m && ta.n == ts.n && ta.r == ts.r && ta.batch == ts.batch &&
                           ta.target_rank == ts.target_rank && ta.seed == ts.seed;
    if (!same_task) {
        throw std::invalid_argument("fig2_dynamics: both arms must share the task and seed");
    }
    if (!config_stable.stable_lora) {
        throw std::invalid_argument("fig2_dynamics: the stable arm needs shrinkage parameters");
    }
    if (config_adamw.stable_lora) {
        throw std::invalid_argument("fig2_dynamics: the plain arm must not have shrinkage state");
    }
    Fig2Result result;
    result.adamw = run_trial(config_adamw);
    result.stable = run_trial(config_stable);
    return result;
}

}  // namespace loralab
