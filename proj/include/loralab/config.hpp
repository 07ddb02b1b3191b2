#pragma once

#include "loralab/optim.hpp"
#include "loralab/probe.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace loralab {

struct SweepSettings {
    std::vector<std::size_t> widths{64, 128, 256, 512, 1024, 2048, 4096};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::vector<std::size_t> measure_steps{1, 10, 50};
};

/// Declarative mirror of a run: one self-describing file per experiment.
/// Parsing is fail-closed (unknown keys are rejected) and every field has a
/// documented default; see README for the schema.
struct RunConfig {
    TaskSpec task;                       // m=n=256, r=8, batch=16, target_rank=4, seed=1
    InitScheme init;                     // kaiming_uniform_a_zero_b
    OptimizerConfig optimizer;           // adamw, betas 0.9/0.999, eps 1e-8, decay 0.01
    std::optional<double> stable_lambda; // presence turns `train` into a shrinkage run
    std::size_t steps = 200;
    double eta_base = 2e-4;
    double eta_exponent = 0.0;
    double s_base = 2.0;
    double s_exponent = 0.0;
    SweepSettings sweep;
    double fig2_lambda = 0.002;          // shrink ratio of the fig2 stable arm
};

/// Parses JSON text. Throws ConfigError naming the offending key/value.
RunConfig parse_run_config(const std::string& json_text);

RunConfig load_run_config(const std::string& path);

/// Canonical JSON with every field expanded to its effective value.
std::string serialize_run_config(const RunConfig& config);

/// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const RunConfig& config);

/// The single-trial view of a run config (train / one sweep cell).
TrialConfig to_trial_config(const RunConfig& config);

}  // namespace loralab
