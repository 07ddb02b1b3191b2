#include <CLI11.hpp>

#include "loralab/config.hpp"
#include "loralab/csv.hpp"
#include "loralab/gamma.hpp"
#include "loralab/probe.hpp"
#include "loralab/svg.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace loralab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitDiverged = 3;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_flag;
    bool plot = false;
};

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("LORALAB_SEED");
    if (!raw) return std::nullopt;
    try {
        return std::stoull(raw);
    } catch (const std::exception&) {
        throw ConfigError(std::string("LORALAB_SEED is not a valid u64: \"") + raw + "\"");
    }
}

/// Seed precedence: --seed flag, then LORALAB_SEED, then the config file.
void apply_seed_override(RunConfig& config, const GlobalArgs& args) {
    if (args.seed_flag) {
        config.task.seed = *args.seed_flag;
    } else if (const auto env = env_seed()) {
        config.task.seed = *env;
    }
}

RunConfig load_config_or_fail(const GlobalArgs& args) {
    if (args.config_path.empty()) {
        throw ConfigError("--config <path> is required for this command");
    }
    return load_run_config(args.config_path);
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << body;
}

void write_run_metadata(const std::filesystem::path& dir, const std::string& command,
                        const RunConfig& config) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::ostringstream os;
    os << "{\n  \"command\": \"" << command << "\",\n  \"config_hash\": \"" << std::hex
       << std::setw(16) << std::setfill('0') << config_hash(config) << std::dec << "\",\n"
       << "  \"seed\": " << config.task.seed << ",\n  \"timestamp\": "
       << static_cast<long long>(t) << "\n}\n";
    write_text_file(dir / "run.json", os.str());
}

std::filesystem::path prepare_out_dir(const GlobalArgs& args) {
    std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------
// gamma-check
// ---------------------------------------------------------------------------

int cmd_gamma_check(const std::string& gs, const std::string& geta, const std::string& ga0z,
                    const std::string& gb0, std::size_t table_steps) {
    ScalingSpec spec;
    struct Field {
        const char* name;
        const std::string* text;
        Gamma* slot;
    };
    Field fields[] = {{"--gs", &gs, &spec.gamma_s},
                      {"--geta", &geta, &spec.gamma_eta},
                      {"--ga0z", &ga0z, &spec.gamma_a0z},
                      {"--gb0", &gb0, &spec.gamma_b0}};
    for (const Field& f : fields) {
        const auto parsed = parse_gamma(*f.text);
        if (!parsed) {
            std::cerr << "gamma-check: cannot parse exponent for " << f.name << ": \"" << *f.text
                      << "\" (expected a decimal or \"neg-inf\")\n";
            return kExitUsage;
        }
        *f.slot = *parsed;
    }

    const TheoremVerdict verdict = theorem_check(spec);
    std::cout << (verdict.stable ? "stable" : "unstable") << ", " << to_string(verdict.init_case)
              << ", residual " << verdict.residual.str() << "\n\n";

    const GammaTrajectory traj = gamma_trajectory(spec, table_steps);
    std::cout << "step  gamma_atz  gamma_bt  gamma_d1  gamma_d2  gamma_d3  gamma_dy\n";
    for (std::size_t t = 0; t < traj.gamma_atz.size(); ++t) {
        std::cout << std::left << std::setw(6) << t + 1 << std::setw(11)
                  << traj.gamma_atz[t].str() << std::setw(10) << traj.gamma_bt[t].str()
                  << std::setw(10) << traj.gamma_delta1[t].str() << std::setw(10)
                  << traj.gamma_delta2[t].str() << std::setw(10) << traj.gamma_delta3[t].str()
                  << traj.gamma_delta_y[t].str() << "\n";
    }
    return verdict.stable ? kExitOk : kExitUnstable;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> norm_series(const TrajectoryLog& log, bool b_side) {
    std::vector<std::pair<double, double>> out;
    out.reserve(log.records.size());
    for (const StepRecord& rec : log.records) {
        out.emplace_back(static_cast<double>(rec.step), b_side ? rec.norm_b : rec.norm_a);
    }
    return out;
}

int cmd_train(const GlobalArgs& args) {
    RunConfig config = load_config_or_fail(args);
    apply_seed_override(config, args);
    const auto dir = prepare_out_dir(args);

    const TrajectoryLog log = run_trial(to_trial_config(config));

    std::ostringstream csv;
    write_trajectory_csv(csv, log);
    write_text_file(dir / "trajectory.csv", csv.str());
    write_run_metadata(dir, "train", config);

    if (args.plot) {
        PlotSpec norms{"parameter norms", "step", "frobenius norm", false, false,
                       {{"norm_a", norm_series(log, false)}, {"norm_b", norm_series(log, true)}}};
        std::vector<std::pair<double, double>> loss_pts;
        for (const StepRecord& rec : log.records) {
            loss_pts.emplace_back(static_cast<double>(rec.step), rec.loss);
        }
        PlotSpec loss{"loss", "step", "loss", false, true, {{"loss", std::move(loss_pts)}}};
        write_text_file(dir / "trajectory.svg", render_panels({norms, loss}));
    }

    if (log.diverged_at) {
        std::cerr << "train: diverged at step " << *log.diverged_at << "\n";
        return kExitDiverged;
    }
    std::cout << "train: wrote " << (dir / "trajectory.csv").string() << " ("
              << log.records.size() << " steps)\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const GlobalArgs& args) {
    RunConfig config = load_config_or_fail(args);
    apply_seed_override(config, args);

    std::vector<std::size_t> distinct = config.sweep.widths;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) {
        std::cerr << "sweep: need >=3 widths, got " << distinct.size() << "\n";
        return kExitUsage;
    }
    const auto dir = prepare_out_dir(args);

    SweepRequest request;
    request.base = to_trial_config(config);
    request.widths = config.sweep.widths;
    request.seeds = config.sweep.seeds;
    request.measure_steps = config.sweep.measure_steps;
    // The configured base seed offsets every per-trial stream.
    for (auto& s : request.seeds) s = mix_seed(config.task.seed, s);

    SweepResult result;
    try {
        result = width_sweep(request);
    } catch (const DivergenceError& e) {
        std::cerr << "sweep: " << e.what() << "\n";
        return kExitDiverged;
    }

    std::ostringstream csv;
    write_slopes_csv(csv, result);
    write_text_file(dir / "slopes.csv", csv.str());
    write_run_metadata(dir, "sweep", config);

    if (args.plot) {
        PlotSpec spec{"width scaling", "width n", "median value", true, true, {}};
        for (const SweepCell& cell : result.cells) {
            if (!cell.fit || cell.points.empty()) continue;
            PlotSeries pts{cell.quantity + "@" + std::to_string(cell.measure_step), cell.points,
                           true};
            spec.series.push_back(std::move(pts));
            std::vector<std::pair<double, double>> line;
            for (const auto& [x, y] : cell.points) {
                (void)y;
                line.emplace_back(x,
                                  std::exp(cell.fit->intercept + cell.fit->slope * std::log(x)));
            }
            spec.series.push_back({"", std::move(line), false});
        }
        write_text_file(dir / "slopes.svg", render_plot(spec, 760, 520));
    }
    std::cout << "sweep: wrote " << (dir / "slopes.csv").string() << " (" << result.cells.size()
              << " fits)\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// fig2
// ---------------------------------------------------------------------------

int cmd_fig2(const GlobalArgs& args) {
    RunConfig config = load_config_or_fail(args);
    apply_seed_override(config, args);
    const auto dir = prepare_out_dir(args);

    TrialConfig adamw_arm = to_trial_config(config);
    adamw_arm.stable_lora.reset();
    TrialConfig stable_arm = adamw_arm;
    stable_arm.stable_lora = StableLoraState{config.fig2_lambda, false, 0};

    const Fig2Result result = fig2_dynamics(adamw_arm, stable_arm);

    std::ostringstream csv;
    write_dynamics_csv(csv, result);
    write_text_file(dir / "dynamics.csv", csv.str());
    write_run_metadata(dir, "fig2", config);

    if (args.plot) {
        PlotSpec panel_a{"norm of A", "step", "frobenius norm", false, false,
                         {{"adamw", norm_series(result.adamw, false)},
                          {"stable", norm_series(result.stable, false)}}};
        PlotSpec panel_b{"norm of B", "step", "frobenius norm", false, false,
                         {{"adamw", norm_series(result.adamw, true)},
                          {"stable", norm_series(result.stable, true)}}};
        write_text_file(dir / "dynamics.svg", render_panels({panel_a, panel_b}));
    }

    if (result.adamw.diverged_at || result.stable.diverged_at) {
        const std::size_t step = result.adamw.diverged_at.value_or(
            result.stable.diverged_at.value_or(0));
        std::cerr << "fig2: diverged at step " << step << "\n";
        return kExitDiverged;
    }
    std::cout << "fig2: wrote " << (dir / "dynamics.csv").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"loralab: LoRA fine-tuning dynamics lab"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs args;
    app.add_option("--config", args.config_path, "run config file (JSON)");
    app.add_option("--out", args.out_dir, "output directory (default: .)");
    app.add_option("--seed", args.seed_flag, "seed override (beats LORALAB_SEED and the config)");
    app.add_flag("--plot", args.plot, "emit SVG plots next to the CSVs");

    auto* gamma_cmd = app.add_subcommand("gamma-check", "classify a scaling setup symbolically");
    std::string gs = "0", geta = "0", ga0z = "neg-inf", gb0 = "neg-inf";
    std::size_t table_steps = 5;
    gamma_cmd->add_option("--gs", gs, "exponent of the scale factor s");
    gamma_cmd->add_option("--geta", geta, "exponent of the learning rate");
    gamma_cmd->add_option("--ga0z", ga0z, "exponent of A0*Z (\"neg-inf\" for zero init)");
    gamma_cmd->add_option("--gb0", gb0, "exponent of B0 (\"neg-inf\" for zero init)");
    gamma_cmd->add_option("--steps", table_steps, "trajectory table length (default 5)");

    auto* train_cmd = app.add_subcommand("train", "run one trial, write trajectory.csv");
    auto* sweep_cmd = app.add_subcommand("sweep", "width sweep with slope fits, write slopes.csv");
    auto* fig2_cmd =
        app.add_subcommand("fig2", "paired plain/shrinkage dynamics, write dynamics.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gamma_cmd->parsed()) return cmd_gamma_check(gs, geta, ga0z, gb0, table_steps);
        if (train_cmd->parsed()) return cmd_train(args);
        if (sweep_cmd->parsed()) return cmd_sweep(args);
        if (fig2_cmd->parsed()) return cmd_fig2(args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
