#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "loralab/config.hpp"
#include "loralab/csv.hpp"
#include "loralab/svg.hpp"

#include <sstream>

using namespace loralab;

TEST_CASE("defaults") {
    const RunConfig config = parse_run_config("{}");
    CHECK(config.task.m == 256);
    CHECK(config.task.n == 256);
    CHECK(config.task.r == 8);
    CHECK(config.task.batch == 16);
    CHECK(config.task.seed == 1);
    CHECK(config.init.variant == InitVariant::KaimingUniformA_ZeroB);
    CHECK(config.optimizer.kind == OptimizerKind::AdamW);
    CHECK(config.optimizer.beta1 == 0.9);
    CHECK(config.optimizer.beta2 == 0.999);
    CHECK(config.optimizer.weight_decay == 0.01);
    CHECK(config.optimizer.lora_plus_ratio == 1.0);
    CHECK_FALSE(config.stable_lambda.has_value());
    CHECK(config.steps == 200);
    CHECK(config.eta_base == 2e-4);
    CHECK(config.sweep.widths.size() == 7);
    CHECK(config.sweep.seeds.size() == 3);
    CHECK(config.fig2_lambda == 0.002);
}

TEST_CASE("full config parses") {
    const char* text = R"({
      "task": {"m": 64, "n": 64, "r": 4, "batch": 8, "target_rank": 2, "seed": 42},
      "init": {"scheme": "gaussian_both", "var_a": 0.5, "var_b": 0.25},
      "optimizer": {"kind": "sign_sgd", "weight_decay": 0.0, "lora_plus_ratio": 4.0,
                    "schedule": "linear", "warmup_steps": 10},
      "stable_lora": {"lambda": 0.005},
      "steps": 100,
      "scaling": {"eta_base": 0.01, "eta_exponent": -0.5, "s_base": 1.0, "s_exponent": 0.0},
      "sweep": {"widths": [16, 32, 64], "seeds": [5, 6], "measure_steps": [1, 10]},
      "fig2": {"lambda": 0.001}
    })";
    const RunConfig config = parse_run_config(text);
    CHECK(config.task.seed == 42);
    CHECK(config.init.variant == InitVariant::GaussianBoth);
    CHECK(*config.init.var_a == 0.5);
    CHECK(config.optimizer.kind == OptimizerKind::SignSgd);
    CHECK(config.optimizer.lora_plus_ratio == 4.0);
    CHECK(config.optimizer.schedule == LrSchedule::Linear);
    CHECK(*config.stable_lambda == 0.005);
    CHECK(config.eta_exponent == -0.5);
    CHECK(config.sweep.widths == std::vector<std::size_t>{16, 32, 64});
    CHECK(config.fig2_lambda == 0.001);

    const TrialConfig trial = to_trial_config(config);
    CHECK(trial.task.seed == 42);
    CHECK(trial.stable_lora.has_value());
    CHECK(trial.stable_lora->lambda == 0.005);
    CHECK(effective_eta(trial) == doctest::Approx(0.01 / 8.0));
}

TEST_CASE("init shorthand string") {
    const RunConfig config = parse_run_config(R"({"init": "zero_both"})");
    CHECK(config.init.variant == InitVariant::ZeroBoth);
}

TEST_CASE("unknown keys are rejected everywhere") {
    CHECK_THROWS_AS(parse_run_config(R"({"bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"task": {"m": 4, "bogus": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"optimizer": {"lr": 0.1}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"sweep": {"width": [1,2,3]}})"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"stable_lora": {"lambda": 0.1, "x": 1}})"),
                         doctest::Contains("\"x\""), ConfigError);
}

TEST_CASE("invalid values are rejected") {
    CHECK_THROWS_AS(parse_run_config(R"({"stable_lora": {"lambda": 0.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"stable_lora": {"lambda": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"fig2": {"lambda": 0.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"optimizer": {"kind": "sgd"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"optimizer": {"beta1": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"task": {"m": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"steps": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"init": {"scheme": "zero_both", "var_a": 1.0}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"sweep": {"measure_steps": [500]}})"), ConfigError);
}

TEST_CASE("serialization round-trips after default expansion") {
    const char* text = R"({
      "task": {"m": 32, "n": 32},
      "stable_lora": {"lambda": 0.002},
      "steps": 50
    })";
    const RunConfig parsed = parse_run_config(text);
    const std::string canonical = serialize_run_config(parsed);
    const RunConfig reparsed = parse_run_config(canonical);
    CHECK(serialize_run_config(reparsed) == canonical);
    CHECK(config_hash(reparsed) == config_hash(parsed));

    RunConfig other = parsed;
    other.task.seed = 2;
    CHECK(config_hash(other) != config_hash(parsed));
}

TEST_CASE("double formatting") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1e-4) == "1e-04");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(-3.25) == "-3.25");
    // shortest round-trip representation
    CHECK(std::stod(format_double(0.1)) == 0.1);
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("trajectory csv layout") {
    TrajectoryLog log;
    log.records.push_back({1, 1.5, 0.25, 0.1, 0.2, 0.3, 0.4, 0.5, 2.0, true});
    log.records.push_back({2, 1.25, 0.5, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0, false});
    std::ostringstream out;
    write_trajectory_csv(out, log);
    CHECK(out.str() ==
          "step,norm_a,norm_b,rms_delta1,rms_delta2,rms_delta3,rms_delta_y,rms_gaz,loss,"
          "shrink_active\n"
          "1,1.5,0.25,0.1,0.2,0.3,0.4,0.5,2,true\n"
          "2,1.25,0.5,0.1,0.2,0.3,0.4,0.5,1,false\n");

    log.diverged_at = 3;
    std::ostringstream diverged;
    write_trajectory_csv(diverged, log);
    CHECK(diverged.str().find("# DIVERGED at step 3\n") != std::string::npos);
}

TEST_CASE("slopes csv layout") {
    SweepResult result;
    SweepCell cell;
    cell.quantity = "rms_delta_y";
    cell.measure_step = 10;
    cell.fit = SlopeFit{0.5, -1.25, 0.999};
    cell.n_points = 7;
    cell.n_excluded_zeros = 0;
    result.cells.push_back(cell);
    SweepCell empty;
    empty.quantity = "rms_delta2";
    empty.measure_step = 1;
    empty.n_points = 2;
    empty.n_excluded_zeros = 5;
    result.cells.push_back(empty);

    std::ostringstream out;
    write_slopes_csv(out, result);
    CHECK(out.str() ==
          "quantity,measure_step,slope,intercept,r_squared,n_points,n_excluded_zeros\n"
          "rms_delta_y,10,0.5,-1.25,0.999,7,0\n"
          "rms_delta2,1,nan,nan,nan,2,5\n");
}

TEST_CASE("dynamics csv tags the arms") {
    Fig2Result result;
    result.adamw.records.push_back({1, 1, 2, 0, 0, 0, 0, 0, 3, false});
    result.stable.records.push_back({1, 1, 2, 0, 0, 0, 0, 0, 3, true});
    std::ostringstream out;
    write_dynamics_csv(out, result);
    const std::string text = out.str();
    CHECK(text.find("arm,step,") == 0);
    CHECK(text.find("\nadamw,1,") != std::string::npos);
    CHECK(text.find("\nstable,1,") != std::string::npos);
}

TEST_CASE("svg rendering is well-formed enough") {
    PlotSpec spec;
    spec.title = "test";
    spec.x_label = "x";
    spec.y_label = "y";
    spec.log_x = true;
    spec.log_y = true;
    spec.series.push_back({"s1", {{1, 1}, {10, 10}, {100, 100}}, true});
    const std::string svg = render_plot(spec);
    CHECK(svg.find("<?xml") == 0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);

    const std::string two = render_panels({spec, spec});
    CHECK(two.find("height=\"840\"") != std::string::npos);
}
