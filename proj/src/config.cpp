#include "loralab/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace loralab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.count(key)) {
            fail("unknown key \"" + key + "\" in " + where);
        }
    }
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(std::string(key) + " must be a number");
    return obj[key].get<double>();
}

std::size_t get_size(const json& obj, const char* key, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned()) fail(std::string(key) + " must be a non-negative integer");
    return obj[key].get<std::size_t>();
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned()) fail(std::string(key) + " must be a non-negative integer");
    return obj[key].get<std::uint64_t>();
}

InitVariant parse_init_variant(const std::string& name) {
    if (name == "zero_both") return InitVariant::ZeroBoth;
    if (name == "kaiming_uniform_a_zero_b") return InitVariant::KaimingUniformA_ZeroB;
    if (name == "gaussian_width_a_zero_b") return InitVariant::GaussianWidthA_ZeroB;
    if (name == "gaussian_both") return InitVariant::GaussianBoth;
    fail("unknown init scheme \"" + name + "\"");
}

const char* init_variant_name(InitVariant v) {
    switch (v) {
        case InitVariant::ZeroBoth: return "zero_both";
        case InitVariant::KaimingUniformA_ZeroB: return "kaiming_uniform_a_zero_b";
        case InitVariant::GaussianWidthA_ZeroB: return "gaussian_width_a_zero_b";
        case InitVariant::GaussianBoth: return "gaussian_both";
    }
    return "?";
}

InitScheme parse_init(const json& node) {
    InitScheme scheme;
    if (node.is_string()) {
        scheme.variant = parse_init_variant(node.get<std::string>());
        return scheme;
    }
    if (!node.is_object()) fail("init must be a scheme name or an object");
    reject_unknown_keys(node, "init", {"scheme", "var_a", "var_b"});
    if (!node.contains("scheme") || !node["scheme"].is_string()) {
        fail("init.scheme must name a scheme");
    }
    scheme.variant = parse_init_variant(node["scheme"].get<std::string>());
    if (node.contains("var_a")) scheme.var_a = get_number(node, "var_a", 0.0);
    if (node.contains("var_b")) scheme.var_b = get_number(node, "var_b", 0.0);
    if ((scheme.var_a || scheme.var_b) && scheme.variant != InitVariant::GaussianBoth) {
        fail("init.var_a / init.var_b apply only to gaussian_both");
    }
    return scheme;
}

OptimizerConfig parse_optimizer(const json& node) {
    OptimizerConfig config;
    if (node.is_null()) return config;
    if (!node.is_object()) fail("optimizer must be an object");
    reject_unknown_keys(node, "optimizer",
                        {"kind", "beta1", "beta2", "epsilon", "weight_decay", "lora_plus_ratio",
                         "schedule", "warmup_steps"});
    if (node.contains("kind")) {
        const std::string kind = node["kind"].is_string() ? node["kind"].get<std::string>() : "";
        if (kind == "adamw") {
            config.kind = OptimizerKind::AdamW;
        } else if (kind == "sign_sgd") {
            config.kind = OptimizerKind::SignSgd;
        } else {
            fail("optimizer.kind must be \"adamw\" or \"sign_sgd\"");
        }
    }
    config.beta1 = get_number(node, "beta1", config.beta1);
    config.beta2 = get_number(node, "beta2", config.beta2);
    config.epsilon = get_number(node, "epsilon", config.epsilon);
    config.weight_decay = get_number(node, "weight_decay", config.weight_decay);
    config.lora_plus_ratio = get_number(node, "lora_plus_ratio", config.lora_plus_ratio);
    if (node.contains("schedule")) {
        const std::string sched =
            node["schedule"].is_string() ? node["schedule"].get<std::string>() : "";
        if (sched == "constant") {
            config.schedule = LrSchedule::Constant;
        } else if (sched == "linear") {
            config.schedule = LrSchedule::Linear;
        } else {
            fail("optimizer.schedule must be \"constant\" or \"linear\"");
        }
    }
    config.warmup_steps = get_size(node, "warmup_steps", config.warmup_steps);
    if (config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 || config.beta2 >= 1.0) {
        fail("optimizer betas must lie in [0, 1)");
    }
    if (!(config.epsilon > 0.0)) fail("optimizer.epsilon must be > 0");
    if (config.weight_decay < 0.0) fail("optimizer.weight_decay must be >= 0");
    if (!(config.lora_plus_ratio > 0.0)) fail("optimizer.lora_plus_ratio must be > 0");
    return config;
}

void check_lambda(double lambda, const char* where) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        fail(std::string(where) + " must lie in (0, 1), got " + std::to_string(lambda));
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("not valid JSON: ") + e.what());
    }
    if (!root.is_object()) fail("top level must be an object");
    reject_unknown_keys(root, "top level",
                        {"task", "init", "optimizer", "stable_lora", "steps", "scaling", "sweep",
                         "fig2"});

    RunConfig config;

    if (root.contains("task")) {
        const json& task = root["task"];
        if (!task.is_object()) fail("task must be an object");
        reject_unknown_keys(task, "task", {"m", "n", "r", "batch", "target_rank", "seed"});
        config.task.m = get_size(task, "m", config.task.m);
        config.task.n = get_size(task, "n", config.task.n);
        config.task.r = get_size(task, "r", config.task.r);
        config.task.batch = get_size(task, "batch", config.task.batch);
        config.task.target_rank = get_size(task, "target_rank", config.task.target_rank);
        config.task.seed = get_u64(task, "seed", config.task.seed);
        if (config.task.m == 0 || config.task.n == 0 || config.task.r == 0 ||
            config.task.batch == 0 || config.task.target_rank == 0) {
            fail("task dimensions must be positive");
        }
    }

    if (root.contains("init")) config.init = parse_init(root["init"]);
    if (root.contains("optimizer")) config.optimizer = parse_optimizer(root["optimizer"]);

    if (root.contains("stable_lora")) {
        const json& sl = root["stable_lora"];
        if (!sl.is_object()) fail("stable_lora must be an object");
        reject_unknown_keys(sl, "stable_lora", {"lambda"});
        const double lambda = get_number(sl, "lambda", 0.001);
        check_lambda(lambda, "stable_lora.lambda");
        config.stable_lambda = lambda;
    }

    config.steps = get_size(root, "steps", config.steps);
    if (config.steps < 1) fail("steps must be >= 1");

    if (root.contains("scaling")) {
        const json& sc = root["scaling"];
        if (!sc.is_object()) fail("scaling must be an object");
        reject_unknown_keys(sc, "scaling", {"eta_base", "eta_exponent", "s_base", "s_exponent"});
        config.eta_base = get_number(sc, "eta_base", config.eta_base);
        config.eta_exponent = get_number(sc, "eta_exponent", config.eta_exponent);
        config.s_base = get_number(sc, "s_base", config.s_base);
        config.s_exponent = get_number(sc, "s_exponent", config.s_exponent);
        if (!(config.eta_base > 0.0)) fail("scaling.eta_base must be > 0");
        if (!(config.s_base > 0.0)) fail("scaling.s_base must be > 0");
    }

    if (root.contains("sweep")) {
        const json& sw = root["sweep"];
        if (!sw.is_object()) fail("sweep must be an object");
        reject_unknown_keys(sw, "sweep", {"widths", "seeds", "measure_steps"});
        if (sw.contains("widths")) {
            if (!sw["widths"].is_array()) fail("sweep.widths must be an array");
            config.sweep.widths = sw["widths"].get<std::vector<std::size_t>>();
        }
        if (sw.contains("seeds")) {
            if (!sw["seeds"].is_array()) fail("sweep.seeds must be an array");
            config.sweep.seeds = sw["seeds"].get<std::vector<std::uint64_t>>();
        }
        if (sw.contains("measure_steps")) {
            if (!sw["measure_steps"].is_array()) fail("sweep.measure_steps must be an array");
            config.sweep.measure_steps = sw["measure_steps"].get<std::vector<std::size_t>>();
        }
        for (const std::size_t ms : config.sweep.measure_steps) {
            if (ms < 1 || ms > config.steps) {
                fail("sweep.measure_steps entries must lie in [1, steps]");
            }
        }
    }

    if (root.contains("fig2")) {
        const json& f = root["fig2"];
        if (!f.is_object()) fail("fig2 must be an object");
        reject_unknown_keys(f, "fig2", {"lambda"});
        config.fig2_lambda = get_number(f, "lambda", config.fig2_lambda);
        check_lambda(config.fig2_lambda, "fig2.lambda");
    }

    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string serialize_run_config(const RunConfig& config) {
    json root;
    root["task"] = {{"m", config.task.m},
                    {"n", config.task.n},
                    {"r", config.task.r},
                    {"batch", config.task.batch},
                    {"target_rank", config.task.target_rank},
                    {"seed", config.task.seed}};
    json init{{"scheme", init_variant_name(config.init.variant)}};
    if (config.init.var_a) init["var_a"] = *config.init.var_a;
    if (config.init.var_b) init["var_b"] = *config.init.var_b;
    root["init"] = init;
    root["optimizer"] = {
        {"kind", config.optimizer.kind == OptimizerKind::AdamW ? "adamw" : "sign_sgd"},
        {"beta1", config.optimizer.beta1},
        {"beta2", config.optimizer.beta2},
        {"epsilon", config.optimizer.epsilon},
        {"weight_decay", config.optimizer.weight_decay},
        {"lora_plus_ratio", config.optimizer.lora_plus_ratio},
        {"schedule", config.optimizer.schedule == LrSchedule::Linear ? "linear" : "constant"},
        {"warmup_steps", config.optimizer.warmup_steps}};
    if (config.stable_lambda) {
        root["stable_lora"] = {{"lambda", *config.stable_lambda}};
    }
    root["steps"] = config.steps;
    root["scaling"] = {{"eta_base", config.eta_base},
                       {"eta_exponent", config.eta_exponent},
                       {"s_base", config.s_base},
                       {"s_exponent", config.s_exponent}};
    root["sweep"] = {{"widths", config.sweep.widths},
                     {"seeds", config.sweep.seeds},
                     {"measure_steps", config.sweep.measure_steps}};
    root["fig2"] = {{"lambda", config.fig2_lambda}};
    return root.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& config) {
    const std::string text = serialize_run_config(config);
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (const char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001B3ull;
    }
    return hash;
}

TrialConfig to_trial_config(const RunConfig& config) {
    TrialConfig trial;
    trial.task = config.task;
    trial.init = config.init;
    trial.optimizer = config.optimizer;
    if (config.stable_lambda) {
        trial.stable_lora = StableLoraState{*config.stable_lambda, false, 0};
    }
    trial.steps = config.steps;
    trial.eta_base = config.eta_base;
    trial.eta_exponent = config.eta_exponent;
    trial.s_base = config.s_base;
    trial.s_exponent = config.s_exponent;
    return trial;
}

}  // namespace loralab
