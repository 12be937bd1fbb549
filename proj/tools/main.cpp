#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rankprox/errors.hpp"
#include "rankprox/experiment.hpp"
#include "rankprox/io.hpp"

namespace fs = std::filesystem;
using namespace rankprox;

namespace {

struct Args {
    std::string config;
    std::string out;
    std::string arm;
    std::uint64_t seed = 0;
    bool seed_set = false, arm_set = false;
};

// Loads the config file and applies command-line overrides.
ExperimentConfig resolve_config(const Args& args) {
    Config cfg = args.config.empty() ? Config() : Config::from_file(args.config);
    if (args.seed_set) cfg.set("seed", std::to_string(args.seed));
    if (args.arm_set) cfg.set("arm", args.arm);
    return ExperimentConfig::from_config(cfg);
}

std::string require_data_dir(const Args& args) {
    if (args.config.empty()) throw ConfigError("--config is required (must name data_dir)");
    Config cfg = Config::from_file(args.config);
    std::string dir = cfg.get_str("data_dir", "");
    if (dir.empty()) throw ConfigError("config key data_dir is required for this command");
    return dir;
}

void write_out(const Args& args, const std::string& name, const std::string& contents) {
    fs::create_directories(args.out);
    write_file_atomic((fs::path(args.out) / name).string(), contents);
}

int cmd_gen(const Args& args) {
    if (args.out.empty()) throw ConfigError("--out is required for gen");
    ExperimentConfig cfg = resolve_config(args);
    auto [groups, pairs] = generate_dataset(cfg, args.out);
    std::cout << "dataset: " << args.out << "\n"
              << "ranked groups: " << groups << "\n"
              << "comparable pairs: " << pairs << "\n";
    return 0;
}

int cmd_train(const Args& args) {
    if (args.out.empty()) throw ConfigError("--out is required for train");
    std::string data_dir = require_data_dir(args);
    ExperimentConfig cfg = resolve_config(args);
    Dataset ds = load_dataset(data_dir);
    if (ds.task != cfg.task)
        throw ConfigError("config task '" + cfg.task + "' does not match dataset task '" + ds.task + "'");

    TrainResult r = train_arm(cfg, ds);
    write_out(args, "train_log.csv", train_log_csv(r.log));
    fs::create_directories(args.out);
    auto params = r.net.params();
    save_checkpoint(params, (fs::path(args.out) / "model.rpk1").string());

    EvalResult test = evaluate_split(r.net, ds, ds.test);
    write_out(args, "eval.csv", eval_csv(test));
    write_out(args, "predictions.csv", predictions_csv(ds.test, test));
    std::cout << "arm: " << cfg.arm << "\n"
              << "test mae: " << format_g17(test.mae) << "\n"
              << "test srocc: " << format_g17(test.srocc) << "\n";
    return 0;
}

int cmd_eval(const Args& args) {
    std::string data_dir = require_data_dir(args);
    Config file = Config::from_file(args.config);
    std::string checkpoint = file.get_str("checkpoint", "");
    if (checkpoint.empty()) throw ConfigError("config key checkpoint is required for eval");
    ExperimentConfig cfg = resolve_config(args);
    Dataset ds = load_dataset(data_dir);

    Network net(cfg.input_shape(), cfg.net_spec, derive_seed(cfg.seed, "net-init"));
    auto params = net.params();
    load_checkpoint(params, checkpoint);
    EvalResult test = evaluate_split(net, ds, ds.test);
    if (!args.out.empty()) {
        write_out(args, "eval.csv", eval_csv(test));
        write_out(args, "predictions.csv", predictions_csv(ds.test, test));
    }
    std::cout << "mae: " << format_g17(test.mae) << "\n"
              << "mse: " << format_g17(test.mse) << "\n"
              << "lcc: " << format_g17(test.lcc) << "\n"
              << "srocc: " << format_g17(test.srocc) << "\n";
    return 0;
}

int cmd_active(const Args& args) {
    if (args.out.empty()) throw ConfigError("--out is required for active");
    std::string data_dir = require_data_dir(args);
    ExperimentConfig cfg = resolve_config(args);
    Dataset ds = load_dataset(data_dir);
    if (ds.task != cfg.task)
        throw ConfigError("config task '" + cfg.task + "' does not match dataset task '" + ds.task + "'");

    std::vector<std::pair<std::string, std::vector<ActiveCycleRecord>>> arms;
    for (SelectionPolicy policy : {SelectionPolicy::certainty, SelectionPolicy::random}) {
        arms.emplace_back(policy_name(policy), run_active_arm(cfg, ds, policy));
        const auto& rec = arms.back().second;
        std::cout << arms.back().first << " final mae: " << format_g17(rec.back().mae) << "\n";
    }
    write_out(args, "active.csv", active_csv(arms));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ranked-data regression trainer"};
    app.require_subcommand(1);

    Args args;
    auto add_common = [&](CLI::App* sub, bool with_arm) {
        sub->add_option("--config", args.config, "key=value config file");
        sub->add_option("--seed", args.seed, "master seed override")->each([&](const std::string&) {
            args.seed_set = true;
        });
        sub->add_option("--out", args.out, "output directory");
        if (with_arm)
            sub->add_option("--arm", args.arm, "baseline|multitask|active")->each([&](const std::string&) {
                args.arm_set = true;
            });
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset with ranked groups");
    add_common(gen, false);
    CLI::App* train = app.add_subcommand("train", "train one arm and write logs, metrics, and a checkpoint");
    add_common(train, true);
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval, false);
    CLI::App* active = app.add_subcommand("active", "run the labeling loop with both selection policies");
    add_common(active, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(args);
        if (train->parsed()) return cmd_train(args);
        if (eval->parsed()) return cmd_eval(args);
        if (active->parsed()) return cmd_active(args);
        throw ConfigError("no subcommand given");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
