// ssd: command-line front end over the C API.
//
//   ssd train      -c config.json
//   ssd attack     -c config.json
//   ssd experiment -c config.json [KIND]
//   ssd report     result.json... -o DIR
//
// Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssd/ssd.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct RunOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::string seed, output_dir, workers;
    std::string kind;
};

struct Failure {
    int exit_code;
    std::string message;
};

std::string take_string(char* s) {
    std::string out = s ? s : "";
    ssd_string_free(s);
    return out;
}

void check(ssd_status status, int exit_code) {
    if (status != SSD_OK) throw Failure{exit_code, std::string(ssd_status_name(status)) + ": " + ssd_last_error()};
}

std::string read_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kRuntimeError, "cannot read config file: " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string override(const std::string& config, const std::string& assignment) {
    char* out = nullptr;
    check(ssd_config_override(config.c_str(), assignment.c_str(), &out), kUsageError);
    return take_string(out);
}

std::string build_config(const RunOptions& o) {
    std::string config = o.config_path.empty() ? std::string("{}") : read_config(o.config_path);
    for (const auto& s : o.sets) config = override(config, s);
    if (!o.seed.empty()) config = override(config, "seed=" + o.seed);
    if (!o.workers.empty()) config = override(config, "workers=" + o.workers);
    if (!o.output_dir.empty()) config = override(config, "output_dir=" + Json(o.output_dir).dump());
    if (!o.kind.empty()) config = override(config, "experiment.kind=" + Json(o.kind).dump());
    return config;
}

int run_command(const RunOptions& o, const char* command) {
    const std::string config = build_config(o);
    const ssd_status v = ssd_config_validate(config.c_str(), command);
    if (v != SSD_OK) {
        const int code = (v == SSD_ERR_CONFIG || v == SSD_ERR_PARAMETER) ? kUsageError : kRuntimeError;
        check(v, code);
    }
    char* raw = nullptr;
    check(ssd_run(config.c_str(), command, &raw), kRuntimeError);
    const Json summary = Json::parse(take_string(raw));
    const std::string cmd = command;
    if (cmd == "train") {
        std::printf("model: %s (%s)\n", summary["model"].get<std::string>().c_str(),
                    summary["fingerprint"].get<std::string>().c_str());
        std::printf("train accuracy: %.4f\n", summary["train_accuracy"].get<double>());
        if (!summary["test_accuracy"].is_null()) {
            std::printf("test accuracy: %.4f\n", summary["test_accuracy"].get<double>());
        }
    } else if (cmd == "attack") {
        std::printf("attack set: %s\n", summary["attack_set"].get<std::string>().c_str());
        std::printf("candidates: %zu, successes: %zu, success rate: %.4f\n", summary["candidates"].get<std::size_t>(),
                    summary["successes"].get<std::size_t>(), summary["success_rate"].get<double>());
    } else {
        std::printf("experiment %s written to %s\n", summary["experiment"].get<std::string>().c_str(),
                    summary["output_dir"].get<std::string>().c_str());
        for (const auto& f : summary["files"]) std::printf("  %s\n", f.get<std::string>().c_str());
    }
    return 0;
}

int run_report(const std::vector<std::string>& inputs, const std::string& out_dir) {
    std::vector<const char*> paths;
    for (const auto& p : inputs) paths.push_back(p.c_str());
    char* raw = nullptr;
    check(ssd_report_emit(paths.data(), paths.size(), out_dir.c_str(), &raw), kRuntimeError);
    const Json summary = Json::parse(take_string(raw));
    for (const auto& f : summary["files"]) std::printf("%s\n", f.get<std::string>().c_str());
    return 0;
}

void add_run_options(CLI::App* sub, RunOptions& o) {
    sub->add_option("-c,--config", o.config_path, "JSON config file");
    sub->add_option("--set", o.sets, "override a config key, e.g. --set attack.epsilon=0.05 (repeatable)");
    sub->add_option("--seed", o.seed, "override the global seed");
    sub->add_option("--output-dir", o.output_dir, "override output_dir");
    sub->add_option("--workers", o.workers, "override workers (0 = all cores)");
    sub->footer(ssd_config_reference());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Test-time smoothing defenses against adversarial attacks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ssd_version());

    RunOptions train_opts, attack_opts, exp_opts;
    auto* train = app.add_subcommand("train", "train a classifier and save it to model.path");
    add_run_options(train, train_opts);
    auto* attack = app.add_subcommand("attack", "generate an attack set for the test split");
    add_run_options(attack, attack_opts);
    auto* experiment = app.add_subcommand(
        "experiment", std::string("run an experiment and write its report; kinds: ") + ssd_experiment_names());
    add_run_options(experiment, exp_opts);
    experiment->add_option("kind", exp_opts.kind, "experiment kind (overrides experiment.kind)");

    std::vector<std::string> report_inputs;
    std::string report_dir;
    auto* report = app.add_subcommand("report", "re-render saved result.json files");
    report->add_option("results", report_inputs, "result.json files")->required();
    report->add_option("-o,--output-dir", report_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*train) return run_command(train_opts, "train");
        if (*attack) return run_command(attack_opts, "attack");
        if (*experiment) return run_command(exp_opts, "experiment");
        return run_report(report_inputs, report_dir);
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
        return f.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
}
