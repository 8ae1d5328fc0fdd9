#pragma once

// Config-driven commands shared by the C API and the command-line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssd/attacks.hpp"
#include "ssd/classifier.hpp"
#include "ssd/filters.hpp"
#include "ssd/json_io.hpp"
#include "ssd/report.hpp"

namespace ssd {

struct DatasetConfig {
    std::string kind = "idx"; // "idx" or "synthetic"
    std::filesystem::path train_images, train_labels, test_images, test_labels;
    std::size_t train_size = 0; // 0 = whole file (idx); synthetic default 2000
    std::size_t test_size = 0;  // 0 = whole file (idx); synthetic default 500
};

struct ExperimentConfig {
    std::string kind;
    std::vector<double> levels;      // sweep-defense
    std::vector<int> iteration_axis; // sweep-attack, default 1..100
    std::size_t samples = 0;         // sweep-attack sample limit, 0 = all
    std::optional<double> level;     // category-stats, default the defense strength
    std::size_t subset_size = 100;   // subset-table
    int cap = 30;                    // min-iters
};

struct NamedDefense {
    std::string name;
    SmootherSpec spec;
};

struct RunConfig {
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::filesystem::path output_dir = "ssd_out";
    DatasetConfig dataset;
    std::filesystem::path model_path; // default <output_dir>/model.ssmd
    TrainConfig train;
    std::optional<AttackSpec> attack;
    std::filesystem::path attack_set; // default <output_dir>/attack
    std::vector<NamedDefense> defenses;
    std::optional<ExperimentConfig> experiment;
    Json source = Json::object();
};

enum class Command { Train, Attack, Experiment };

/// Full schema check; every violation is a ConfigError naming its key path.
RunConfig parse_run_config(const Json& j);

/// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(Json& config, const std::string& assignment);

/// Command-specific requirements: needed sections present (ConfigError) and
/// referenced input files present (IoError naming the path).
void check_inputs(const RunConfig& cfg, Command cmd);

/// Each returns a short JSON summary of what was done.
Json run_train(const RunConfig& cfg);
Json run_attack(const RunConfig& cfg);
Json run_experiment(const RunConfig& cfg);

/// Runs the experiment named in cfg and returns its result without writing.
ExperimentResult compute_experiment(const RunConfig& cfg);

/// Text for `--help`: every config key with its meaning and default.
std::string config_reference();

} // namespace ssd
