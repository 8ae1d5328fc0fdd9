#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssd/harness.hpp"
#include "ssd/json_io.hpp"

namespace ssd {

std::vector<std::string> experiment_names();
bool is_experiment_name(const std::string& name);

/// Everything one experiment produced, in a form that can be written,
/// reloaded and rendered again.
struct ExperimentResult {
    std::string experiment;
    std::string model_fingerprint;
    Json attack = Json::object();
    Json defense = Json::object(); // a single spec, or an array for subset-table
    std::uint64_t seed = 0;

    std::vector<SweepResult> sweeps;        // sweep-defense: 1, sweep-attack: defended + undefended
    std::optional<CategoryStats> categories; // category-stats
    double category_level = 0.0;
    std::optional<SubsetTable> table;        // subset-table
    std::size_t subset_size = 0;
    std::vector<MinIterationRecord> min_iterations; // min-iters
    int cap = 30;
};

Json result_to_json(const ExperimentResult& r);
ExperimentResult result_from_json(const Json& j);
void save_result(const ExperimentResult& r, const std::filesystem::path& path);
ExperimentResult load_result(const std::filesystem::path& path);

/// Writes summary.json plus <experiment>.csv and <experiment>.svg per result.
/// Returns the written paths in order.
std::vector<std::filesystem::path> emit_report(const std::vector<ExperimentResult>& results,
                                               const std::filesystem::path& out_dir);

/// "%.6g"
std::string format_number(double v);

} // namespace ssd
