#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssd/attacks.hpp"
#include "ssd/classifier.hpp"
#include "ssd/filters.hpp"

namespace ssd {

/// Outcome chain for one attacked sample: clean, adversarial, and defended
/// predictions at every strength level of a sweep.
struct EvaluationRecord {
    std::size_t sample_id = 0;
    int true_label = 0;
    int clean_label = 0;
    double clean_confidence = 0.0;
    Prediction adv_prediction;
    std::map<double, Prediction> defended;

    const Prediction& at(double level) const;
    bool correct_at(double level) const { return at(level).label == true_label; }
};

struct SweepResult {
    std::string name;
    std::vector<double> axis;
    std::vector<double> accuracy;
    std::size_t n = 0;
    std::string fingerprint;
};

/// Per-class accuracy, ascending by accuracy (ties by class id).
struct CategoryStats {
    std::vector<int> classes;
    std::vector<double> accuracy;
    std::vector<std::size_t> counts;
};

struct MinIterationRecord {
    std::size_t sample_id = 0;
    int true_label = 0;
    std::optional<int> min_iterations; // empty: undefendable within the cap
    std::vector<char> correct_at;      // correctness after k iterations, k = 0..cap

    bool undefendable() const noexcept { return !min_iterations.has_value(); }
};

struct SubsetSelection {
    std::vector<std::size_t> sample_ids;
    std::size_t shortfall = 0; // requested minus available defended-correct samples
};

/// Records of one defense method at its chosen strength.
struct MethodRecords {
    std::string name;
    double level = 0.0;
    std::vector<EvaluationRecord> records;
};

struct SubsetTable {
    std::vector<std::string> methods;
    std::vector<std::vector<double>> accuracy; // [subset method][defense method]
    std::vector<std::size_t> subset_sizes;
};

/// Level 0 always denotes "no defense". Prepended unless already first.
std::vector<double> anchored_levels(const std::vector<double>& levels);

/// Defends `img` with spec at strength `level`; level 0 returns img unchanged.
Image defend(const SmootherSpec& spec, double level, const Image& img);

/// Throws ConfigError when the attack set was generated for another model.
void check_fingerprint(const Model& model, const AttackSet& set);

std::vector<EvaluationRecord> evaluate_defense(const Model& model, const AttackSet& set, const SmootherSpec& spec,
                                               const std::vector<double>& levels, unsigned workers = 0);

SweepResult sweep_from_records(const std::vector<EvaluationRecord>& records, const std::vector<double>& levels,
                               const std::string& name = "defended");

struct DefenseSweep {
    SweepResult sweep;
    std::vector<EvaluationRecord> records;
};

/// Accuracy against true labels at each strength, identity level anchored.
DefenseSweep defense_strength_sweep(const Model& model, const AttackSet& set, const SmootherSpec& spec,
                                    const std::vector<double>& levels, unsigned workers = 0);

struct AttackIterationSweep {
    SweepResult defended;
    SweepResult undefended;
};

/// Runs PGD once per correctly classified sample (up to sample_limit; 0 = all)
/// and scores the iterate at every axis point with and without the fixed
/// defense. The PGD step size must not depend on the axis, so a zero
/// step_size resolves against pgd.iterations as usual.
AttackIterationSweep attack_iteration_sweep(const Model& model, const Dataset& data, const PgdSpec& pgd,
                                            const SmootherSpec& defense, const std::vector<int>& iteration_axis,
                                            std::size_t sample_limit = 0, unsigned workers = 0);

CategoryStats per_category_accuracy(const std::vector<EvaluationRecord>& records, double level);

/// Top `size` defended-correct samples by defended confidence (descending,
/// ties by sample id).
SubsetSelection select_optimal_subset(const std::vector<EvaluationRecord>& records, double level, std::size_t size);

SubsetTable cross_evaluate_subsets(const std::vector<MethodRecords>& methods, std::size_t size);

/// Smallest iteration count in [0, cap] that restores the true label,
/// computed by stepping the smoother incrementally.
std::vector<MinIterationRecord> min_defense_iterations(const Model& model, const AttackSet& set,
                                                       const SmootherSpec& spec, int cap = 30,
                                                       unsigned workers = 0);

double adaptive_upper_bound_accuracy(const std::vector<MinIterationRecord>& records);
double fixed_iteration_accuracy(const std::vector<MinIterationRecord>& records, int iterations);

/// Counts per minimum iteration (index k = 0..cap) plus a final undefendable bin.
std::vector<std::size_t> min_iteration_histogram(const std::vector<MinIterationRecord>& records, int cap);

} // namespace ssd
