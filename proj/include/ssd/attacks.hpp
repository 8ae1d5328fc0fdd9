#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "ssd/classifier.hpp"
#include "ssd/image.hpp"

namespace ssd {

/// L-infinity projected gradient descent. step_size == 0 selects
/// 2.5 * epsilon / iterations.
struct PgdSpec {
    double epsilon = 0.1;
    double step_size = 0.0;
    int iterations = 20;
    bool random_start = false;
    std::uint64_t seed = 0;

    double resolved_step_size() const noexcept {
        return step_size > 0.0 ? step_size : 2.5 * epsilon / iterations;
    }
    friend bool operator==(const PgdSpec&, const PgdSpec&) = default;
};

struct SaltPepperSpec {
    std::vector<double> density_levels{0.01, 0.02, 0.05, 0.1, 0.2};
    std::uint64_t seed = 0;

    friend bool operator==(const SaltPepperSpec&, const SaltPepperSpec&) = default;
};

using AttackSpec = std::variant<PgdSpec, SaltPepperSpec>;

void validate(const PgdSpec& spec);
void validate(const SaltPepperSpec& spec);
void validate(const AttackSpec& spec);

/// Named presets. The pgd-eps-* presets carry the ImageNet budgets; the
/// desk-eps-* presets are sized for 28x28 digits.
AttackSpec attack_preset(const std::string& name);
std::vector<std::string> attack_preset_names();

struct AdversarialExample {
    std::size_t original_id = 0;
    Image adv_image;
    bool success = false;
    int attack_iterations_used = 0;
    double linf = 0.0;
    int adv_label = 0;
    double adv_confidence = 0.0;
};

/// Incremental PGD: the state after n then m further steps is identical to
/// the state after n + m steps.
class PgdRun {
public:
    PgdRun(const Model& model, const Image& original, int label, const PgdSpec& spec);

    void step();
    void advance(int steps) {
        for (int i = 0; i < steps; ++i) step();
    }

    const Image& current() const noexcept { return current_; }
    const Image& original() const noexcept { return original_; }
    int iterations_done() const noexcept { return done_; }

private:
    const Model& model_;
    Image original_;
    Image current_;
    int label_;
    double epsilon_;
    double step_size_;
    int done_ = 0;
};

AdversarialExample pgd_attack(const Model& model, const Image& img, int label, const PgdSpec& spec);

/// Indices (pixel positions, row-major) perturbed at each density level are
/// prefixes of one seeded permutation, so the sets are nested.
std::vector<std::size_t> salt_pepper_order(std::size_t pixels, std::uint64_t seed);
std::size_t salt_pepper_count(double density, std::size_t pixels) noexcept;
Image salt_pepper_noise(const Image& img, double density, std::uint64_t seed);

AdversarialExample salt_pepper_attack(const Model& model, const Image& img, int label, const SaltPepperSpec& spec);

/// One stored adversarial example plus its provenance.
struct AttackEntry {
    std::size_t id = 0;
    int true_label = 0;
    int clean_label = 0;
    double clean_confidence = 0.0;
    bool success = false;
    double linf = 0.0;
    int iterations_used = 0;
    std::uint64_t seed = 0;
    std::string file;
    Image adv_image;
};

/// Adversarial examples for the correctly classified samples of a dataset.
struct AttackSet {
    AttackSpec spec;
    std::string model_fingerprint;
    std::size_t dataset_size = 0;
    std::vector<AttackEntry> entries;

    std::size_t candidates() const noexcept { return entries.size(); }
    std::size_t successes() const noexcept;
    double success_rate() const noexcept;
};

/// Attacks every correctly classified sample. Sample i uses seed
/// derive_seed(spec seed, i). When out_dir is non-empty the images are
/// written as raw SSIM1 files next to manifest.json.
AttackSet generate_attack_set(const Model& model, const Dataset& data, const AttackSpec& spec,
                              const std::filesystem::path& out_dir, unsigned workers = 0);

void save_attack_set(const AttackSet& set, const std::filesystem::path& out_dir);
AttackSet load_attack_set(const std::filesystem::path& dir);

} // namespace ssd
