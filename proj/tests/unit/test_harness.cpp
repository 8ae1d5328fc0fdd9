#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "ssd/error.hpp"
#include "ssd/harness.hpp"

using namespace ssd;

namespace {

struct Fixture {
    Model model;
    Dataset test;
    AttackSet set;
};

// A small linear model on the synthetic shapes and a PGD set against it.
const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture x;
        TrainConfig cfg;
        cfg.architecture = "dense";
        cfg.epochs = 4;
        cfg.learning_rate = 0.05;
        x.model = train(synthetic_shapes(400, 1, Split::Train), cfg);
        x.test = synthetic_shapes(80, 2, Split::Test);
        PgdSpec pgd;
        pgd.epsilon = 0.03;
        pgd.iterations = 10;
        x.set = generate_attack_set(x.model, x.test, pgd, {}, 0);
        return x;
    }();
    return f;
}

SmootherSpec diffusion() { return SmootherSpec::defaults(SmoothingMethod::AnisotropicDiffusion); }

} // namespace

TEST_CASE("fixture has both successful and failed attacks") {
    const auto& f = fixture();
    REQUIRE(f.set.candidates() >= 20);
    CHECK(f.set.successes() > 0);
    CHECK(f.set.successes() < f.set.candidates());
}

TEST_CASE("level zero is the undefended accuracy") {
    const auto& f = fixture();
    const auto sweep = defense_strength_sweep(f.model, f.set, diffusion(), {1, 2, 5}, 0);
    CHECK(sweep.sweep.axis == std::vector<double>{0, 1, 2, 5});
    CHECK(sweep.sweep.n == f.set.candidates());
    CHECK(sweep.sweep.accuracy[0] == doctest::Approx(1.0 - f.set.success_rate()).epsilon(1e-15));
    for (const auto& r : sweep.records) CHECK(r.at(0.0) == r.adv_prediction);
    CHECK(anchored_levels({0, 3}) == std::vector<double>{0, 3});
    CHECK(defend(diffusion(), 0, f.set.entries[0].adv_image) == f.set.entries[0].adv_image);
    CHECK_THROWS_AS(sweep.records[0].at(7.0), ParameterError);

    const auto serial = defense_strength_sweep(f.model, f.set, diffusion(), {1, 2, 5}, 1);
    CHECK(serial.sweep.accuracy == sweep.sweep.accuracy);

    AttackSet empty = f.set;
    empty.entries.clear();
    CHECK_THROWS_AS(defense_strength_sweep(f.model, empty, diffusion(), {1}, 0), ConfigError);
    CHECK_THROWS_AS(defense_strength_sweep(f.model, f.set, SmootherSpec::defaults(SmoothingMethod::Mean), {4}, 0),
                    ParameterError);
}

TEST_CASE("fingerprint mismatch is refused") {
    const auto& f = fixture();
    const auto other = Model::dense_only({28, 28, 1}, 10, 77);
    CHECK_THROWS_AS(evaluate_defense(other, f.set, diffusion(), {0, 1}, 0), ConfigError);
    CHECK_THROWS_AS(min_defense_iterations(other, f.set, diffusion(), 3, 0), ConfigError);
}

TEST_CASE("per-category accuracy") {
    const auto& f = fixture();
    const auto records = evaluate_defense(f.model, f.set, diffusion(), {0, 3}, 0);
    const auto stats = per_category_accuracy(records, 3);
    const std::size_t total = std::accumulate(stats.counts.begin(), stats.counts.end(), std::size_t{0});
    CHECK(total == records.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < stats.classes.size(); ++i) {
        weighted += stats.accuracy[i] * static_cast<double>(stats.counts[i]);
        if (i > 0) CHECK(stats.accuracy[i - 1] <= stats.accuracy[i]);
    }
    const auto overall = sweep_from_records(records, {3}, "x").accuracy[0];
    CHECK(std::abs(weighted / static_cast<double>(total) - overall) <= 1e-12);
}

TEST_CASE("optimal subsets") {
    const auto& f = fixture();
    const auto diff = evaluate_defense(f.model, f.set, diffusion(), {0, 5}, 0);
    const auto mean_spec = SmootherSpec::defaults(SmoothingMethod::Mean);
    const auto mean = evaluate_defense(f.model, f.set, mean_spec, {0, 3}, 0);
    const auto bil = evaluate_defense(f.model, f.set, SmootherSpec::defaults(SmoothingMethod::Bilateral), {0, 5}, 0);
    const std::vector<MethodRecords> methods{{"diffusion", 5, diff}, {"mean", 3, mean}, {"bilateral", 5, bil}};

    const auto sel = select_optimal_subset(diff, 5, 10);
    for (auto id : sel.sample_ids) {
        const auto it = std::find_if(diff.begin(), diff.end(), [&](const auto& r) { return r.sample_id == id; });
        CHECK(it->correct_at(5));
    }
    const auto huge = select_optimal_subset(diff, 5, 100000);
    CHECK(huge.sample_ids.size() + huge.shortfall == 100000);

    const auto table = cross_evaluate_subsets(methods, 10);
    REQUIRE(table.accuracy.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(table.accuracy[i].size() == 3);
        if (table.subset_sizes[i] > 0) CHECK(table.accuracy[i][i] == 1.0);
        for (double a : table.accuracy[i]) {
            CHECK(a >= 0.0);
            CHECK(a <= 1.0);
        }
    }

    const auto single = cross_evaluate_subsets({methods[1]}, 10);
    CHECK(single.methods == std::vector<std::string>{"mean"});
    CHECK(single.accuracy.size() == 1);
    CHECK(single.accuracy[0].size() == 1);

    auto fewer = methods;
    fewer[1].records.pop_back();
    CHECK_THROWS_AS(cross_evaluate_subsets(fewer, 10), ConfigError);
    CHECK_THROWS_AS(cross_evaluate_subsets({}, 10), ConfigError);
}

TEST_CASE("minimum defense iterations") {
    const auto& f = fixture();
    const int cap = 8;
    const auto spec = diffusion();
    const auto records = min_defense_iterations(f.model, f.set, spec, cap, 0);
    REQUIRE(records.size() == f.set.candidates());

    std::vector<double> levels;
    for (int k = 1; k <= cap; ++k) levels.push_back(k);
    const auto sweep = defense_strength_sweep(f.model, f.set, spec, levels, 0).sweep;

    const double adaptive = adaptive_upper_bound_accuracy(records);
    for (int k = 0; k <= cap; ++k) {
        const double fixed = fixed_iteration_accuracy(records, k);
        CHECK(fixed == sweep.accuracy[static_cast<std::size_t>(k)]);
        CHECK(adaptive >= fixed);
    }
    for (const auto& r : records) {
        if (r.min_iterations) {
            CHECK(r.correct_at[static_cast<std::size_t>(*r.min_iterations)]);
            for (int k = 0; k < *r.min_iterations; ++k) CHECK_FALSE(r.correct_at[static_cast<std::size_t>(k)]);
        } else {
            for (char c : r.correct_at) CHECK_FALSE(c);
        }
    }
    const auto hist = min_iteration_histogram(records, cap);
    CHECK(hist.size() == static_cast<std::size_t>(cap) + 2);
    CHECK(std::accumulate(hist.begin(), hist.end(), std::size_t{0}) == records.size());
    CHECK(hist[0] == static_cast<std::size_t>(std::llround(sweep.accuracy[0] * static_cast<double>(records.size()))));

    CHECK_THROWS_AS(min_defense_iterations(f.model, f.set, SmootherSpec::defaults(SmoothingMethod::Median), 5, 0),
                    ParameterError);
    CHECK_THROWS_AS(adaptive_upper_bound_accuracy({}), ParameterError);
    CHECK_THROWS_AS(fixed_iteration_accuracy(records, cap + 1), ParameterError);

    const auto mcm = min_defense_iterations(f.model, f.set, SmootherSpec::defaults(SmoothingMethod::ModifiedCurvatureMotion), 3, 0);
    CHECK(mcm.size() == records.size());
}

TEST_CASE("attack iteration sweep") {
    const auto& f = fixture();
    PgdSpec pgd;
    pgd.epsilon = 0.08;
    pgd.step_size = 0.01;
    const auto spec = diffusion().with_strength(3);
    const auto s = attack_iteration_sweep(f.model, f.test, pgd, spec, {1, 2, 4, 8}, 15, 0);
    CHECK(s.defended.axis == std::vector<double>{1, 2, 4, 8});
    CHECK(s.defended.n <= 15);
    CHECK(s.undefended.n == s.defended.n);
    CHECK(s.undefended.accuracy.size() == 4);

    // Points of the sweep agree with standalone attacks of that length.
    PgdSpec eight = pgd;
    eight.iterations = 8;
    std::size_t hits = 0, n = 0;
    for (std::size_t i = 0; i < f.test.size() && n < 15; ++i) {
        if (predict(f.model, f.test.images[i]).label != f.test.labels[i]) continue;
        ++n;
        eight.seed = derive_seed(pgd.seed, i);
        hits += predict(f.model, pgd_attack(f.model, f.test.images[i], f.test.labels[i], eight).adv_image).label ==
                f.test.labels[i];
    }
    CHECK(s.undefended.accuracy[3] == doctest::Approx(static_cast<double>(hits) / static_cast<double>(n)).epsilon(1e-15));

    CHECK_THROWS_AS(attack_iteration_sweep(f.model, f.test, pgd, spec, {3, 2}, 5, 0), ParameterError);
    CHECK_THROWS_AS(attack_iteration_sweep(f.model, f.test, pgd, spec, {}, 5, 0), ParameterError);
}
