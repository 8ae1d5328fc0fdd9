#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "ssd/error.hpp"
#include "ssd/report.hpp"

using namespace ssd;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ExperimentResult sweep_result() {
    ExperimentResult r;
    r.experiment = "sweep-defense";
    r.model_fingerprint = "0123456789abcdef";
    r.defense = Json{{"method", "mean"}};
    r.seed = 3;
    r.sweeps.push_back(SweepResult{"defended", {0, 3, 5, 7}, {0.1, 0.5, 0.625, 1.0 / 3.0}, 24, "0123456789abcdef"});
    return r;
}

ExperimentResult min_iters_result() {
    ExperimentResult r;
    r.experiment = "min-iters";
    r.cap = 2;
    r.min_iterations = {MinIterationRecord{0, 1, 0, {1, 1, 1}}, MinIterationRecord{1, 2, 2, {0, 0, 1}},
                        MinIterationRecord{4, 0, std::nullopt, {0, 0, 0}}};
    return r;
}

ExperimentResult table_result() {
    ExperimentResult r;
    r.experiment = "subset-table";
    r.subset_size = 2;
    r.table = SubsetTable{{"a", "b"}, {{1.0, 0.5}, {0.0, 1.0}}, {2, 2}};
    return r;
}

ExperimentResult category_result() {
    ExperimentResult r;
    r.experiment = "category-stats";
    r.category_level = 4;
    r.categories = CategoryStats{{3, 0, 1}, {0.25, 0.5, 0.9}, {4, 2, 10}};
    return r;
}

} // namespace

TEST_CASE("experiment names") {
    CHECK(experiment_names().size() == 5);
    for (const auto& n : experiment_names()) CHECK(is_experiment_name(n));
    CHECK_FALSE(is_experiment_name("sweep"));
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333");
}

TEST_CASE("sweep CSV has one row per level") {
    const auto dir = testing::scratch_dir("report_sweep");
    const auto paths = emit_report({sweep_result()}, dir);
    CHECK(paths.size() == 3);
    const auto csv = slurp(dir / "sweep-defense.csv");
    CHECK(line_count(csv) == 5);
    CHECK(csv.rfind("strength,accuracy\n0,0.1\n", 0) == 0);
    CHECK(slurp(dir / "sweep-defense.svg").find("<svg") != std::string::npos);

    const auto summary = Json::parse(slurp(dir / "summary.json"));
    REQUIRE(summary["entries"].size() == 1);
    const auto& e = summary["entries"][0];
    CHECK(e["experiment"] == "sweep-defense");
    CHECK(e["n"] == 24);
    CHECK(e["values"].size() == 4);
    CHECK(e["files"].size() == 2);
}

TEST_CASE("empty report") {
    const auto dir = testing::scratch_dir("report_empty");
    const auto paths = emit_report({}, dir);
    REQUIRE(paths.size() == 1);
    CHECK(Json::parse(slurp(paths[0]))["entries"].empty());
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
}

TEST_CASE("other experiment tables") {
    const auto dir = testing::scratch_dir("report_kinds");
    emit_report({min_iters_result(), table_result(), category_result(), sweep_result(), sweep_result()}, dir);

    const auto hist = slurp(dir / "min-iters.csv");
    CHECK(hist == "min_iterations,count\n0,1\n1,0\n2,1\nundefendable,1\n");
    const auto fixed = slurp(dir / "min-iters_fixed.csv");
    CHECK(line_count(fixed) == 5);
    CHECK(fixed.find("adaptive,0.666667") != std::string::npos);

    const auto table = slurp(dir / "subset-table.csv");
    CHECK(line_count(table) == 5);
    CHECK(table.find("a,b,0.5") != std::string::npos);

    const auto cats = slurp(dir / "category-stats.csv");
    CHECK(cats.rfind("rank,class,count,accuracy\n0,3,4,0.25\n", 0) == 0);

    CHECK(std::filesystem::exists(dir / "sweep-defense_2.csv"));
}

TEST_CASE("reports are byte-identical across runs and round trips") {
    const std::vector<ExperimentResult> results{sweep_result(), min_iters_result(), table_result(), category_result()};
    const auto a = testing::scratch_dir("report_a");
    const auto b = testing::scratch_dir("report_b");
    const auto pa = emit_report(results, a);

    std::vector<ExperimentResult> reloaded;
    for (std::size_t i = 0; i < results.size(); ++i) {
        save_result(results[i], b / ("r" + std::to_string(i) + ".json"));
        reloaded.push_back(load_result(b / ("r" + std::to_string(i) + ".json")));
    }
    const auto pb = emit_report(reloaded, b / "out");
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CAPTURE(pa[i]);
        CHECK(pa[i].filename() == pb[i].filename());
        CHECK(slurp(pa[i]) == slurp(pb[i]));
    }
}

TEST_CASE("result loading errors") {
    const auto dir = testing::scratch_dir("report_errors");
    CHECK_THROWS_AS(load_result(dir / "missing.json"), IoError);
    std::ofstream(dir / "bad.json") << "{\"experiment\": ";
    CHECK_THROWS_AS(load_result(dir / "bad.json"), FormatError);
    std::ofstream(dir / "kind.json") << "{\"experiment\": \"nope\"}";
    CHECK_THROWS_AS(load_result(dir / "kind.json"), FormatError);
}
