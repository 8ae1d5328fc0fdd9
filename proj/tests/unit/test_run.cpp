#include "doctest.h"
#include "helpers.hpp"
#include "ssd/error.hpp"
#include "ssd/run.hpp"

using namespace ssd;

namespace {

std::string config_error(const Json& j) {
    try {
        (void)parse_run_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

Json base() {
    return Json::parse(R"({
        "seed": 4,
        "dataset": {"kind": "synthetic", "train_size": 10, "test_size": 5},
        "attack": {"type": "pgd", "epsilon": 0.1, "iterations": 3},
        "defenses": [{"method": "anisotropic_diffusion"}, {"method": "mean", "name": "box"},
                     {"method": "mean"}, {"method": "mean"}],
        "experiment": {"kind": "sweep-defense", "levels": [1, 2, 3]}
    })");
}

} // namespace

TEST_CASE("config defaults and seeds") {
    const auto c = parse_run_config(base());
    CHECK(c.seed == 4);
    CHECK(c.train.seed == 4);
    REQUIRE(c.attack);
    CHECK(std::get<PgdSpec>(*c.attack).seed == 4);
    CHECK(c.model_path == std::filesystem::path("ssd_out") / "model.ssmd");
    CHECK(c.attack_set == std::filesystem::path("ssd_out") / "attack");
    REQUIRE(c.defenses.size() == 4);
    CHECK(c.defenses[0].name == "anisotropic_diffusion");
    CHECK(c.defenses[1].name == "box");
    CHECK(c.defenses[2].name == "mean");
    CHECK(c.defenses[3].name == "mean#2");
    REQUIRE(c.experiment);
    CHECK(c.experiment->iteration_axis.size() == 100);
    CHECK(c.experiment->subset_size == 100);
    CHECK(c.experiment->cap == 30);

    auto j = base();
    j["model"] = Json{{"train", {{"seed", 9}, {"epochs", 2}}}};
    j["attack"]["seed"] = 11;
    const auto d = parse_run_config(j);
    CHECK(d.train.seed == 9);
    CHECK(d.train.epochs == 2);
    CHECK(std::get<PgdSpec>(*d.attack).seed == 11);

    j["attack"] = Json{{"preset", "desk-eps-0.1"}};
    const auto e = parse_run_config(j);
    auto expected = std::get<PgdSpec>(attack_preset("desk-eps-0.1"));
    expected.seed = 4;
    CHECK(std::get<PgdSpec>(*e.attack) == expected);
}

TEST_CASE("config errors name the key path") {
    auto j = base();
    j["colour"] = 1;
    CHECK(config_error(j).find("colour") != std::string::npos);

    j = base();
    j["dataset"]["kind"] = "csv";
    CHECK(config_error(j).rfind("dataset.kind", 0) == 0);

    j = base();
    j["experiment"]["kind"] = "sweep";
    const auto msg = config_error(j);
    CHECK(msg.rfind("experiment.kind", 0) == 0);
    for (const auto& n : experiment_names()) CHECK(msg.find(n) != std::string::npos);

    j = base();
    j["experiment"]["levels"] = Json::array({1, 3, 2});
    CHECK(config_error(j).rfind("experiment.levels", 0) == 0);

    j = base();
    j["experiment"].erase("levels");
    CHECK(config_error(j).rfind("experiment.levels", 0) == 0);

    j = base();
    j["experiment"]["levels"] = Json::array({1.5});
    CHECK(config_error(j).rfind("experiment.levels[0]", 0) == 0);

    j = base();
    j["defenses"][1]["params"] = Json{{"kernel_size", 4}};
    CHECK(config_error(j).rfind("defenses[1]", 0) == 0);

    j = base();
    j["attack"]["epsilon"] = "big";
    CHECK(config_error(j).rfind("attack.epsilon", 0) == 0);

    j = base();
    j["seed"] = -1;
    CHECK(config_error(j).rfind("seed", 0) == 0);

    j = base();
    j["experiment"] = Json{{"kind", "min-iters"}, {"cap", -2}};
    CHECK(config_error(j).rfind("experiment.cap", 0) == 0);

    // Levels only constrain the defense for the experiments that use them.
    j = base();
    j["defenses"] = Json::array({Json{{"method", "mean"}}});
    j["experiment"] = Json{{"kind", "min-iters"}, {"levels", {2}}};
    CHECK(config_error(j).empty());
}

TEST_CASE("overrides") {
    auto j = base();
    apply_override(j, "seed=12");
    CHECK(j["seed"] == 12);
    apply_override(j, "experiment.levels=[1,2]");
    CHECK(j["experiment"]["levels"].size() == 2);
    apply_override(j, "defenses.1.params.kernel_size=5");
    CHECK(j["defenses"][1]["params"]["kernel_size"] == 5);
    apply_override(j, "output_dir=runs/a");
    CHECK(j["output_dir"] == "runs/a");
    apply_override(j, "model.train.epochs=3");
    CHECK(j["model"]["train"]["epochs"] == 3);
    CHECK(parse_run_config(j).train.epochs == 3);

    CHECK_THROWS_AS(apply_override(j, "seed"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "=3"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "defenses.9.method=mean"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "seed.x=1"), ConfigError);
}

TEST_CASE("input checks") {
    auto j = base();
    j["dataset"] = Json{{"kind", "idx"}, {"train_images", "/nonexistent/train-images"}, {"train_labels", "/nonexistent/l"}};
    const auto c = parse_run_config(j);
    try {
        check_inputs(c, Command::Train);
        FAIL("expected an io error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/train-images") != std::string::npos);
    }

    auto k = base();
    k.erase("attack");
    const auto d = parse_run_config(k);
    CHECK_THROWS_AS(check_inputs(d, Command::Attack), ConfigError);
    k.erase("experiment");
    CHECK_THROWS_AS(check_inputs(parse_run_config(k), Command::Experiment), ConfigError);
    CHECK_FALSE(config_reference().empty());
}
