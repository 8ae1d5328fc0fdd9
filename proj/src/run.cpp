#include "ssd/run.hpp"

#include <algorithm>
#include <map>

#include "bytes.hpp"
#include "ssd/error.hpp"
#include "ssd/harness.hpp"
#include "ssd/rng.hpp"

namespace ssd {

using namespace json_check;

namespace {

std::size_t size_field(const Json& j, const std::string& path) {
    const auto v = integer(j, path);
    if (v < 0) fail(path, "must be >= 0");
    return static_cast<std::size_t>(v);
}

std::filesystem::path path_field(const Json& j, const std::string& path) {
    const auto s = string(j, path);
    if (s.empty()) fail(path, "must not be empty");
    return s;
}

DatasetConfig parse_dataset(const Json& j) {
    only_keys(j, "dataset", {"kind", "train_images", "train_labels", "test_images", "test_labels", "train_size", "test_size"});
    DatasetConfig d;
    if (j.contains("kind")) {
        d.kind = string(j["kind"], "dataset.kind");
        if (d.kind != "idx" && d.kind != "synthetic") fail("dataset.kind", "expected \"idx\" or \"synthetic\"");
    }
    for (const auto& [key, target] : {std::pair{"train_images", &d.train_images}, {"train_labels", &d.train_labels},
                                      {"test_images", &d.test_images}, {"test_labels", &d.test_labels}}) {
        if (j.contains(key)) *target = path_field(j[key], std::string("dataset.") + key);
    }
    if (j.contains("train_size")) d.train_size = size_field(j["train_size"], "dataset.train_size");
    if (j.contains("test_size")) d.test_size = size_field(j["test_size"], "dataset.test_size");
    return d;
}

ExperimentConfig parse_experiment(const Json& j) {
    only_keys(j, "experiment", {"kind", "levels", "iteration_axis", "samples", "level", "subset_size", "cap"});
    if (!j.contains("kind")) fail("experiment.kind", "required");
    ExperimentConfig e;
    e.kind = string(j["kind"], "experiment.kind");
    if (!is_experiment_name(e.kind)) {
        std::string names;
        for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
        fail("experiment.kind", "unknown experiment \"" + e.kind + "\"; valid names: " + names);
    }
    if (j.contains("levels")) {
        e.levels = number_list(j["levels"], "experiment.levels");
        for (std::size_t i = 0; i < e.levels.size(); ++i) {
            if (e.levels[i] < 0) fail("experiment.levels[" + std::to_string(i) + "]", "must be >= 0");
            if (i > 0 && e.levels[i] <= e.levels[i - 1]) fail("experiment.levels", "must be strictly increasing");
        }
    }
    if (j.contains("iteration_axis")) {
        const auto axis = number_list(j["iteration_axis"], "experiment.iteration_axis");
        if (axis.empty()) fail("experiment.iteration_axis", "must not be empty");
        for (std::size_t i = 0; i < axis.size(); ++i) {
            const std::string kp = "experiment.iteration_axis[" + std::to_string(i) + "]";
            const int v = static_cast<int>(integer(j["iteration_axis"][i], kp));
            if (v < 1) fail(kp, "must be >= 1");
            if (!e.iteration_axis.empty() && v <= e.iteration_axis.back()) {
                fail("experiment.iteration_axis", "must be strictly increasing");
            }
            e.iteration_axis.push_back(v);
        }
    } else {
        for (int i = 1; i <= 100; ++i) e.iteration_axis.push_back(i);
    }
    if (j.contains("samples")) e.samples = size_field(j["samples"], "experiment.samples");
    if (j.contains("level")) {
        e.level = number(j["level"], "experiment.level");
        if (*e.level < 0) fail("experiment.level", "must be >= 0");
    }
    if (j.contains("subset_size")) e.subset_size = size_field(j["subset_size"], "experiment.subset_size");
    if (j.contains("cap")) {
        const auto cap = integer(j["cap"], "experiment.cap");
        if (cap < 0 || cap > 10000) fail("experiment.cap", "must lie in [0, 10000]");
        e.cap = static_cast<int>(cap);
    }
    if (e.kind == "sweep-defense" && e.levels.empty()) fail("experiment.levels", "required for sweep-defense");
    return e;
}

std::vector<NamedDefense> parse_defenses(const Json& j) {
    if (!j.is_array()) fail("defenses", "expected an array of smoother specs");
    std::vector<NamedDefense> out;
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string path = "defenses[" + std::to_string(i) + "]";
        Json spec = object(j[i], path);
        std::string name;
        if (spec.contains("name")) {
            name = string(spec["name"], path + ".name");
            spec.erase("name");
        }
        NamedDefense d{name, smoother_from_json(spec, path)};
        if (d.name.empty()) d.name = std::string(to_string(d.spec.method()));
        if (const int k = ++seen[d.name]; k > 1) d.name += "#" + std::to_string(k);
        out.push_back(std::move(d));
    }
    return out;
}

void require_file(const std::filesystem::path& p, const std::string& what) {
    if (p.empty()) throw ConfigError(what + ": required");
    if (!std::filesystem::exists(p)) throw IoError(what + " not found: " + p.string());
}

Dataset load_split(const RunConfig& cfg, Split split) {
    const auto& d = cfg.dataset;
    if (d.kind == "synthetic") {
        const bool train = split == Split::Train;
        const std::size_t n = train ? (d.train_size ? d.train_size : 2000) : (d.test_size ? d.test_size : 500);
        return synthetic_shapes(n, derive_seed(cfg.seed, train ? 1 : 2), split);
    }
    if (split == Split::Train) return load_idx(d.train_images, d.train_labels, split, d.train_size);
    return load_idx(d.test_images, d.test_labels, split, d.test_size);
}

bool has_test_split(const RunConfig& cfg) {
    return cfg.dataset.kind == "synthetic" || !cfg.dataset.test_images.empty();
}

Json defense_json(const NamedDefense& d) {
    Json j;
    const Json spec = smoother_to_json(d.spec);
    j["name"] = d.name;
    j["method"] = spec.at("method");
    j["params"] = spec.at("params");
    j["strength_param"] = spec.at("strength_param");
    return j;
}

const PgdSpec& pgd_of(const RunConfig& cfg) {
    const auto* p = cfg.attack ? std::get_if<PgdSpec>(&*cfg.attack) : nullptr;
    if (!p) throw ConfigError("attack: sweep-attack requires a pgd attack");
    return *p;
}

} // namespace

RunConfig parse_run_config(const Json& j) {
    only_keys(j, "config", {"seed", "workers", "output_dir", "dataset", "model", "attack", "attack_set", "defenses", "experiment"});
    RunConfig c;
    c.source = j;
    if (j.contains("seed")) {
        const auto s = integer(j["seed"], "seed");
        if (s < 0) fail("seed", "must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (j.contains("workers")) {
        const auto w = integer(j["workers"], "workers");
        if (w < 0 || w > 4096) fail("workers", "must lie in [0, 4096]");
        c.workers = static_cast<unsigned>(w);
    }
    if (j.contains("output_dir")) c.output_dir = path_field(j["output_dir"], "output_dir");
    if (j.contains("dataset")) c.dataset = parse_dataset(j["dataset"]);
    c.model_path = c.output_dir / "model.ssmd";
    c.train.seed = c.seed;
    if (j.contains("model")) {
        const auto& m = j["model"];
        only_keys(m, "model", {"path", "train"});
        if (m.contains("path")) c.model_path = path_field(m["path"], "model.path");
        if (m.contains("train")) {
            Json t = object(m["train"], "model.train");
            if (!t.contains("seed")) t["seed"] = c.seed;
            c.train = train_config_from_json(t, "model.train");
        }
    }
    if (j.contains("attack")) {
        Json a = object(j["attack"], "attack");
        if (!a.contains("seed")) a["seed"] = c.seed;
        c.attack = attack_from_json(a, "attack");
    }
    c.attack_set = c.output_dir / "attack";
    if (j.contains("attack_set")) c.attack_set = path_field(j["attack_set"], "attack_set");
    if (j.contains("defenses")) c.defenses = parse_defenses(j["defenses"]);
    if (j.contains("experiment")) c.experiment = parse_experiment(j["experiment"]);

    if (c.experiment && !c.defenses.empty()) {
        const auto& spec = c.defenses.front().spec;
        auto check_level = [&](double level, const std::string& kp) {
            if (level == 0.0) return;
            try {
                (void)spec.with_strength(level);
            } catch (const ParameterError& e) {
                fail(kp, e.what());
            }
        };
        for (std::size_t i = 0; c.experiment->kind == "sweep-defense" && i < c.experiment->levels.size(); ++i) {
            check_level(c.experiment->levels[i], "experiment.levels[" + std::to_string(i) + "]");
        }
        if (c.experiment->kind == "category-stats" && c.experiment->level) check_level(*c.experiment->level, "experiment.level");
    }
    return c;
}

void apply_override(Json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set: expected key=value, got \"" + assignment + "\"");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    Json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("--set: empty segment in \"" + key + "\"");
        Json* next = nullptr;
        if (node->is_array()) {
            if (part.find_first_not_of("0123456789") != std::string::npos) {
                throw ConfigError(key + ": \"" + part + "\" is not an array index");
            }
            const auto idx = std::stoul(part);
            if (idx >= node->size()) throw ConfigError(key + ": index " + part + " out of range");
            next = &(*node)[idx];
        } else {
            if (node->is_null()) *node = Json::object();
            if (!node->is_object()) throw ConfigError(key + ": cannot descend into a non-object");
            next = &(*node)[part];
        }
        node = next;
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = std::move(value);
}

void check_inputs(const RunConfig& cfg, Command cmd) {
    const bool idx = cfg.dataset.kind == "idx";
    auto need_test = [&] {
        if (idx) {
            require_file(cfg.dataset.test_images, "dataset.test_images");
            require_file(cfg.dataset.test_labels, "dataset.test_labels");
        }
    };
    switch (cmd) {
    case Command::Train:
        if (idx) {
            require_file(cfg.dataset.train_images, "dataset.train_images");
            require_file(cfg.dataset.train_labels, "dataset.train_labels");
            if (!cfg.dataset.test_images.empty() || !cfg.dataset.test_labels.empty()) need_test();
        }
        break;
    case Command::Attack:
        if (!cfg.attack) throw ConfigError("attack: required for the attack command");
        require_file(cfg.model_path, "model.path");
        need_test();
        break;
    case Command::Experiment:
        if (!cfg.experiment) throw ConfigError("experiment: required for the experiment command");
        if (cfg.defenses.empty()) throw ConfigError("defenses: at least one defense is required");
        require_file(cfg.model_path, "model.path");
        if (cfg.experiment->kind == "sweep-attack") {
            (void)pgd_of(cfg);
            need_test();
        } else {
            require_file(cfg.attack_set / "manifest.json", "attack set manifest");
        }
        break;
    }
}

Json run_train(const RunConfig& cfg) {
    check_inputs(cfg, Command::Train);
    const Dataset train_set = load_split(cfg, Split::Train);
    std::optional<Dataset> test_set;
    if (has_test_split(cfg)) test_set = load_split(cfg, Split::Test);
    TrainReport report;
    const Model model = train(train_set, cfg.train, &report, test_set ? &*test_set : nullptr);
    save_model(model, cfg.model_path);

    Json out;
    out["model"] = cfg.model_path.string();
    out["fingerprint"] = model.fingerprint();
    out["train"] = train_config_to_json(cfg.train);
    out["train_size"] = train_set.size();
    out["test_size"] = test_set ? test_set->size() : 0;
    out["epoch_loss"] = report.epoch_loss;
    out["train_accuracy"] = report.train_accuracy;
    out["test_accuracy"] = test_set ? Json(report.test_accuracy) : Json(nullptr);
    detail::write_text(cfg.output_dir / "train_report.json", out.dump(2) + "\n");
    return out;
}

Json run_attack(const RunConfig& cfg) {
    check_inputs(cfg, Command::Attack);
    const Model model = load_model(cfg.model_path);
    const Dataset data = load_split(cfg, Split::Test);
    const AttackSet set = generate_attack_set(model, data, *cfg.attack, cfg.attack_set, cfg.workers);
    Json out;
    out["attack_set"] = cfg.attack_set.string();
    out["spec"] = attack_to_json(set.spec);
    out["dataset_size"] = set.dataset_size;
    out["candidates"] = set.candidates();
    out["successes"] = set.successes();
    out["success_rate"] = set.success_rate();
    return out;
}

ExperimentResult compute_experiment(const RunConfig& cfg) {
    check_inputs(cfg, Command::Experiment);
    const auto& e = *cfg.experiment;
    const Model model = load_model(cfg.model_path);
    const NamedDefense& primary = cfg.defenses.front();

    ExperimentResult r;
    r.experiment = e.kind;
    r.model_fingerprint = model.fingerprint();
    r.seed = cfg.seed;
    r.defense = defense_json(primary);

    if (e.kind == "sweep-attack") {
        const PgdSpec& pgd = pgd_of(cfg);
        r.attack = attack_to_json(pgd);
        const Dataset data = load_split(cfg, Split::Test);
        auto sweep = attack_iteration_sweep(model, data, pgd, primary.spec, e.iteration_axis, e.samples, cfg.workers);
        r.sweeps = {std::move(sweep.defended), std::move(sweep.undefended)};
        return r;
    }

    const AttackSet set = load_attack_set(cfg.attack_set);
    check_fingerprint(model, set);
    r.attack = attack_to_json(set.spec);
    if (e.kind == "sweep-defense") {
        auto sweep = defense_strength_sweep(model, set, primary.spec, e.levels, cfg.workers);
        r.sweeps = {std::move(sweep.sweep)};
    } else if (e.kind == "category-stats") {
        const double level = e.level.value_or(primary.spec.strength());
        const auto records = evaluate_defense(model, set, primary.spec, anchored_levels({level}), cfg.workers);
        r.categories = per_category_accuracy(records, level);
        r.category_level = level;
    } else if (e.kind == "subset-table") {
        std::vector<MethodRecords> methods;
        Json defenses = Json::array();
        for (const auto& d : cfg.defenses) {
            const double level = d.spec.strength();
            methods.push_back({d.name, level, evaluate_defense(model, set, d.spec, {level}, cfg.workers)});
            defenses.push_back(defense_json(d));
        }
        r.defense = std::move(defenses);
        r.table = cross_evaluate_subsets(methods, e.subset_size);
        r.subset_size = e.subset_size;
    } else {
        r.min_iterations = min_defense_iterations(model, set, primary.spec, e.cap, cfg.workers);
        r.cap = e.cap;
    }
    return r;
}

Json run_experiment(const RunConfig& cfg) {
    const ExperimentResult r = compute_experiment(cfg);
    const auto dir = cfg.output_dir / r.experiment;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    save_result(r, dir / "result.json");
    Json files = Json::array();
    files.push_back((dir / "result.json").string());
    for (const auto& p : emit_report({r}, dir)) files.push_back(p.string());
    Json out;
    out["experiment"] = r.experiment;
    out["output_dir"] = dir.string();
    out["files"] = std::move(files);
    return out;
}

std::string config_reference() {
    return R"(Configuration file (JSON). Unknown keys are rejected; errors name the key path.

  seed                      global seed (default 1); fills model.train.seed and attack.seed when absent
  workers                   worker threads, 0 = all cores (default 0); results do not depend on it
  output_dir                directory for all outputs (default "ssd_out")
  dataset.kind              "idx" (default) or "synthetic"
  dataset.train_images      IDX image file for training
  dataset.train_labels      IDX label file for training
  dataset.test_images       IDX image file for attacks and evaluation
  dataset.test_labels       IDX label file for attacks and evaluation
  dataset.train_size        sample limit, 0 = all (synthetic default 2000)
  dataset.test_size         sample limit, 0 = all (synthetic default 500)
  model.path                model file (default <output_dir>/model.ssmd)
  model.train.architecture  "cnn" (default) or "dense"
  model.train.epochs        default 15
  model.train.learning_rate default 0.02
  model.train.momentum      default 0.9
  model.train.batch_size    default 32
  model.train.seed          default: global seed
  attack                    {"preset": "pgd-eps-0.01" | "pgd-eps-0.05" | "desk-eps-0.1" | "desk-eps-0.2"}
                            or {"type": "pgd", "epsilon", "step_size" (0 = 2.5*epsilon/iterations),
                                "iterations", "random_start", "seed"}
                            or {"type": "salt_pepper", "density_levels", "seed"}
  attack_set                attack set directory (default <output_dir>/attack)
  defenses[]                smoother specs: {"name"?, "method", "params", "strength_param"?}
                            methods and params (strength parameter first):
                              mean, median: kernel_size, boundary
                              gaussian: sigma, radius, boundary
                              anisotropic_diffusion: iterations, coefficient, K, lambda
                              bilateral: diameter, sigma_space, sigma_range, boundary
                              non_local_means: patch_radius | h_filter, search_radius, a_sigma, boundary
                              modified_curvature_motion: iterations, k, dt
                            boundary: "replicate", "reflect" or "zero"
  experiment.kind           sweep-defense | sweep-attack | category-stats | subset-table | min-iters
  experiment.levels         sweep-defense strength levels (level 0, no defense, is always included)
  experiment.iteration_axis sweep-attack PGD iteration counts (default 1..100)
  experiment.samples        sweep-attack sample limit, 0 = all
  experiment.level          category-stats strength (default: the defense's configured strength)
  experiment.subset_size    subset-table subset size (default 100)
  experiment.cap            min-iters iteration cap (default 30)

Experiments use defenses[0]; subset-table compares all defenses at their configured strengths.
)";
}

} // namespace ssd
