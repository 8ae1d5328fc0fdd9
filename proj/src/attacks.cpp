#include "ssd/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "bytes.hpp"
#include "ssd/error.hpp"
#include "ssd/json_io.hpp"
#include "ssd/parallel.hpp"
#include "ssd/rng.hpp"

namespace ssd {

void validate(const PgdSpec& spec) {
    if (!(spec.epsilon > 0.0) || !std::isfinite(spec.epsilon)) throw ParameterError("epsilon must be > 0");
    if (spec.step_size < 0.0 || !std::isfinite(spec.step_size)) throw ParameterError("step_size must be > 0");
    if (spec.iterations < 1) throw ParameterError("iterations must be >= 1");
}

void validate(const SaltPepperSpec& spec) {
    if (spec.density_levels.empty()) throw ParameterError("density_levels must not be empty");
    double prev = 0.0;
    for (double d : spec.density_levels) {
        if (!(d > 0.0 && d <= 1.0)) throw ParameterError("density levels must lie in (0, 1]");
        if (!(d > prev)) throw ParameterError("density levels must be strictly increasing");
        prev = d;
    }
}

void validate(const AttackSpec& spec) {
    std::visit([](const auto& s) { validate(s); }, spec);
}

std::vector<std::string> attack_preset_names() {
    return {"pgd-eps-0.01", "pgd-eps-0.05", "desk-eps-0.1", "desk-eps-0.2"};
}

AttackSpec attack_preset(const std::string& name) {
    PgdSpec p;
    p.iterations = 20;
    if (name == "pgd-eps-0.01") {
        p.epsilon = 0.01;
    } else if (name == "pgd-eps-0.05") {
        p.epsilon = 0.05;
    } else if (name == "desk-eps-0.1") {
        p.epsilon = 0.1;
        p.step_size = 0.02;
    } else if (name == "desk-eps-0.2") {
        p.epsilon = 0.2;
        p.step_size = 0.04;
    } else {
        throw ParameterError("unknown attack preset \"" + name + "\"");
    }
    return p;
}

// ---------------------------------------------------------------------------
// PGD

PgdRun::PgdRun(const Model& model, const Image& original, int label, const PgdSpec& spec)
    : model_(model), original_(original), current_(original), label_(label), epsilon_(spec.epsilon),
      step_size_(spec.resolved_step_size()) {
    validate(spec);
    if (spec.random_start) {
        Rng rng(spec.seed);
        for (double& v : current_.data()) v = std::clamp(v + rng.uniform(-epsilon_, epsilon_), 0.0, 1.0);
    }
}

void PgdRun::step() {
    const auto lg = loss_and_input_gradient(model_, current_, label_);
    auto x = current_.data();
    const auto g = lg.grad.data();
    const auto x0 = original_.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(g[i])) {
            throw AttackError("non-finite gradient at PGD iteration " + std::to_string(done_ + 1));
        }
        const double sign = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
        const double moved = x[i] + step_size_ * sign;
        const double projected = std::clamp(moved, x0[i] - epsilon_, x0[i] + epsilon_);
        x[i] = std::clamp(projected, 0.0, 1.0);
    }
    ++done_;
}

namespace {

AdversarialExample finish(const Model& model, const Image& original, Image adv, int label, int iterations) {
    AdversarialExample ex;
    const auto pred = predict(model, adv);
    ex.linf = linf_distance(adv, original);
    ex.adv_image = std::move(adv);
    ex.adv_label = pred.label;
    ex.adv_confidence = pred.confidence;
    ex.success = pred.label != label;
    ex.attack_iterations_used = iterations;
    return ex;
}

} // namespace

AdversarialExample pgd_attack(const Model& model, const Image& img, int label, const PgdSpec& spec) {
    PgdRun run(model, img, label, spec);
    run.advance(spec.iterations);
    return finish(model, img, run.current(), label, run.iterations_done());
}

// ---------------------------------------------------------------------------
// Salt and pepper

std::vector<std::size_t> salt_pepper_order(std::size_t pixels, std::uint64_t seed) {
    std::vector<std::size_t> order(pixels);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span(order));
    return order;
}

std::size_t salt_pepper_count(double density, std::size_t pixels) noexcept {
    const double n = std::ceil(density * static_cast<double>(pixels) - 1e-9);
    return std::min(pixels, static_cast<std::size_t>(std::max(0.0, n)));
}

namespace {

// Salt or pepper for each pixel position, drawn from a stream independent of
// the order permutation.
std::vector<char> salt_pepper_values(std::size_t pixels, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 1));
    std::vector<char> salt(pixels);
    for (auto& s : salt) s = rng.coin() ? 1 : 0;
    return salt;
}

Image apply_salt_pepper(const Image& img, std::size_t count, const std::vector<std::size_t>& order,
                        const std::vector<char>& salt) {
    Image out = img;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t p = order[k];
        const double v = salt[p] ? 1.0 : 0.0;
        for (std::size_t ch = 0; ch < img.channels(); ++ch) out.data()[p * img.channels() + ch] = v;
    }
    return out;
}

} // namespace

Image salt_pepper_noise(const Image& img, double density, std::uint64_t seed) {
    const std::size_t pixels = img.height() * img.width();
    return apply_salt_pepper(img, salt_pepper_count(density, pixels), salt_pepper_order(pixels, seed),
                             salt_pepper_values(pixels, seed));
}

AdversarialExample salt_pepper_attack(const Model& model, const Image& img, int label, const SaltPepperSpec& spec) {
    validate(spec);
    const std::size_t pixels = img.height() * img.width();
    const auto order = salt_pepper_order(pixels, spec.seed);
    const auto salt = salt_pepper_values(pixels, spec.seed);
    AdversarialExample last;
    for (std::size_t li = 0; li < spec.density_levels.size(); ++li) {
        Image noisy = apply_salt_pepper(img, salt_pepper_count(spec.density_levels[li], pixels), order, salt);
        last = finish(model, img, std::move(noisy), label, static_cast<int>(li + 1));
        if (last.success) break;
    }
    return last;
}

// ---------------------------------------------------------------------------
// Attack sets

std::size_t AttackSet::successes() const noexcept {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.success; }));
}

double AttackSet::success_rate() const noexcept {
    return entries.empty() ? 0.0 : static_cast<double>(successes()) / static_cast<double>(entries.size());
}

namespace {

AttackSpec with_seed(const AttackSpec& spec, std::uint64_t seed) {
    AttackSpec s = spec;
    std::visit([&](auto& v) { v.seed = seed; }, s);
    return s;
}

std::uint64_t seed_of(const AttackSpec& spec) {
    return std::visit([](const auto& v) { return v.seed; }, spec);
}

std::string image_file_name(std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "adv_%06zu.ssim", id);
    return buf;
}

} // namespace

AttackSet generate_attack_set(const Model& model, const Dataset& data, const AttackSpec& spec,
                              const std::filesystem::path& out_dir, unsigned workers) {
    validate(spec);
    data.validate();
    if (!data.empty()) {
        const auto& s = model.input_shape();
        const auto& im = data.images.front();
        if (im.height() != s.height || im.width() != s.width || im.channels() != s.channels) {
            throw ShapeError("dataset images do not match the model input shape");
        }
    }
    AttackSet set;
    set.spec = spec;
    set.model_fingerprint = model.fingerprint();
    set.dataset_size = data.size();

    std::vector<Prediction> clean(data.size());
    parallel_for(data.size(), workers, [&](std::size_t i) { clean[i] = predict(model, data.images[i]); });

    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (clean[i].label == data.labels[i]) ids.push_back(i);
    }
    set.entries.resize(ids.size());
    parallel_for(ids.size(), workers, [&](std::size_t k) {
        const std::size_t id = ids[k];
        const std::uint64_t seed = derive_seed(seed_of(spec), id);
        const AttackSpec sample_spec = with_seed(spec, seed);
        AdversarialExample ex = std::visit(
            [&](const auto& s) -> AdversarialExample {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PgdSpec>) {
                    return pgd_attack(model, data.images[id], data.labels[id], s);
                } else {
                    return salt_pepper_attack(model, data.images[id], data.labels[id], s);
                }
            },
            sample_spec);
        AttackEntry& e = set.entries[k];
        e.id = id;
        e.true_label = data.labels[id];
        e.clean_label = clean[id].label;
        e.clean_confidence = clean[id].confidence;
        e.success = ex.success;
        e.linf = ex.linf;
        e.iterations_used = ex.attack_iterations_used;
        e.seed = seed;
        e.file = image_file_name(id);
        e.adv_image = std::move(ex.adv_image);
    });
    if (!out_dir.empty()) save_attack_set(set, out_dir);
    return set;
}

void save_attack_set(const AttackSet& set, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    Json samples = Json::array();
    for (const auto& e : set.entries) {
        save_raw(e.adv_image, out_dir / e.file);
        Json s;
        s["id"] = e.id;
        s["true_label"] = e.true_label;
        s["clean_label"] = e.clean_label;
        s["clean_confidence"] = e.clean_confidence;
        s["success"] = e.success;
        s["linf"] = e.linf;
        s["iterations_used"] = e.iterations_used;
        s["seed"] = e.seed;
        s["file"] = e.file;
        samples.push_back(std::move(s));
    }
    Json m;
    m["spec"] = attack_to_json(set.spec);
    m["model_fingerprint"] = set.model_fingerprint;
    m["dataset_size"] = set.dataset_size;
    m["candidates"] = set.candidates();
    m["successes"] = set.successes();
    m["samples"] = std::move(samples);
    detail::write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

AttackSet load_attack_set(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) throw IoError("attack manifest not found: " + manifest_path.string());
    const auto bytes = detail::read_file(manifest_path);
    Json m;
    try {
        m = Json::parse(bytes.begin(), bytes.end());
    } catch (const Json::parse_error& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
    try {
        AttackSet set;
        set.spec = attack_from_json(m.at("spec"), "manifest.spec");
        set.model_fingerprint = m.at("model_fingerprint").get<std::string>();
        set.dataset_size = m.at("dataset_size").get<std::size_t>();
        for (const auto& s : m.at("samples")) {
            AttackEntry e;
            e.id = s.at("id").get<std::size_t>();
            e.true_label = s.at("true_label").get<int>();
            e.clean_label = s.at("clean_label").get<int>();
            e.clean_confidence = s.at("clean_confidence").get<double>();
            e.success = s.at("success").get<bool>();
            e.linf = s.at("linf").get<double>();
            e.iterations_used = s.at("iterations_used").get<int>();
            e.seed = s.at("seed").get<std::uint64_t>();
            e.file = s.at("file").get<std::string>();
            e.adv_image = load_raw(dir / e.file);
            set.entries.push_back(std::move(e));
        }
        return set;
    } catch (const Json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
}

} // namespace ssd
