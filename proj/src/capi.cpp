#include "ssd/ssd.h"

#include <cstring>
#include <new>
#include <string>

#include "ssd/attacks.hpp"
#include "ssd/classifier.hpp"
#include "ssd/error.hpp"
#include "ssd/filters.hpp"
#include "ssd/image.hpp"
#include "ssd/json_io.hpp"
#include "ssd/report.hpp"
#include "ssd/run.hpp"

struct ssd_image {
    ssd::Image value;
};
struct ssd_dataset {
    ssd::Dataset value;
};
struct ssd_model {
    ssd::Model value;
};
struct ssd_attack_set {
    ssd::AttackSet value;
};

namespace {

thread_local std::string g_last_error;

ssd_status fail(ssd_status status, const std::string& msg) {
    g_last_error = msg;
    return status;
}

template <typename F>
ssd_status guard(F&& f) {
    try {
        g_last_error.clear();
        f();
        return SSD_OK;
    } catch (const ssd::Error& e) {
        return fail(static_cast<ssd_status>(e.code()), e.what());
    } catch (const ssd::Json::exception& e) {
        return fail(SSD_ERR_FORMAT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SSD_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SSD_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SSD_ERR_INTERNAL, "unknown error");
    }
}

template <typename... T>
bool any_null(const T*... ptrs) {
    return ((ptrs == nullptr) || ...);
}

#define SSD_REQUIRE(...)                                                                                       \
    do {                                                                                                       \
        if (any_null(__VA_ARGS__)) return fail(SSD_ERR_NULL_ARGUMENT, "null argument: " #__VA_ARGS__);         \
    } while (0)

ssd::Json parse_json(const char* text, const std::string& what) {
    if (text == nullptr || *text == '\0') return ssd::Json::object();
    try {
        return ssd::Json::parse(text);
    } catch (const ssd::Json::parse_error& e) {
        throw ssd::ConfigError(what + ": invalid JSON: " + e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ssd::Command parse_command(const char* command) {
    const std::string c = command;
    if (c == "train") return ssd::Command::Train;
    if (c == "attack") return ssd::Command::Attack;
    if (c == "experiment") return ssd::Command::Experiment;
    throw ssd::ParameterError("unknown command \"" + c + "\"; expected train, attack or experiment");
}

} // namespace

extern "C" {

const char* ssd_version(void) { return "1.0.0"; }

const char* ssd_status_name(ssd_status status) {
    switch (status) {
    case SSD_OK: return "ok";
    case SSD_ERR_PARAMETER: return "parameter error";
    case SSD_ERR_SHAPE: return "shape error";
    case SSD_ERR_IO: return "I/O error";
    case SSD_ERR_FORMAT: return "format error";
    case SSD_ERR_CONFIG: return "configuration error";
    case SSD_ERR_TRAINING: return "training error";
    case SSD_ERR_ATTACK: return "attack error";
    case SSD_ERR_NUMERIC: return "numeric error";
    case SSD_ERR_INTERNAL: return "internal error";
    case SSD_ERR_NULL_ARGUMENT: return "null argument";
    case SSD_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    }
    return "unknown status";
}

const char* ssd_last_error(void) { return g_last_error.c_str(); }

void ssd_string_free(char* s) { delete[] s; }

// Images

ssd_status ssd_image_create(size_t height, size_t width, size_t channels, const double* data, ssd_image** out) {
    SSD_REQUIRE(data, out);
    return guard([&] {
        std::vector<double> values(data, data + height * width * channels);
        *out = new ssd_image{ssd::Image(height, width, channels, std::move(values))};
    });
}

void ssd_image_free(ssd_image* img) { delete img; }

ssd_status ssd_image_shape(const ssd_image* img, size_t* height, size_t* width, size_t* channels) {
    SSD_REQUIRE(img, height, width, channels);
    *height = img->value.height();
    *width = img->value.width();
    *channels = img->value.channels();
    return SSD_OK;
}

ssd_status ssd_image_copy_data(const ssd_image* img, double* out, size_t capacity) {
    SSD_REQUIRE(img, out);
    const auto& v = img->value.values();
    if (capacity < v.size()) {
        return fail(SSD_ERR_BUFFER_TOO_SMALL, "need " + std::to_string(v.size()) + " values");
    }
    std::copy(v.begin(), v.end(), out);
    return SSD_OK;
}

ssd_status ssd_image_load(const char* path, ssd_image** out) {
    SSD_REQUIRE(path, out);
    return guard([&] { *out = new ssd_image{ssd::load_raw(path)}; });
}

ssd_status ssd_image_save(const ssd_image* img, const char* path) {
    SSD_REQUIRE(img, path);
    return guard([&] { ssd::save_raw(img->value, path); });
}

ssd_status ssd_image_save_png(const ssd_image* img, const char* path) {
    SSD_REQUIRE(img, path);
    return guard([&] { ssd::save_png(img->value, path); });
}

ssd_status ssd_smooth(const ssd_image* in, const char* spec_json, ssd_image** out) {
    SSD_REQUIRE(in, spec_json, out);
    return guard([&] {
        const auto spec = ssd::smoother_from_json(parse_json(spec_json, "defense"), "defense");
        *out = new ssd_image{ssd::apply_smoother(spec, in->value)};
    });
}

// Datasets

ssd_status ssd_dataset_load_idx(const char* images_path, const char* labels_path, size_t limit, ssd_dataset** out) {
    SSD_REQUIRE(images_path, labels_path, out);
    return guard([&] {
        *out = new ssd_dataset{ssd::load_idx(images_path, labels_path, ssd::Split::Test, limit)};
    });
}

ssd_status ssd_dataset_synthetic(size_t count, uint64_t seed, ssd_dataset** out) {
    SSD_REQUIRE(out);
    return guard([&] { *out = new ssd_dataset{ssd::synthetic_shapes(count, seed, ssd::Split::Test)}; });
}

void ssd_dataset_free(ssd_dataset* data) { delete data; }

ssd_status ssd_dataset_size(const ssd_dataset* data, size_t* size) {
    SSD_REQUIRE(data, size);
    *size = data->value.size();
    return SSD_OK;
}

ssd_status ssd_dataset_sample(const ssd_dataset* data, size_t index, ssd_image** image, int* label) {
    SSD_REQUIRE(data, image, label);
    if (index >= data->value.size()) {
        return fail(SSD_ERR_PARAMETER, "sample index " + std::to_string(index) + " out of range");
    }
    return guard([&] {
        *image = new ssd_image{data->value.images[index]};
        *label = data->value.labels[index];
    });
}

// Models

ssd_status ssd_model_train(const ssd_dataset* train, const ssd_dataset* test, const char* config_json,
                           ssd_model** out) {
    SSD_REQUIRE(train, out);
    return guard([&] {
        const auto cfg = ssd::train_config_from_json(parse_json(config_json, "model.train"));
        *out = new ssd_model{ssd::train(train->value, cfg, nullptr, test ? &test->value : nullptr)};
    });
}

ssd_status ssd_model_load(const char* path, ssd_model** out) {
    SSD_REQUIRE(path, out);
    return guard([&] { *out = new ssd_model{ssd::load_model(path)}; });
}

ssd_status ssd_model_save(const ssd_model* model, const char* path) {
    SSD_REQUIRE(model, path);
    return guard([&] { ssd::save_model(model->value, path); });
}

void ssd_model_free(ssd_model* model) { delete model; }

ssd_status ssd_model_predict(const ssd_model* model, const ssd_image* img, int* label, double* confidence) {
    SSD_REQUIRE(model, img, label, confidence);
    return guard([&] {
        const auto p = ssd::predict(model->value, img->value);
        *label = p.label;
        *confidence = p.confidence;
    });
}

ssd_status ssd_model_accuracy(const ssd_model* model, const ssd_dataset* data, unsigned workers, double* accuracy) {
    SSD_REQUIRE(model, data, accuracy);
    return guard([&] { *accuracy = ssd::accuracy(model->value, data->value, workers); });
}

ssd_status ssd_model_fingerprint(const ssd_model* model, char* buf, size_t capacity) {
    SSD_REQUIRE(model, buf);
    std::string fp;
    if (const auto s = guard([&] { fp = model->value.fingerprint(); }); s != SSD_OK) return s;
    if (capacity < fp.size() + 1) return fail(SSD_ERR_BUFFER_TOO_SMALL, "fingerprint buffer needs " + std::to_string(fp.size() + 1) + " bytes");
    std::memcpy(buf, fp.c_str(), fp.size() + 1);
    return SSD_OK;
}

// Attack sets

ssd_status ssd_attack_generate(const ssd_model* model, const ssd_dataset* data, const char* spec_json,
                               const char* out_dir, unsigned workers, ssd_attack_set** out) {
    SSD_REQUIRE(model, data, spec_json, out);
    return guard([&] {
        const auto spec = ssd::attack_from_json(parse_json(spec_json, "attack"));
        *out = new ssd_attack_set{
            ssd::generate_attack_set(model->value, data->value, spec, out_dir ? out_dir : "", workers)};
    });
}

ssd_status ssd_attack_load(const char* dir, ssd_attack_set** out) {
    SSD_REQUIRE(dir, out);
    return guard([&] { *out = new ssd_attack_set{ssd::load_attack_set(dir)}; });
}

void ssd_attack_set_free(ssd_attack_set* set) { delete set; }

ssd_status ssd_attack_summary(const ssd_attack_set* set, size_t* candidates, size_t* successes) {
    SSD_REQUIRE(set, candidates, successes);
    *candidates = set->value.candidates();
    *successes = set->value.successes();
    return SSD_OK;
}

// Commands

ssd_status ssd_config_validate(const char* config_json, const char* command) {
    SSD_REQUIRE(config_json, command);
    return guard([&] {
        const auto cmd = parse_command(command);
        const auto cfg = ssd::parse_run_config(parse_json(config_json, "config"));
        ssd::check_inputs(cfg, cmd);
    });
}

ssd_status ssd_run(const char* config_json, const char* command, char** summary_json) {
    SSD_REQUIRE(config_json, command);
    return guard([&] {
        const auto cmd = parse_command(command);
        const auto cfg = ssd::parse_run_config(parse_json(config_json, "config"));
        ssd::Json summary;
        switch (cmd) {
        case ssd::Command::Train: summary = ssd::run_train(cfg); break;
        case ssd::Command::Attack: summary = ssd::run_attack(cfg); break;
        case ssd::Command::Experiment: summary = ssd::run_experiment(cfg); break;
        }
        if (summary_json) *summary_json = dup_string(summary.dump(2));
    });
}

ssd_status ssd_config_override(const char* config_json, const char* assignment, char** out_json) {
    SSD_REQUIRE(config_json, assignment, out_json);
    return guard([&] {
        auto j = parse_json(config_json, "config");
        ssd::apply_override(j, assignment);
        *out_json = dup_string(j.dump());
    });
}

const char* ssd_config_reference(void) {
    static const std::string text = ssd::config_reference();
    return text.c_str();
}

const char* ssd_experiment_names(void) {
    static const std::string text = [] {
        std::string s;
        for (const auto& n : ssd::experiment_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }();
    return text.c_str();
}

ssd_status ssd_report_emit(const char* const* result_paths, size_t count, const char* out_dir, char** summary_json) {
    SSD_REQUIRE(out_dir);
    if (count > 0 && result_paths == nullptr) return fail(SSD_ERR_NULL_ARGUMENT, "null argument: result_paths");
    return guard([&] {
        std::vector<ssd::ExperimentResult> results;
        for (size_t i = 0; i < count; ++i) {
            if (!result_paths[i]) throw ssd::ParameterError("result path " + std::to_string(i) + " is null");
            results.push_back(ssd::load_result(result_paths[i]));
        }
        ssd::Json files = ssd::Json::array();
        for (const auto& p : ssd::emit_report(results, out_dir)) files.push_back(p.string());
        if (summary_json) {
            ssd::Json j;
            j["files"] = std::move(files);
            *summary_json = dup_string(j.dump(2));
        }
    });
}

} // extern "C"
