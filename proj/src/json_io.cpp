#include "ssd/json_io.hpp"

#include <cmath>

#include "ssd/error.hpp"

namespace ssd {

namespace json_check {

void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

const Json& object(const Json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    return j;
}

void only_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    object(obj, path);
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(path + "." + key, "unknown key");
    }
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

long long integer(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<long long>();
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<long long>(v);
    }
    fail(path, "expected an integer");
}

bool boolean(const Json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

std::string string(const Json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> number_list(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

} // namespace json_check

using namespace json_check;

namespace {

int int_field(const Json& j, const std::string& path) {
    const long long v = integer(j, path);
    if (v < -1000000000LL || v > 1000000000LL) fail(path, "out of range");
    return static_cast<int>(v);
}

template <typename F>
void field(const Json& obj, const char* key, const std::string& path, F&& assign) {
    if (auto it = obj.find(key); it != obj.end()) assign(*it, path + "." + key);
}

BoundaryPolicy boundary_field(const Json& j, const std::string& path) {
    try {
        return parse_boundary(string(j, path));
    } catch (const ParameterError& e) {
        fail(path, e.what());
    }
}

} // namespace

Json smoother_to_json(const SmootherSpec& spec) {
    Json params = Json::object();
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MeanParams> || std::is_same_v<T, MedianParams>) {
                params["kernel_size"] = p.kernel_size;
                params["boundary"] = std::string(to_string(p.boundary));
            } else if constexpr (std::is_same_v<T, GaussianParams>) {
                params["sigma"] = p.sigma;
                params["radius"] = p.radius;
                params["boundary"] = std::string(to_string(p.boundary));
            } else if constexpr (std::is_same_v<T, DiffusionParams>) {
                params["iterations"] = p.iterations;
                params["coefficient"] =
                    p.coefficient.kind == DiffusionCoefficient::Kind::Exponential ? "exponential" : "rational";
                params["K"] = p.coefficient.k;
                params["lambda"] = p.lambda;
            } else if constexpr (std::is_same_v<T, BilateralParams>) {
                params["diameter"] = p.diameter;
                params["sigma_space"] = p.sigma_space;
                params["sigma_range"] = p.sigma_range;
                params["boundary"] = std::string(to_string(p.boundary));
            } else if constexpr (std::is_same_v<T, NonLocalMeansParams>) {
                params["patch_radius"] = p.patch_radius;
                params["search_radius"] = p.search_radius;
                params["h_filter"] = p.h_filter;
                params["a_sigma"] = p.a_sigma;
                params["boundary"] = std::string(to_string(p.boundary));
            } else {
                params["iterations"] = p.iterations;
                params["k"] = p.k;
                params["dt"] = p.dt;
            }
        },
        spec.params);
    Json j;
    j["method"] = std::string(to_string(spec.method()));
    j["params"] = std::move(params);
    j["strength_param"] = spec.strength_param;
    return j;
}

SmootherSpec smoother_from_json(const Json& j, const std::string& path) {
    only_keys(j, path, {"method", "params", "strength_param"});
    if (!j.contains("method")) fail(path + ".method", "required");
    SmoothingMethod method;
    try {
        method = parse_method(string(j["method"], path + ".method"));
    } catch (const ParameterError& e) {
        fail(path + ".method", e.what());
    }
    SmootherSpec spec = SmootherSpec::defaults(method);
    const std::string pp = path + ".params";
    const Json params = j.contains("params") ? j["params"] : Json::object();
    object(params, pp);

    std::visit(
        [&](auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MeanParams> || std::is_same_v<T, MedianParams>) {
                only_keys(params, pp, {"kernel_size", "boundary"});
                field(params, "kernel_size", pp, [&](const Json& v, const std::string& kp) { p.kernel_size = int_field(v, kp); });
                field(params, "boundary", pp, [&](const Json& v, const std::string& kp) { p.boundary = boundary_field(v, kp); });
            } else if constexpr (std::is_same_v<T, GaussianParams>) {
                only_keys(params, pp, {"sigma", "radius", "boundary"});
                field(params, "sigma", pp, [&](const Json& v, const std::string& kp) { p.sigma = number(v, kp); });
                field(params, "radius", pp, [&](const Json& v, const std::string& kp) { p.radius = int_field(v, kp); });
                field(params, "boundary", pp, [&](const Json& v, const std::string& kp) { p.boundary = boundary_field(v, kp); });
            } else if constexpr (std::is_same_v<T, DiffusionParams>) {
                only_keys(params, pp, {"iterations", "coefficient", "K", "lambda"});
                field(params, "iterations", pp, [&](const Json& v, const std::string& kp) { p.iterations = int_field(v, kp); });
                field(params, "coefficient", pp, [&](const Json& v, const std::string& kp) {
                    const auto s = string(v, kp);
                    if (s == "exponential") {
                        p.coefficient.kind = DiffusionCoefficient::Kind::Exponential;
                    } else if (s == "rational") {
                        p.coefficient.kind = DiffusionCoefficient::Kind::Rational;
                    } else {
                        fail(kp, "expected \"exponential\" or \"rational\"");
                    }
                });
                field(params, "K", pp, [&](const Json& v, const std::string& kp) { p.coefficient.k = number(v, kp); });
                field(params, "lambda", pp, [&](const Json& v, const std::string& kp) { p.lambda = number(v, kp); });
            } else if constexpr (std::is_same_v<T, BilateralParams>) {
                only_keys(params, pp, {"diameter", "sigma_space", "sigma_range", "boundary"});
                field(params, "diameter", pp, [&](const Json& v, const std::string& kp) { p.diameter = int_field(v, kp); });
                field(params, "sigma_space", pp, [&](const Json& v, const std::string& kp) { p.sigma_space = number(v, kp); });
                field(params, "sigma_range", pp, [&](const Json& v, const std::string& kp) { p.sigma_range = number(v, kp); });
                field(params, "boundary", pp, [&](const Json& v, const std::string& kp) { p.boundary = boundary_field(v, kp); });
            } else if constexpr (std::is_same_v<T, NonLocalMeansParams>) {
                only_keys(params, pp, {"patch_radius", "search_radius", "h_filter", "a_sigma", "boundary"});
                field(params, "patch_radius", pp, [&](const Json& v, const std::string& kp) { p.patch_radius = int_field(v, kp); });
                field(params, "search_radius", pp, [&](const Json& v, const std::string& kp) { p.search_radius = int_field(v, kp); });
                field(params, "h_filter", pp, [&](const Json& v, const std::string& kp) { p.h_filter = number(v, kp); });
                field(params, "a_sigma", pp, [&](const Json& v, const std::string& kp) { p.a_sigma = number(v, kp); });
                field(params, "boundary", pp, [&](const Json& v, const std::string& kp) { p.boundary = boundary_field(v, kp); });
            } else {
                only_keys(params, pp, {"iterations", "k", "dt"});
                field(params, "iterations", pp, [&](const Json& v, const std::string& kp) { p.iterations = int_field(v, kp); });
                field(params, "k", pp, [&](const Json& v, const std::string& kp) { p.k = number(v, kp); });
                field(params, "dt", pp, [&](const Json& v, const std::string& kp) { p.dt = number(v, kp); });
            }
        },
        spec.params);

    if (j.contains("strength_param")) spec.strength_param = string(j["strength_param"], path + ".strength_param");
    try {
        validate(spec);
    } catch (const ParameterError& e) {
        fail(path, e.what());
    }
    return spec;
}

Json attack_to_json(const AttackSpec& spec) {
    Json j;
    if (const auto* p = std::get_if<PgdSpec>(&spec)) {
        j["type"] = "pgd";
        j["epsilon"] = p->epsilon;
        j["step_size"] = p->resolved_step_size();
        j["iterations"] = p->iterations;
        j["random_start"] = p->random_start;
        j["seed"] = p->seed;
    } else {
        const auto& s = std::get<SaltPepperSpec>(spec);
        j["type"] = "salt_pepper";
        j["density_levels"] = s.density_levels;
        j["seed"] = s.seed;
    }
    return j;
}

AttackSpec attack_from_json(const Json& j, const std::string& path) {
    object(j, path);
    if (j.contains("preset")) {
        only_keys(j, path, {"preset", "seed"});
        AttackSpec preset;
        try {
            preset = attack_preset(string(j["preset"], path + ".preset"));
        } catch (const ParameterError& e) {
            fail(path + ".preset", e.what());
        }
        field(j, "seed", path, [&](const Json& v, const std::string& kp) {
            const auto seed = static_cast<std::uint64_t>(integer(v, kp));
            std::visit([&](auto& s) { s.seed = seed; }, preset);
        });
        return preset;
    }
    if (!j.contains("type")) fail(path + ".type", "required (\"pgd\" or \"salt_pepper\")");
    const auto type = string(j["type"], path + ".type");
    AttackSpec out;
    if (type == "pgd") {
        only_keys(j, path, {"type", "epsilon", "step_size", "iterations", "random_start", "seed"});
        PgdSpec p;
        field(j, "epsilon", path, [&](const Json& v, const std::string& kp) { p.epsilon = number(v, kp); });
        field(j, "step_size", path, [&](const Json& v, const std::string& kp) { p.step_size = number(v, kp); });
        field(j, "iterations", path, [&](const Json& v, const std::string& kp) { p.iterations = int_field(v, kp); });
        field(j, "random_start", path, [&](const Json& v, const std::string& kp) { p.random_start = boolean(v, kp); });
        field(j, "seed", path, [&](const Json& v, const std::string& kp) {
            p.seed = static_cast<std::uint64_t>(integer(v, kp));
        });
        if (!(p.epsilon > 0)) fail(path + ".epsilon", "must be > 0");
        if (p.step_size < 0) fail(path + ".step_size", "must be > 0 (or 0 for the default)");
        if (p.iterations < 1) fail(path + ".iterations", "must be >= 1");
        out = p;
    } else if (type == "salt_pepper") {
        only_keys(j, path, {"type", "density_levels", "seed"});
        SaltPepperSpec s;
        field(j, "density_levels", path, [&](const Json& v, const std::string& kp) { s.density_levels = number_list(v, kp); });
        field(j, "seed", path, [&](const Json& v, const std::string& kp) {
            s.seed = static_cast<std::uint64_t>(integer(v, kp));
        });
        try {
            validate(s);
        } catch (const ParameterError& e) {
            fail(path + ".density_levels", e.what());
        }
        out = s;
    } else {
        fail(path + ".type", "expected \"pgd\" or \"salt_pepper\", got \"" + type + "\"");
    }
    return out;
}

Json train_config_to_json(const TrainConfig& cfg) {
    Json j;
    j["architecture"] = cfg.architecture;
    j["epochs"] = cfg.epochs;
    j["learning_rate"] = cfg.learning_rate;
    j["momentum"] = cfg.momentum;
    j["batch_size"] = cfg.batch_size;
    j["seed"] = cfg.seed;
    return j;
}

TrainConfig train_config_from_json(const Json& j, const std::string& path) {
    only_keys(j, path, {"architecture", "epochs", "learning_rate", "momentum", "batch_size", "seed"});
    TrainConfig c;
    field(j, "architecture", path, [&](const Json& v, const std::string& kp) {
        c.architecture = string(v, kp);
        if (c.architecture != "cnn" && c.architecture != "dense") fail(kp, "expected \"cnn\" or \"dense\"");
    });
    field(j, "epochs", path, [&](const Json& v, const std::string& kp) {
        c.epochs = int_field(v, kp);
        if (c.epochs < 0) fail(kp, "must be >= 0");
    });
    field(j, "learning_rate", path, [&](const Json& v, const std::string& kp) {
        c.learning_rate = number(v, kp);
        if (!(c.learning_rate > 0)) fail(kp, "must be > 0");
    });
    field(j, "momentum", path, [&](const Json& v, const std::string& kp) {
        c.momentum = number(v, kp);
        if (c.momentum < 0 || c.momentum >= 1) fail(kp, "must lie in [0, 1)");
    });
    field(j, "batch_size", path, [&](const Json& v, const std::string& kp) {
        const auto b = integer(v, kp);
        if (b < 1) fail(kp, "must be >= 1");
        c.batch_size = static_cast<std::size_t>(b);
    });
    field(j, "seed", path, [&](const Json& v, const std::string& kp) {
        c.seed = static_cast<std::uint64_t>(integer(v, kp));
    });
    return c;
}

Json prediction_to_json(const Prediction& p) {
    Json j;
    j["label"] = p.label;
    j["confidence"] = p.confidence;
    return j;
}

} // namespace ssd
