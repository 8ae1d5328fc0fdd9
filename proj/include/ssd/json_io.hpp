#pragma once

// JSON forms of the configuration types. Parsers are strict: unknown keys,
// wrong types and out-of-range values raise ConfigError messages that start
// with the dotted key path, e.g. "attack.epsilon: must be > 0".

#include <string>

#include "json.hpp"
#include "ssd/attacks.hpp"
#include "ssd/classifier.hpp"
#include "ssd/filters.hpp"

namespace ssd {

using Json = nlohmann::ordered_json;

Json smoother_to_json(const SmootherSpec& spec);
SmootherSpec smoother_from_json(const Json& j, const std::string& path = "defense");

Json attack_to_json(const AttackSpec& spec);
/// Also accepts {"preset": "<name>"}.
AttackSpec attack_from_json(const Json& j, const std::string& path = "attack");

Json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const Json& j, const std::string& path = "model.train");

Json prediction_to_json(const Prediction& p);

namespace json_check {

[[noreturn]] void fail(const std::string& path, const std::string& msg);
void only_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed);
const Json& object(const Json& j, const std::string& path);
double number(const Json& j, const std::string& path);
long long integer(const Json& j, const std::string& path);
bool boolean(const Json& j, const std::string& path);
std::string string(const Json& j, const std::string& path);
std::vector<double> number_list(const Json& j, const std::string& path);

} // namespace json_check

} // namespace ssd
