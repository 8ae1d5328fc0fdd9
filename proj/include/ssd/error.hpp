#pragma once

#include <stdexcept>
#include <string>

namespace ssd {

// Mirrors ssd_status in the C API; keep the numeric values in sync.
enum class ErrorCode : int {
    Parameter = 1,
    Shape = 2,
    Io = 3,
    Format = 4,
    Config = 5,
    Training = 6,
    Attack = 7,
    Numeric = 8,
    Internal = 9,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct ParameterError : Error {
    explicit ParameterError(const std::string& w) : Error(ErrorCode::Parameter, w) {}
};
struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorCode::Shape, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorCode::Io, w) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error(ErrorCode::Format, w) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorCode::Config, w) {}
};
struct TrainingError : Error {
    explicit TrainingError(const std::string& w) : Error(ErrorCode::Training, w) {}
};
struct AttackError : Error {
    explicit AttackError(const std::string& w) : Error(ErrorCode::Attack, w) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(ErrorCode::Numeric, w) {}
};

} // namespace ssd
