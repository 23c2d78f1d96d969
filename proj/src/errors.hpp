#pragma once

#include <stdexcept>
#include <string>

namespace seriesinv {

enum class ErrorCode {
    BasisMismatch,
    SchemaError,
    VariableScopeError,
    ParseError,
    NotLinear,
    RankDeficient,
    SingularIC,
    SequentialStall,
    NoConvergence,
    NonFinite,
    Dimension,
    Io,
};

/// Single exception type for all toolkit failures; `code()` maps 1:1 onto
/// the C API status values.
class ToolkitError : public std::runtime_error {
public:
    ToolkitError(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw ToolkitError(code, message);
}

} // namespace seriesinv
