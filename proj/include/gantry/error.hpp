#pragma once

#include <stdexcept>
#include <string>

namespace gantry {

enum class ErrorCode {
    WorkspaceViolation,
    CurveExceedsWorkspace,
    NonPositiveExtension,
    StepTooLarge,
    DimensionMismatch,
    NoOverlap,
    EmptyWindow,
    TooShort,
    InvalidArgument,
    ChainParse,
    Config,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is stable
/// and meant for programmatic dispatch; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Configuration problem, carrying the JSON path of the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& message)
        : Error(ErrorCode::Config, path.empty() ? message : path + ": " + message),
          path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::WorkspaceViolation: return "WorkspaceViolation";
    case ErrorCode::CurveExceedsWorkspace: return "CurveExceedsWorkspace";
    case ErrorCode::NonPositiveExtension: return "NonPositiveExtension";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ChainParse: return "ChainParse";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace gantry
