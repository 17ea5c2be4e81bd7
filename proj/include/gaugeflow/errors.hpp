#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaugeflow {

enum class ErrorCode {
    DimensionMismatch,
    ModelEvaluation,
    FiberFormSingular,
    RequiresDarboux,
    LagrangianDegenerate,
    NewtonDivergence,
    InvalidArgument,
    ConfigError,
    UnknownScenario,
};

/// Stable kebab-case identifier used in diagnostics and JSON reports.
constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::ModelEvaluation: return "model-evaluation-error";
    case ErrorCode::FiberFormSingular: return "fiber-form-singular";
    case ErrorCode::RequiresDarboux: return "requires-darboux";
    case ErrorCode::LagrangianDegenerate: return "lagrangian-degenerate";
    case ErrorCode::NewtonDivergence: return "newton-divergence";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::UnknownScenario: return "unknown-scenario";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace gaugeflow
