#include "deficit/error.hpp"

namespace deficit {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::NonFiniteIntegrand: return "NonFiniteIntegrand";
        case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::NonPositiveTime: return "NonPositiveTime";
        case ErrorKind::StepTooLarge: return "StepTooLarge";
        case ErrorKind::ZeroTimeComponent: return "ZeroTimeComponent";
        case ErrorKind::OverflowGuard: return "OverflowGuard";
        case ErrorKind::InsufficientPoints: return "InsufficientPoints";
        case ErrorKind::ConfigParse: return "ConfigParse";
        case ErrorKind::MixtureParse: return "MixtureParse";
        case ErrorKind::ExperimentFailure: return "ExperimentFailure";
    }
    return "Unknown";
}

}  // namespace deficit
