#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpsol {

enum class ErrorKind {
    InvalidRegime,
    VelocityPole,
    ImaginaryCoefficient,
    DegenerateDelta,
    DegenerateModes,
    PhaseMismatch,
    Overflow,
    ZeroDenominator,
    ComplexResidue,
    MapSingularity,
    SingularIntegrand,
    TroughCountMismatch,
    FeatureMatchFailure,
    ParseError,
    ValidationError,
    InvalidArgument,
    IoError,
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidRegime: return "InvalidRegime";
    case ErrorKind::VelocityPole: return "VelocityPole";
    case ErrorKind::ImaginaryCoefficient: return "ImaginaryCoefficient";
    case ErrorKind::DegenerateDelta: return "DegenerateDelta";
    case ErrorKind::DegenerateModes: return "DegenerateModes";
    case ErrorKind::PhaseMismatch: return "PhaseMismatch";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::ComplexResidue: return "ComplexResidue";
    case ErrorKind::MapSingularity: return "MapSingularity";
    case ErrorKind::SingularIntegrand: return "SingularIntegrand";
    case ErrorKind::TroughCountMismatch: return "TroughCountMismatch";
    case ErrorKind::FeatureMatchFailure: return "FeatureMatchFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace dpsol
