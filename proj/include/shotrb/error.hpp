#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shotrb {

enum class ErrorCode {
    InvalidArgument,
    // trajgeom
    RankDeficient,
    DegeneratePath,
    NoDescendingCrossing,
    // shotprob
    InvalidFactors,
    Separation,
    OneClass,
    LengthMismatch,
    EmptyZone,
    // estimators
    EmptyShots,
    DegenerateSample,
    NoAttempts,
    // evaluation
    NoQualifyingPlayers,
    TooFewPlayers,
    ZeroTotalVariance,
    // simulator
    InfeasibleFactors,
    // pipeline
    SchemaError,
    OrphanSamples,
    NonMonotoneTime,
    MissingArtifact,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace shotrb
