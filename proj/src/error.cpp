#include <shotrb/error.hpp>

namespace shotrb {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::DegeneratePath: return "DegeneratePath";
        case ErrorCode::NoDescendingCrossing: return "NoDescendingCrossing";
        case ErrorCode::InvalidFactors: return "InvalidFactors";
        case ErrorCode::Separation: return "Separation";
        case ErrorCode::OneClass: return "OneClass";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyZone: return "EmptyZone";
        case ErrorCode::EmptyShots: return "EmptyShots";
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::NoAttempts: return "NoAttempts";
        case ErrorCode::NoQualifyingPlayers: return "NoQualifyingPlayers";
        case ErrorCode::TooFewPlayers: return "TooFewPlayers";
        case ErrorCode::ZeroTotalVariance: return "ZeroTotalVariance";
        case ErrorCode::InfeasibleFactors: return "InfeasibleFactors";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::OrphanSamples: return "OrphanSamples";
        case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
        case ErrorCode::MissingArtifact: return "MissingArtifact";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace shotrb
