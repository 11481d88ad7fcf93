#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace udemd {

enum class ErrorCode {
    ParseError,
    InvalidArgument,
    DisconnectedGraph,
    AsymmetricWeights,
    NegativeWeight,
    InvalidIndex,
    ZeroDegreeNode,
    DimensionMismatch,
    NegativeEntry,
    RowCountMismatch,
    ZeroColumn,
    VersionMismatch,
    ChecksumFailure,
    NonFiniteValue,
    IndexOutOfRange,
    EmptyBandAfterSubsample,
    KTooLarge,
    MassMismatch,
    InstanceTooLarge,
    SolverFailure,
    DegenerateCluster,
    InvalidLabels,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::AsymmetricWeights: return "AsymmetricWeights";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::ZeroDegreeNode: return "ZeroDegreeNode";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::RowCountMismatch: return "RowCountMismatch";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ChecksumFailure: return "ChecksumFailure";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyBandAfterSubsample: return "EmptyBandAfterSubsample";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::MassMismatch: return "MassMismatch";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::DegenerateCluster: return "DegenerateCluster";
    case ErrorCode::InvalidLabels: return "InvalidLabels";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace udemd
