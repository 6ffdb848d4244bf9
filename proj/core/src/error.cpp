#include "elbt/error.hpp"

namespace elbt {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DuplicateAccount: return "DuplicateAccount";
        case ErrorKind::FieldOutOfRange: return "FieldOutOfRange";
        case ErrorKind::MissingDefaultDate: return "MissingDefaultDate";
        case ErrorKind::InconsistentDates: return "InconsistentDates";
        case ErrorKind::InconsistentEvents: return "InconsistentEvents";
        case ErrorKind::NonMonotoneDates: return "NonMonotoneDates";
        case ErrorKind::ZeroExposure: return "ZeroExposure";
        case ErrorKind::IdentityBreach: return "IdentityBreach";
        case ErrorKind::MissingAtDefaultData: return "MissingAtDefaultData";
        case ErrorKind::UnknownDimension: return "UnknownDimension";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace elbt
