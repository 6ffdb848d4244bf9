#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace elbt {

enum class ErrorKind {
    DuplicateAccount,
    FieldOutOfRange,
    MissingDefaultDate,
    InconsistentDates,
    InconsistentEvents,
    NonMonotoneDates,
    ZeroExposure,
    IdentityBreach,
    MissingAtDefaultData,
    UnknownDimension,
    ConfigInvalid,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map outcome classes onto exit codes without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace elbt
