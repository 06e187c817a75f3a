#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace satstab {

enum class ErrorKind {
    InvalidArgument,
    ConvergenceFailure,
    AllModesUnstable,
    CriticalLength,
    NotStabilizable,
    CertificateFailure,
    GapTooSmall,
    BlowUp,
    NonPositiveChannel,
    BoundExpired,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so that callers (the CLI
// in particular) can map it onto an exit code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) {
        throw Error(ErrorKind::InvalidArgument, what);
    }
}

} // namespace satstab
