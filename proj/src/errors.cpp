#include "satstab/errors.hpp"

namespace satstab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::AllModesUnstable: return "AllModesUnstable";
    case ErrorKind::CriticalLength: return "CriticalLength";
    case ErrorKind::NotStabilizable: return "NotStabilizable";
    case ErrorKind::CertificateFailure: return "CertificateFailure";
    case ErrorKind::GapTooSmall: return "GapTooSmall";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::NonPositiveChannel: return "NonPositiveChannel";
    case ErrorKind::BoundExpired: return "BoundExpired";
    }
    return "Unknown";
}

} // namespace satstab
