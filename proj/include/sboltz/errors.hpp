#pragma once

#include <stdexcept>
#include <string>

namespace sboltz {

// Every library failure derives from Error so callers (the CLI in particular)
// can map families of failures onto exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct PreconditionError : Error { using Error::Error; };
struct NonConvergenceError : Error { using Error::Error; };
struct OverflowError : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct AdmissibilityError : Error { using Error::Error; };
struct SupportError : Error { using Error::Error; };
struct StiffnessError : Error { using Error::Error; };

struct IoError : Error { using Error::Error; };
struct VersionMismatchError : IoError { using IoError::IoError; };
struct DigestMismatchError : IoError { using IoError::IoError; };
struct MalformedFileError : IoError { using IoError::IoError; };

}  // namespace sboltz
