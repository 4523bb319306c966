#pragma once

#include <stdexcept>
#include <string>

namespace vff {

/// Root of every error the library throws. Each failure mode has its own
/// subclass so callers (and the CLI) can react without parsing messages.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coordinate or mapping fell outside the grid domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Shapes or sizes of cooperating objects disagree.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// A configuration value violates its documented range.
class ConfigError : public Error {
public:
    using Error::Error;
};

class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (open, read, write).
class IoError : public Error {
public:
    using Error::Error;
};

/// Base for malformed-content errors raised by the readers.
class FormatError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class LengthMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class UnknownColorspaceError : public FormatError {
public:
    using FormatError::FormatError;
};

class MalformedFrameError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedPayloadError : public FormatError {
public:
    using FormatError::FormatError;
};

class InconsistentDimsError : public FormatError {
public:
    using FormatError::FormatError;
};

class EmptyInputError : public FormatError {
public:
    using FormatError::FormatError;
};

class UnreadableFileError : public FormatError {
public:
    using FormatError::FormatError;
};

} // namespace vff
