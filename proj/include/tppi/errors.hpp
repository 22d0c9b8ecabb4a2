#ifndef TPPI_ERRORS_HPP
#define TPPI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tppi {

/// Root of all domain errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problems with input files or configuration. CLI exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

/// A requested analysis cannot be carried out on the given data. CLI exit code 3.
class AnalysisError : public Error {
public:
    using Error::Error;
};

// --- input-side errors ---

/// Header does not match the documented schema (missing/duplicate column,
/// duplicate key where uniqueness is required).
class SchemaError : public InputError {
public:
    using InputError::InputError;
};

/// A data row failed validation. Carries the 1-based row number (header is
/// row 1) and the offending column name.
class ParseError : public InputError {
public:
    ParseError(std::size_t row, const std::string& column, const std::string& detail)
        : InputError("row " + std::to_string(row) + ", column '" + column + "': " + detail),
          row_(row),
          column_(column) {}

    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Two sources disagree about the same (area, year) key.
class ConflictError : public InputError {
public:
    using InputError::InputError;
};

/// Enrollment total is zero where a positive total is required.
class ZeroEnrollment : public InputError {
public:
    using InputError::InputError;
};

/// Bad run configuration (missing path, non-positive budget, unknown policy).
class ConfigError : public InputError {
public:
    using InputError::InputError;
};

/// File could not be opened/read/written.
class IoError : public InputError {
public:
    using InputError::InputError;
};

// --- analysis-side errors ---

/// Series has too few usable values for the requested lag structure.
class SeriesTooShort : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

/// Two series share no common years.
class YearMisalignment : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

/// Paired vectors differ in length.
class LengthMismatch : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

/// No usable series/areas were supplied.
class EmptyDataset : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

/// A fitted model required by a policy or simulation is absent.
class MissingModel : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

/// Every allocation weight is zero and fallback is disabled.
class NoEligibleAreas : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

}  // namespace tppi

#endif  // TPPI_ERRORS_HPP
