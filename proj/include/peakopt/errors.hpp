#pragma once

#include <stdexcept>
#include <string>

namespace peakopt {

// Every error raised by the library derives from Error so callers can catch
// one type; the subclasses exist so tests and the CLI can tell them apart.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class UndefinedMetricError : public Error { using Error::Error; };
class CoverageError : public Error { using Error::Error; };
class AssemblyError : public Error { using Error::Error; };
class FitError : public Error { using Error::Error; };
class PredictionError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class ValidationError : public ParseError { using ParseError::ParseError; };
class ReferenceError : public ParseError { using ParseError::ParseError; };
class ContractError : public Error { using Error::Error; };
class InfeasibleError : public Error { using Error::Error; };

} // namespace peakopt
