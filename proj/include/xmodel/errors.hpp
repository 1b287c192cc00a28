#pragma once

#include <stdexcept>
#include <string>

namespace xmodel {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class EmptyCurveError : public Error { public: using Error::Error; };
class OutOfSupportError : public Error { public: using Error::Error; };
class NoCrossingError : public Error { public: using Error::Error; };

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }
private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }
private:
    std::size_t line_;
};

class IrregularDayError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class EmptyPanelError : public Error { public: using Error::Error; };
class PartitionError : public Error { public: using Error::Error; };
class InsufficientHistoryError : public Error { public: using Error::Error; };

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::size_t lambda_index)
        : Error(what + " (lambda index " + std::to_string(lambda_index) + ")"),
          lambda_index_(lambda_index) {}
    std::size_t lambda_index() const { return lambda_index_; }
private:
    std::size_t lambda_index_;
};

class MissingExogenousError : public Error { public: using Error::Error; };
class ReconstructionError : public Error { public: using Error::Error; };
class NumericalError : public Error { public: using Error::Error; };
class DegenerateRegimeError : public Error { public: using Error::Error; };

}  // namespace xmodel
