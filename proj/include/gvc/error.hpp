#pragma once

#include <stdexcept>
#include <string>

namespace gvc {

// Process exit codes reported by the command-line tool.
enum class ExitCode : int {
    kOk = 0,
    kValidation = 2,
    kNumerical = 3,
    kSpecification = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

// Malformed input: schema violations, negative values, duplicate keys.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ExitCode::kValidation, what) {}
};

// A CSV row could not be parsed; carries the 1-based line number.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : ValidationError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Singular systems, non-productive economies, non-convergent iterations.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ExitCode::kNumerical, what) {}
};

// Regression specification problems: rank deficiency, too few clusters.
class SpecificationError : public Error {
public:
    explicit SpecificationError(const std::string& what) : Error(ExitCode::kSpecification, what) {}
};

}  // namespace gvc
