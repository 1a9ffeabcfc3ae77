#ifndef SBMMRF_ERRORS_HPP
#define SBMMRF_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbmmrf {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Errors caused by bad input (files, flags, arguments). The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t row)
        : InputError(what + " (row " + std::to_string(row) + ")"), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ValidationError : public InputError {
public:
    using InputError::InputError;
};

class CoverageError : public ValidationError {
public:
    explicit CoverageError(std::vector<std::string> missing)
        : ValidationError(make_message(missing)), missing_(std::move(missing)) {}
    const std::vector<std::string>& missing() const noexcept { return missing_; }

private:
    static std::string make_message(const std::vector<std::string>& missing) {
        std::string msg = "missing entries for " + std::to_string(missing.size()) + " identifier(s):";
        for (const auto& m : missing) msg += " " + m;
        return msg;
    }
    std::vector<std::string> missing_;
};

class EmptyResultError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public InputError {
public:
    using InputError::InputError;
};

// Correlation of a constant vector.
class UndefinedCorrelation : public DomainError {
public:
    UndefinedCorrelation() : DomainError("correlation undefined for a constant vector") {}
};

class GenerationError : public Error {
public:
    GenerationError(const std::string& what, double best_ari)
        : Error(what + " (best ARI " + std::to_string(best_ari) + ")"), best_ari_(best_ari) {}
    double best_ari() const noexcept { return best_ari_; }

private:
    double best_ari_;
};

} // namespace sbmmrf

#endif // SBMMRF_ERRORS_HPP
