#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>

namespace eadkit {

// Precondition failure on a numeric argument (non-positive gap, negative current, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Drive field exceeds the allowed fraction of the medium's breakdown field.
class BreakdownError : public std::runtime_error {
public:
    BreakdownError(double field, double limit);

    double field() const noexcept { return field_; }
    double limit() const noexcept { return limit_; }

private:
    double field_;
    double limit_;
};

// Emitter tips cannot be placed on the contour at the requested count.
class LayoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Design carries a hard constraint violation and cannot be evaluated.
class InfeasibleDesignError : public std::runtime_error {
public:
    InfeasibleDesignError(std::string rule_id, const std::string& message);

    const std::string& rule_id() const noexcept { return rule_id_; }

private:
    std::string rule_id_;
};

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every sample of an I-V sweep reads zero current.
class NoDischargeError : public InsufficientDataError {
public:
    using InsufficientDataError::InsufficientDataError;
};

class UnidentifiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Curves passed to trial aggregation disagree on geometry or voltage grid.
class MismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyFeasibleSetError : public std::runtime_error {
public:
    explicit EmptyFeasibleSetError(std::map<std::string, std::size_t> rejections);

    // Rejection reason -> number of designs rejected for it.
    const std::map<std::string, std::size_t>& rejections() const noexcept { return rejections_; }

private:
    std::map<std::string, std::size_t> rejections_;
};

// Malformed input file. `line` is 0 when the position is unknown.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string source, std::size_t line, std::string field, const std::string& message);

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string source_;
    std::size_t line_;
    std::string field_;
};

}  // namespace eadkit
