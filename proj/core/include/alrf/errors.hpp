#pragma once

#include <stdexcept>
#include <string>

namespace alrf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// Power iteration did not reach its tolerance; callers fall back to the dense solver.
class NonConvergence : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// backward() called without a preceding training-mode forward().
class StaleCache : public Error {
public:
    using Error::Error;
};

// Layer output has (near) zero norm, so its condition number is undefined.
class DegenerateOutput : public Error {
public:
    using Error::Error;
};

class AllZero : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingLabel : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace alrf
