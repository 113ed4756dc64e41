#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pat {

// Exception hierarchy shared by all modules. Every error carries a
// human-readable message; ParseError additionally records the 1-based line.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class TopologyError : public Error {
public:
    using Error::Error;
};
class AssemblyError : public Error {
public:
    using Error::Error;
};
class StabilityError : public Error {
public:
    using Error::Error;
};
class DimensionError : public Error {
public:
    using Error::Error;
};
class InputError : public Error {
public:
    using Error::Error;
};
class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace pat
