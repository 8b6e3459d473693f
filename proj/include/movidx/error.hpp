#pragma once

#include <stdexcept>
#include <string>

namespace movidx {

// Error taxonomy mirrors the CLI exit codes: parse/validation/io failures
// exit with 2, broken internal invariants with 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace movidx
