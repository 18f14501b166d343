#pragma once

#include <stdexcept>
#include <string>

namespace mtq {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidStateError : public Error {
public:
    using Error::Error;
};

class FrameError : public Error {
public:
    using Error::Error;
};

class PropagationError : public Error {
public:
    using Error::Error;
};

class DegenerateFieldError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class IngestionError : public Error {
public:
    IngestionError(const std::string& what, int line)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mtq
