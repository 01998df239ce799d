#pragma once

#include <stdexcept>
#include <string>

namespace captionprobe {

// Failure classes map one-to-one onto CLI exit codes (1, 2, 3).
enum class ErrorKind { Usage = 1, Data = 2, Io = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &message) : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string &message) : Error(ErrorKind::Usage, message) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string &message) : Error(ErrorKind::Data, message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string &message) : Error(ErrorKind::Io, message) {}
};

} // namespace captionprobe
