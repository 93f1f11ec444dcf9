#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace upw {

enum class ErrorKind : std::uint8_t {
    InvalidArgument,
    InvalidToken,
    EmptyImage,
    Alignment,
    Corruption,
    Shape,
    Config,
    Numerical,
    Format,
    Truncation,
    Encoding,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Truncation errors carry the byte offset at which input ran out.
class TruncationError : public Error {
public:
    TruncationError(std::uint64_t offset, const std::string& message)
        : Error(ErrorKind::Truncation, message + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

}  // namespace upw
