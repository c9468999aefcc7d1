#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gtdb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class StoreErrc : std::uint8_t {
    EmptyLabels,
    UnknownNode,
    UnknownEdge,
    DuplicateId,
    IndexNotFound,
    ReadOnly,
    WriteConflict,
    TooManyLabels,
    TypeMismatch,
    Io,
    Corrupt,
};

const char* to_string(StoreErrc code);

class StoreError : public Error {
public:
    StoreError(StoreErrc code, const std::string& msg)
        : Error(std::string(to_string(code)) + ": " + msg), code_(code) {}

    StoreErrc code() const noexcept { return code_; }

private:
    StoreErrc code_;
};

} // namespace gtdb
