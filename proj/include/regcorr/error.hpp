#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace regcorr {

// Malformed or truncated data files. Carries the byte offset at which
// decoding failed so callers can report the exact location.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& msg, std::uint64_t offset)
        : std::runtime_error(msg + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t byte_offset() const { return offset_; }

private:
    std::uint64_t offset_ = 0;
};

// Non-finite values produced where finite ones are required (e.g. the
// training loss). Distinct from input validation so the CLI can map it
// to its own exit code.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace regcorr
