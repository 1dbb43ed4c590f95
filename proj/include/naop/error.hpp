#pragma once

#include <stdexcept>
#include <string>

namespace naop {

enum class ErrorCode {
    InvalidArgument = 1,
    Io = 2,
    Parse = 3,
    Mismatch = 4,
    Format = 5,
    Internal = 6,
};

/// Every failure raised by the core library. The C API maps `code()` onto
/// its status enum one-to-one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace naop
