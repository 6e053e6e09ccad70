#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace potsys {

/// Base class of every error raised by the library. The CLI maps these to
/// the "input error" exit code.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed formula or system text. `offset()` is a byte offset into the
/// parsed text.
class SyntaxError : public Error
{
public:
    SyntaxError(const std::string & message, std::size_t offset) :
        Error(message),
        _offset(offset)
    {
    }

    auto offset() const -> std::size_t { return _offset; }

private:
    std::size_t _offset;
};

/// A configured size/depth/rank cap would be exceeded. Never silently
/// truncated.
class CapExceeded : public Error
{
public:
    using Error::Error;
};

/// Lazy unravelling refused to expand a node at the depth cap.
class DepthExceeded : public Error
{
public:
    using Error::Error;
};

} // namespace potsys
