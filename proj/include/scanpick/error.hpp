/**
 * @file error.hpp
 * @brief Exception types shared by every scanpick module
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scanpick {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (bad window, bad size, bad probability).
class InputDomainError : public Error {
public:
    using Error::Error;
};

/// Malformed image or document. Carries the 1-based line and 0-based byte offset of the fault.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t offset)
        : Error(what + " (line " + std::to_string(line) + ", byte " + std::to_string(offset) + ")"),
          line_(line),
          offset_(offset) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t line_;
    std::size_t offset_;
};

/// The lower intensity estimate is not below the upper one, so no midpoint threshold exists.
class DegenerateEstimatesError : public Error {
public:
    using Error::Error;
};

/// A synthetic scene violates the generative model (overlap, missing noise square, thin particle).
class SceneError : public Error {
public:
    using Error::Error;
};

}  // namespace scanpick
