#pragma once

#include <stdexcept>
#include <string>

namespace beatmotion {

// Base class for every domain error raised by the library. The CLI maps
// these to exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Vector/matrix shape mismatch; the message names expected and actual dims.
class DimensionError : public Error {
public:
    using Error::Error;
};

class WavError : public Error {
public:
    enum class Kind { MalformedHeader, UnsupportedCodec, TruncatedData };

    WavError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Raised by beat tracking when the onset envelope carries no usable pulse.
class NoBeatError : public Error {
public:
    using Error::Error;
};

// Line-oriented input (skeleton JSONL, pose JSONL, limits config) errors,
// tagged with the 1-based line they came from.
class LineParseError : public Error {
public:
    enum class Kind {
        MalformedLine,
        MissingJoint,
        UnknownJoint,
        NonMonotonicTimestamp,
        BadValue,
    };

    LineParseError(Kind kind, std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

// Bad key/value in the joint-limits config; remembers the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what) : Error(what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

}  // namespace beatmotion
