#pragma once

#include <stdexcept>
#include <string>

namespace weightless {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A precondition on arguments or input data was violated.
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(what) {}
};

// Bloomier filter construction ran out of seed retries.
class ConstructionFailed : public Error {
public:
    ConstructionFailed(const std::string& what, unsigned retries)
        : Error(what), retries_(retries) {}
    unsigned retries() const { return retries_; }

private:
    unsigned retries_;
};

// A serialized stream or file failed validation while being read.
class CorruptData : public Error {
public:
    explicit CorruptData(const std::string& what) : Error(what) {}
};

// Filesystem-level failure (missing file, short read, ...).
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace weightless
