#pragma once

#include <stdexcept>
#include <string>

namespace dflsim {

// Base class for everything the library throws.
class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// Two vectors with incompatible dimensions; the message names both.
class DimMismatchError : public SimError {
public:
    using SimError::SimError;
};

// Malformed input data: bad IDX magic, truncated files, empty batches.
class DataFormatError : public SimError {
public:
    using SimError::SimError;
};

// Gossip state left the algorithm's admissible region (w <= 0, weight
// underflow, mass drift past tolerance).
class ProtocolError : public SimError {
public:
    using SimError::SimError;
};

// Invalid experiment configuration.
class ConfigError : public SimError {
public:
    using SimError::SimError;
};

} // namespace dflsim
