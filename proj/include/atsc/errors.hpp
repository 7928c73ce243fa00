#pragma once

#include <stdexcept>
#include <string>

namespace atsc {

// Invalid scenario/network configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

// Two vehicles overlap, or a car-following gap collapsed to zero.
class CollisionFault : public std::runtime_error {
public:
    explicit CollisionFault(const std::string &what) : std::runtime_error(what) {}
};

// Critical flow ratio sum reached 1; no finite Webster cycle exists.
class InfeasibleDemand : public std::runtime_error {
public:
    explicit InfeasibleDemand(const std::string &what) : std::runtime_error(what) {}
};

class InsufficientSamples : public std::runtime_error {
public:
    explicit InsufficientSamples(const std::string &what) : std::runtime_error(what) {}
};

} // namespace atsc
