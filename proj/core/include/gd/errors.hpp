#pragma once

#include <stdexcept>
#include <string>

namespace gd {

// Bad user input: unknown names, mismatched lengths, invalid flag combinations.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken wiring: missing variables or parameters, malformed files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A forward pass produced a non-finite value. node_id points at the
// offending tape node.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& msg, int node_id)
        : std::runtime_error(msg), node_id(node_id) {}
    int node_id;
};

}  // namespace gd
