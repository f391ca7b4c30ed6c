#pragma once

#include <stdexcept>
#include <string>

namespace qdarwin {

// Bad configuration file or command line (exit code 2 at the CLI).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numeric invariant was violated, e.g. an eigenvalue below the clamp
// threshold (exit code 3 at the CLI).
class InvariantError : public std::runtime_error {
public:
    explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failure (exit code 4 at the CLI).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace qdarwin
