#pragma once

#include <stdexcept>
#include <string>

namespace qpath {

// Exit-code mapping for the CLI lives in tools/qpath.cpp: config_error -> 2,
// convergence_error -> 3, insufficient_statistics -> 4.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

struct insufficient_statistics : std::runtime_error {
    explicit insufficient_statistics(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qpath
