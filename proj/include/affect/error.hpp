#pragma once

#include <stdexcept>
#include <string>

namespace affect {

// Common base for all pipeline errors so callers can catch the whole family.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace affect
