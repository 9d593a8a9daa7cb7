#pragma once

#include <stdexcept>
#include <string>

namespace splitconv {

// Raised for malformed user input: bad shapes, unparsable model text,
// rejected file formats. The CLI maps this to exit code 2; anything else
// escaping to main is an internal error (exit code 1).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace splitconv
