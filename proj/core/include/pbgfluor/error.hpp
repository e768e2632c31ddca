// error.hpp — Exception type carrying the module that raised it

#pragma once

#include <stdexcept>
#include <string>

namespace pbgfluor {

class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

} // namespace pbgfluor
