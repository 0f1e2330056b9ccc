#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace imcrawler {

// Coarse error classes surfaced by the CLI as `error[CATEGORY]`.
enum class ErrorCategory {
    Config,
    Io,
    Param,
    Parse,
    Fetch,
    Auth,
    Store,
    Agent,
    Usage,
};

std::string_view category_name(ErrorCategory c);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string code, const std::string& message)
        : std::runtime_error(message), category_(category), code_(std::move(code)) {}

    ErrorCategory category() const noexcept { return category_; }
    // Stable machine-readable identifier, e.g. "DuplicateSeed".
    const std::string& code() const noexcept { return code_; }

private:
    ErrorCategory category_;
    std::string code_;
};

} // namespace imcrawler
