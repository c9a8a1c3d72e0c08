#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace crm {

// Harness-level failure with a stable machine-readable code ("file-not-found",
// "infeasible-placement", ...). Codes are part of the CLI contract.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

}  // namespace crm
