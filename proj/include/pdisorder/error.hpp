#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pdisorder {

// Machine-readable failure. `code` is a stable upper-case identifier such as
// MU_NOT_GT_ONE; the CLI maps it to an exit status.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    [[nodiscard]] auto code() const -> const std::string& { return code_; }

private:
    std::string code_;
};

}  // namespace pdisorder
