#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace meshcorr {

/// Library-wide exception. `code` is a stable machine-readable tag of the
/// form "area/kind" (e.g. "io/parse", "decimate/floor") used by the CLI to
/// emit its machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace meshcorr
