#pragma once

#include <stdexcept>
#include <string>

namespace curator {

/// Domain error carrying a stable rule id (e.g. "unknown-path") and the
/// element or instance path it concerns. Services map it to HTTP 422 and
/// the CLI to exit code 1.
class DomainError : public std::runtime_error {
public:
    DomainError(std::string rule, std::string path, const std::string& message)
        : std::runtime_error(message), rule_(std::move(rule)), path_(std::move(path)) {}

    [[nodiscard]] const std::string& rule() const { return rule_; }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string rule_;
    std::string path_;
};

/// Raised for unreadable or unreachable inputs (files, URLs, archives).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace curator
