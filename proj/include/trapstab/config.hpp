#pragma once

#include "trapstab/errors.hpp"

#include <map>
#include <optional>
#include <string>

namespace trapstab {

/// Flat key=value configuration file. Lines are `key = value`; blank
/// lines and lines starting with '#' are ignored. Keys outside the
/// recognized set are rejected so typos fail loudly.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    /// Parses the file at path. Throws ConfigError on syntax errors or
    /// unrecognized keys.
    static KeyValueConfig load(const std::string& path);

    /// Parses from an in-memory string (same rules), for tests.
    static KeyValueConfig parse(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<int> get_int(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
    std::string origin_;
};

} // namespace trapstab
