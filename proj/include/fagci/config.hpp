#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fagci/channel.hpp"

namespace fagci {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration (a TOML-compatible subset): one
/// assignment per line, `#` comments, optional double quotes around values.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long_or(const std::string& key, long fallback) const;
    /// Comma-separated list.
    std::vector<std::string> get_list(const std::string& key) const;
    /// Whitespace/comma-separated numbers.
    std::vector<double> get_numbers(const std::string& key) const;

    /// Keys present in the file but never read; used to reject typos.
    std::vector<std::string> unread_keys() const;

  private:
    std::string origin_;
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> read_;
};

/// Constellation described under a key prefix: either `<p>.kind` with
/// `<p>.order` / `<p>.power_db`, kind "zero", or an explicit `<p>.points`
/// list of re/im pairs. Absent prefix falls back to {0}.
Constellation constellation_from_config(const KeyValueConfig& cfg, const std::string& prefix);

/// Metric token: matched | partial | full | ggauss:<beta> | decomp:<split>.
/// Decomposition metrics split the channel's J at the given digit boundary.
DecodingMetric metric_from_name(const std::string& name, const Channel& chan);

}  // namespace fagci
