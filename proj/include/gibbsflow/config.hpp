// Flat key-value configuration with [section] headers (keys become
// "section.key"). Chosen over nested formats for diffability; unknown keys
// are rejected when a preset declares its accepted set.

#pragma once

#include <map>
#include <string>
#include <vector>

namespace gibbsflow {

struct Config {
    std::map<std::string, std::string> values;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;

    // throws listing the offending key when one is not in the allowed set
    void require_known_keys(const std::vector<std::string>& allowed) const;

    // stable textual rendering (sorted key=value lines), used for hashing
    std::string canonical_text() const;
};

}  // namespace gibbsflow
