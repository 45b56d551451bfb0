#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mia/diff_attack.hpp"
#include "mia/eval.hpp"
#include "mia/harness.hpp"

namespace mia {

// Flat key/value store parsed from a TOML-style config file: [section]
// headers, key = value lines, # comments. Values are numbers, booleans,
// quoted strings, or arrays of those. Keys are stored as "section.key".
class ConfigMap {
public:
    static ConfigMap parse_file(const std::string& path);
    static ConfigMap parse_string(const std::string& text, const std::string& origin = "<str>");

    // "section.key=value" command-line override.
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const;

    // FNV-1a over the sorted canonical key=value listing.
    std::string digest() const;

private:
    std::map<std::string, std::string> values_;  // raw value text, canonicalized
};

// Full experiment description.
struct RunConfig {
    BenchmarkConfig benchmark;
    AttackConfig attack;
    double one_class_nu = 0.1;
    double top1_percentile = 90.0;
    std::vector<std::string> attacks = {"diff-w/"};
    SweepConfig sweep;
    std::string output_dir = "out";
    std::string digest;

    static RunConfig from_map(const ConfigMap& map);
};

}  // namespace mia
