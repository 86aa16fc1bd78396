#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace darklattice::cli {

// Raised for malformed files, bad overrides and invalid field values; the
// message names the file/line or the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key-value view of an INI file: "[lattice] n_perp = 12" becomes
// "lattice.n_perp". Insertion order is kept so echoes are stable.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    // Later sources win; used for preset -> file -> --set layering.
    void merge(const Config& other);
    void set(const std::string& key, const std::string& value);
    void apply_override(const std::string& assignment);  // "section.key=value"

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;

    // Keys under "section." with the prefix stripped, in order.
    std::vector<std::pair<std::string, std::string>> section(const std::string& name) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    // Canonical INI text; parse_string(to_ini()) reproduces the same entries.
    std::string to_ini() const;
    std::uint64_t digest() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

// presets/<name>.ini, looked up in DARKLATTICE_PRESET_DIR, then the source tree.
std::string preset_path(const std::string& name);

// One point of the cartesian product of [sweep] axes.
struct SweepPoint {
    std::size_t index = 0;
    std::vector<std::pair<std::string, std::string>> values;  // key -> value text
    Config config;  // base config with the sweep values applied
};

// Axes are the keys of [sweep]; each must name a key present in the config.
// An empty sweep yields the base config as the single point.
std::vector<SweepPoint> expand_sweep(const Config& base);

} // namespace darklattice::cli
