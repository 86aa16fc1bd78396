#include "config.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace darklattice::cli {

namespace pt = boost::property_tree;

namespace {

Config from_tree(const pt::ptree& tree, const std::string& origin)
{
    Config cfg;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            // ini_parser allows top-level keys; keep them unsectioned
            cfg.set(name, node.data());
            continue;
        }
        for (const auto& [key, leaf] : node) {
            if (!leaf.empty())
                throw ConfigError(origin + ": nested section under [" + name + "]");
            cfg.set(name + "." + key, leaf.data());
        }
    }
    return cfg;
}

std::string strip_comment(const std::string& v)
{
    // Trailing "; comment" / "# comment" after a value.
    std::string out = v;
    for (const char* mark : {" ;", " #", "\t;", "\t#"}) {
        const auto pos = out.find(mark);
        if (pos != std::string::npos)
            out.erase(pos);
    }
    boost::algorithm::trim(out);
    return out;
}

} // namespace

Config Config::parse_file(const std::string& path)
{
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.filename() + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    return from_tree(tree, path);
}

Config Config::parse_string(const std::string& text, const std::string& origin)
{
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    return from_tree(tree, origin);
}

void Config::merge(const Config& other)
{
    for (const auto& [k, v] : other.entries_)
        set(k, v);
}

void Config::set(const std::string& key, const std::string& value)
{
    const std::string clean = strip_comment(value);
    const auto it = index_.find(key);
    if (it != index_.end()) {
        entries_[it->second].second = clean;
        return;
    }
    index_[key] = entries_.size();
    entries_.emplace_back(key, clean);
}

void Config::apply_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set " + assignment + ": expected section.key=value");
    std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    boost::algorithm::trim(key);
    boost::algorithm::trim(value);
    if (key.find('.') == std::string::npos)
        throw ConfigError("--set " + assignment + ": key must be section.key");
    set(key, value);
}

bool Config::has(const std::string& key) const { return index_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const
{
    const auto it = index_.find(key);
    return it == index_.end() ? fallback : entries_[it->second].second;
}

std::string Config::require_string(const std::string& key) const
{
    const auto it = index_.find(key);
    if (it == index_.end())
        throw ConfigError("missing required key '" + key + "'");
    return entries_[it->second].second;
}

double Config::get_double(const std::string& key, double fallback) const
{
    if (!has(key))
        return fallback;
    const std::string v = get_string(key, "");
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

long Config::get_int(const std::string& key, long fallback) const
{
    if (!has(key))
        return fallback;
    const std::string v = get_string(key, "");
    try {
        return boost::lexical_cast<long>(v);
    } catch (const boost::bad_lexical_cast&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const
{
    if (!has(key))
        return fallback;
    const std::string v = get_string(key, "");
    if (v == "true" || v == "yes" || v == "1" || v == "on")
        return true;
    if (v == "false" || v == "no" || v == "0" || v == "off")
        return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& key) const
{
    std::vector<double> out;
    if (!has(key))
        return out;
    std::stringstream ss(get_string(key, ""));
    std::string item;
    while (std::getline(ss, item, ',')) {
        boost::algorithm::trim(item);
        if (item.empty())
            continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': bad list element '" + item + "'");
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> Config::section(const std::string& name) const
{
    std::vector<std::pair<std::string, std::string>> out;
    const std::string prefix = name + ".";
    for (const auto& [k, v] : entries_)
        if (k.compare(0, prefix.size(), prefix) == 0)
            out.emplace_back(k.substr(prefix.size()), v);
    return out;
}

std::string Config::to_ini() const
{
    // Group by section in first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> groups;
    for (const auto& [k, v] : entries_) {
        const auto dot = k.find('.');
        const std::string sec = dot == std::string::npos ? "" : k.substr(0, dot);
        const std::string key = dot == std::string::npos ? k : k.substr(dot + 1);
        if (!groups.count(sec))
            order.push_back(sec);
        groups[sec].emplace_back(key, v);
    }
    std::ostringstream out;
    for (const auto& sec : order) {
        if (!sec.empty())
            out << '[' << sec << "]\n";
        for (const auto& [k, v] : groups[sec])
            out << k << " = " << v << '\n';
    }
    return out.str();
}

std::uint64_t Config::digest() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : to_ini()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string preset_path(const std::string& name)
{
    namespace fs = std::filesystem;
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("DARKLATTICE_PRESET_DIR"))
        dirs.emplace_back(env);
#ifdef DARKLATTICE_PRESET_DIR
    dirs.emplace_back(DARKLATTICE_PRESET_DIR);
#endif
    dirs.emplace_back("presets");
    for (const auto& d : dirs) {
        const fs::path p = d / (name + ".ini");
        if (fs::exists(p))
            return p.string();
    }
    throw ConfigError("unknown preset '" + name + "'");
}

std::vector<SweepPoint> expand_sweep(const Config& base)
{
    struct Axis {
        std::string key;
        std::vector<std::string> values;
    };
    std::vector<Axis> axes;
    for (const auto& [key, list] : base.section("sweep")) {
        if (!base.has(key))
            throw ConfigError("sweep axis '" + key + "' does not name a configured parameter");
        Axis ax{key, {}};
        std::stringstream ss(list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            boost::algorithm::trim(item);
            if (!item.empty())
                ax.values.push_back(item);
        }
        if (!ax.values.empty())
            axes.push_back(std::move(ax));
    }

    std::size_t total = 1;
    for (const auto& ax : axes)
        total *= ax.values.size();
    std::vector<SweepPoint> points(total);
    for (std::size_t i = 0; i < total; ++i) {
        SweepPoint& pt = points[i];
        pt.index = i;
        pt.config = base;
        // Last axis varies fastest.
        std::size_t rem = i;
        std::vector<std::pair<std::string, std::string>> vals(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& ax = axes[a];
            vals[a] = {ax.key, ax.values[rem % ax.values.size()]};
            rem /= ax.values.size();
        }
        for (const auto& [k, v] : vals)
            pt.config.set(k, v);
        pt.values = std::move(vals);
    }
    return points;
}

} // namespace darklattice::cli
