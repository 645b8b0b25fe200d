#include "oneshot/config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "oneshot/errors.hpp"
#include "oneshot/videoio.hpp"

namespace oneshot {

const std::map<std::string, std::string>& Config::defaults() {
    static const std::map<std::string, std::string> table = {
        {"select.strategy", "crosshairs"},  // single | crosshairs | random | kmedoids
        {"select.offset_px", "8"},
        {"select.per_arm", "1"},
        {"select.k", "5"},
        {"select.seed", "1"},

        {"track.backend", "builtin"},
        {"track.patch_radius", "7"},
        {"track.search_radius", "20"},
        {"track.min_score", "0.5"},
        {"track.lost_after", "3"},
        {"track.drop_threshold_px", "8"},
        {"track.backward_refine", "true"},

        {"segment.backend", "builtin"},
        {"segment.tau", "30"},
        {"segment.area_cap", "0.25"},

        {"recog.enabled", "true"},
        {"recog.backend", "builtin"},
        {"recog.strategy", "center_crop"},  // resize | center_crop | background_add
        {"recog.prompt", "P6"},
        {"recog.pattern", "[A-Z]{3}-?[0-9]{4}"},
        {"recog.max_inflight", "4"},
        {"recog.timeout_ms", "30000"},

        {"eval.iou", "0.5"},

        {"pipeline.workers", "0"},  // 0 = all available cores
    };
    return table;
}

Config::Config() : values_(defaults()) {}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Config Config::load_file(const std::string& path) {
    try {
        return from_text(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Config Config::from_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value, got \"" +
                              stripped + "\"");
        try {
            cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
    if (!defaults().count(key)) throw ConfigError("unknown config key \"" + key + "\"");
    values_[key] = value;
}

void Config::set_pair(const std::string& pair) {
    const std::size_t eq = pair.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override \"" + pair + "\" is not of the form key=value");
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

const std::string& Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key \"" + key + "\"");
    return it->second;
}

int Config::get_int(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const int out = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing junk");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " needs an integer, got \"" + v + "\"");
    }
}

double Config::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing junk");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " needs a number, got \"" + v + "\"");
    }
}

bool Config::get_bool(const std::string& key) const {
    std::string v = get(key);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + " needs a boolean, got \"" + get(key) + "\"");
}

BackendSpec parse_backend_spec(const std::string& value) {
    if (value == "builtin") return {true, ""};
    const std::string prefix = "external:";
    if (value.rfind(prefix, 0) == 0 && value.size() > prefix.size())
        return {false, value.substr(prefix.size())};
    throw ConfigError("backend must be \"builtin\" or \"external:<url>\", got \"" + value + "\"");
}

}  // namespace oneshot
