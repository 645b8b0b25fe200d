#pragma once

// Flat key=value configuration.
//
// File format: one `key = value` per line; blank lines and lines starting
// with `#` are skipped; whitespace around key and value is trimmed; the value
// runs to end of line (so regex patterns need no quoting). Keys outside the
// known set are rejected, as are malformed lines. CLI `--set key=value`
// overrides go through the same validation.

#include <map>
#include <string>

namespace oneshot {

class Config {
public:
    // Every known key with its default value.
    static const std::map<std::string, std::string>& defaults();

    // Defaults only.
    Config();

    static Config load_file(const std::string& path);   // IoError, ConfigError
    static Config from_text(const std::string& text);   // ConfigError

    // Throws ConfigError for unknown keys.
    void set(const std::string& key, const std::string& value);
    // Applies one "key=value" override (the CLI --set form).
    void set_pair(const std::string& pair);

    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;  // true/false/1/0/yes/no/on/off

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// A backend selector is either "builtin" or "external:<url>".
struct BackendSpec {
    bool builtin = true;
    std::string endpoint;  // set when not builtin
};

BackendSpec parse_backend_spec(const std::string& value);  // ConfigError

}  // namespace oneshot
