#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace nsplan {

/// Flat key/value configuration with [section] headers and '#' comments.
/// Unknown keys are rejected when a section is read through typed getters
/// with a declared key set.
class ConfigFile {
  public:
    ConfigFile() = default;
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<std::string> get_strings(const std::string& section, const std::string& key,
                                         const std::vector<std::string>& fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    /// Throws std::invalid_argument if `section` contains a key outside
    /// `allowed`, or if an unknown section name appears in `sections`.
    void require_known_keys(const std::string& section, const std::set<std::string>& allowed) const;
    void require_known_sections(const std::set<std::string>& allowed) const;

    std::string serialize() const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace nsplan
