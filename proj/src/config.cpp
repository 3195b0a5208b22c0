#include "nsplan/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nsplan {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    std::size_t end = s.find_last_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto sit = sections_.find(section);
    return sit != sections_.end() && sit->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    auto sit = sections_.find(section);
    if (sit == sections_.end()) return fallback;
    auto kit = sit->second.find(key);
    return kit == sit->second.end() ? fallback : kit->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_string(section, key, "");
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config [" + section + "] " + key + ": not a number: " + v);
    }
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    return static_cast<int>(get_long(section, key, fallback));
}

long ConfigFile::get_long(const std::string& section, const std::string& key,
                          long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_string(section, key, "");
    try {
        std::size_t pos = 0;
        const long out = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config [" + section + "] " + key + ": not an integer: " + v);
    }
}

std::vector<double> ConfigFile::get_doubles(const std::string& section, const std::string& key,
                                            const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::istringstream in(get_string(section, key, ""));
    std::vector<double> out;
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            out.push_back(std::stod(trim(token)));
        } catch (const std::exception&) {
            throw std::invalid_argument("config [" + section + "] " + key +
                                        ": not a number list");
        }
    }
    return out;
}

std::vector<std::string> ConfigFile::get_strings(const std::string& section,
                                                 const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
    if (!has(section, key)) return fallback;
    std::istringstream in(get_string(section, key, ""));
    std::vector<std::string> out;
    std::string token;
    while (std::getline(in, token, ',')) out.push_back(trim(token));
    return out;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    sections_[section][key] = value;
}

void ConfigFile::require_known_keys(const std::string& section,
                                    const std::set<std::string>& allowed) const {
    auto sit = sections_.find(section);
    if (sit == sections_.end()) return;
    for (const auto& [key, value] : sit->second)
        if (allowed.count(key) == 0)
            throw std::invalid_argument("config [" + section + "]: unknown key '" + key + "'");
}

void ConfigFile::require_known_sections(const std::set<std::string>& allowed) const {
    for (const auto& [name, keys] : sections_)
        if (allowed.count(name) == 0)
            throw std::invalid_argument("config: unknown section '" + name + "'");
}

std::string ConfigFile::serialize() const {
    std::ostringstream out;
    for (const auto& [name, keys] : sections_) {
        out << "[" << name << "]\n";
        for (const auto& [key, value] : keys) out << key << " = " << value << "\n";
        out << "\n";
    }
    return out.str();
}

}  // namespace nsplan
