// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace helmdd {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Key/value configuration text with [section] headers and '#' comments.
/// Keys inside a section are addressed as "section.key". Parse errors and
/// type errors name the offending line or field.
class Config {
public:
    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config c;
        c.origin_ = origin;
        std::istringstream is(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(t.substr(0, eq));
            const std::string val = trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            const std::string full = section.empty() ? key : section + "." + key;
            if (c.values_.count(full))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
            c.values_[full] = val;
            c.lines_[full] = lineno;
        }
        return c;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot open config file " + path);
        std::ostringstream ss;
        ss << is.rdbuf();
        return parse_string(ss.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(origin_ + ": missing required field '" + key + "'");
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& dflt) const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double dflt) const {
        return has(key) ? get_double(key) : dflt;
    }

    int get_int(const std::string& key) const {
        const double v = get_double(key);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v) throw field_error(key, "expected an integer");
        return i;
    }
    int get_int(const std::string& key, int dflt) const { return has(key) ? get_int(key) : dflt; }

    std::uint64_t get_u64(const std::string& key) const {
        const std::string s = get_string(key);
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw field_error(key, "expected an unsigned integer");
        }
    }
    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        return has(key) ? get_u64(key) : dflt;
    }

    std::vector<double> get_double_list(const std::string& key) const {
        std::istringstream is(get_string(key));
        std::vector<double> out;
        std::string tok;
        while (is >> tok) out.push_back(to_double(key, tok));
        if (out.empty()) throw field_error(key, "expected a nonempty list");
        return out;
    }
    std::vector<int> get_int_list(const std::string& key) const {
        std::vector<int> out;
        for (double v : get_double_list(key)) {
            const int i = static_cast<int>(v);
            if (static_cast<double>(i) != v) throw field_error(key, "expected integers");
            out.push_back(i);
        }
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    ConfigError field_error(const std::string& key, const std::string& why) const {
        auto it = lines_.find(key);
        const std::string loc =
            it == lines_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
        return ConfigError(loc + ": field '" + key + "': " + why);
    }

    double to_double(const std::string& key, const std::string& s) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw field_error(key, "expected a number, got '" + s + "'");
        }
    }

    std::string origin_;
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
};

}  // namespace helmdd
