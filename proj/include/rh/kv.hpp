// Flat `key = value` text files: one entry per line, `#` starts a comment.

#pragma once

#include <istream>
#include <map>
#include <stdexcept>
#include <string>

namespace rh::kv {

struct Entry {
    std::string value;
    int line = 0;
};

using Table = std::map<std::string, Entry>;

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline Table parse(std::istream& in, const std::string& origin) {
    Table table;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        if (table.count(key) != 0) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        table.emplace(std::move(key), Entry{trim(line.substr(eq + 1)), lineno});
    }
    return table;
}

inline double to_double(const std::string& key, const Entry& e, const std::string& origin) {
    try {
        std::size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (used != e.value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(origin + ":" + std::to_string(e.line) + ": '" + key +
                         "' is not a number: " + e.value);
    }
}

inline long long to_integer(const std::string& key, const Entry& e, const std::string& origin) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(e.value, &used);
        if (used != e.value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(origin + ":" + std::to_string(e.line) + ": '" + key +
                         "' is not an integer: " + e.value);
    }
}

}  // namespace rh::kv
