#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cowp::str {

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

inline std::string trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    std::string h = lower(haystack);
    std::string n = lower(needle);
    return h.find(n) != std::string::npos;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

/// Lowercase word tokens, punctuation stripped. "Cup is broken." -> {cup,is,broken}
inline std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// True iff `phrase`'s tokens occur consecutively among `text`'s tokens.
inline bool phrase_in(std::string_view phrase, std::string_view text) {
    auto p = words(phrase);
    auto t = words(text);
    if (p.empty() || p.size() > t.size()) return false;
    for (size_t i = 0; i + p.size() <= t.size(); ++i) {
        if (std::equal(p.begin(), p.end(), t.begin() + i)) return true;
    }
    return false;
}

/// Identifier form of a phrase: "measuring cup" -> "measuring_cup".
inline std::string to_identifier(std::string_view s) {
    auto w = words(s);
    return join(w, "_");
}

/// Natural-language form of an identifier: "measuring_cup" -> "measuring cup".
inline std::string to_phrase(std::string_view ident) {
    std::string out(ident);
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

} // namespace cowp::str
