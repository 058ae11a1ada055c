#pragma once

#include <cctype>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace shopeval {

inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // leading whitespace dropped
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_ws = false;
        }
    }
    return out;
}

inline std::string truncate_chars(std::string_view s, size_t n) {
    return std::string(s.substr(0, n));
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Unwraps a single surrounding ``` fence (optionally labeled), if present.
inline std::string strip_code_fence(const std::string& raw) {
    std::string s = trim(raw);
    if (s.rfind("```", 0) != 0) return s;
    const size_t open_end = s.find('\n');
    if (open_end == std::string::npos) return s;
    const size_t close = s.rfind("```");
    if (close == std::string::npos || close <= open_end) return s;
    return trim(s.substr(open_end + 1, close - open_end - 1));
}

inline std::vector<std::string> tokenize_words(std::string_view s) {
    std::vector<std::string> toks;
    std::string cur;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            toks.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) toks.push_back(std::move(cur));
    return toks;
}

// Default language check: mostly printable ASCII with at least one letter.
inline bool mostly_ascii_english(std::string_view s) {
    if (s.empty()) return false;
    size_t ascii = 0, letters = 0;
    for (unsigned char c : s) {
        if (c < 0x80) {
            ++ascii;
            if (std::isalpha(c)) ++letters;
        }
    }
    return letters > 0 && static_cast<double>(ascii) / static_cast<double>(s.size()) >= 0.9;
}

// Shortest-round-trip decimal text for a double; locale independent.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline bool starts_with(std::string_view s, std::string_view p) {
    return s.size() >= p.size() && s.substr(0, p.size()) == p;
}

}  // namespace shopeval
