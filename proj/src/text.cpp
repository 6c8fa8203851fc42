#include "nldst/text.hpp"

#include <cctype>
#include <regex>

namespace nldst {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

std::vector<Token> tokenize(const std::string& raw) {
    std::vector<Token> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (size_t i = 0; i < raw.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(raw[i]);
        if (std::isspace(c)) {
            flush();
        } else if (is_word_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (c == ':' && i > 0 && i + 1 < raw.size() &&
                   std::isdigit(static_cast<unsigned char>(raw[i - 1])) &&
                   std::isdigit(static_cast<unsigned char>(raw[i + 1]))) {
            // time-like "07:00" stays one token
            cur.push_back(':');
        } else {
            flush();
            out.emplace_back(1, static_cast<char>(c));
        }
    }
    flush();
    return out;
}

std::string join_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::string normalize_time(const std::string& surface) {
    std::string s;
    for (char c : surface) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "noon") return "12:00";
    if (s == "midnight") return "00:00";

    static const std::regex pat(R"(^\s*(\d{1,2})(?::(\d{2}))?\s*(am|pm)?\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, pat)) return "";
    int hour = std::stoi(m[1].str());
    int minute = m[2].matched ? std::stoi(m[2].str()) : 0;
    std::string meridiem = m[3].matched ? m[3].str() : "";
    if (minute > 59) return "";
    if (!meridiem.empty()) {
        if (hour < 1 || hour > 12) return "";
        if (meridiem == "am") hour = hour % 12;
        else hour = hour % 12 + 12;
    } else {
        // bare "7" is ambiguous, require a colon form or meridiem
        if (!m[2].matched) return "";
        if (hour > 23) return "";
    }
    char buf[6];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", hour, minute);
    return buf;
}

}  // namespace nldst
